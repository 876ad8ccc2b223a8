"""The intersection pairing between marked metric graphs and rational
currents, computed by two independent routes that must agree exactly.

Route A expands the current and evaluates translation lengths term by
term; route B sums, over the positive edges of the chart, the edge length
times the one-edge cylinder count.  Both routes are exact rational
arithmetic, so any difference between them is a defect, not a rounding
artefact: a mismatch raises :class:`RouteDisagreement` instead of being
averaged away.

Length functions that are not backed by a chart (for example limits
produced by iterating an automorphism) enter through
:class:`LengthFunctionOracle`, which may be approximate but must then
carry an explicit per-query error estimate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .currents import RationalCurrent, cylinder_count
from .marked_graph import MarkedMetricGraph, translation_length
from .words import Automorphism, Word, cyclic_length
from . import currents as _currents
from . import marked_graph as _marked_graph


class RouteDisagreement(Exception):
    """The two exact evaluation routes differ: an implementation bug."""


@dataclass(frozen=True)
class IntersectionReport:
    value: Fraction
    via_lengths: Fraction
    via_crossings: Fraction


def intersect_report(M: MarkedMetricGraph, mu: RationalCurrent) -> IntersectionReport:
    if M.rank != mu.rank:
        raise ValueError("rank mismatch")
    via_lengths = sum(
        (weight * translation_length(M, cw.as_word()) for cw, weight in mu.terms),
        Fraction(0),
    )
    via_crossings = sum(
        (
            M.lengths[k - 1] * cylinder_count(mu, M, (k,))
            for k in M.graph.positive_edges
        ),
        Fraction(0),
    )
    if via_lengths != via_crossings:
        raise RouteDisagreement(
            f"length route {via_lengths} != crossing route {via_crossings}"
        )
    return IntersectionReport(via_lengths, via_lengths, via_crossings)


def intersect(M: MarkedMetricGraph, mu: RationalCurrent) -> Fraction:
    """Exact pairing of a chart with a rational current.

    Zero exactly when the current is zero, homogeneous in the lengths,
    linear in the current, and invariant when both sides are moved by the
    same automorphism.
    """
    return intersect_report(M, mu).value


@dataclass(frozen=True)
class LengthFunctionOracle:
    """A translation length function given only as an evaluator.

    ``evaluate`` must vanish on the identity, be conjugacy invariant and
    power homogeneous; since the oracle may be a black box these are spot
    checked on request rather than provable at construction.  Approximate
    oracles (exact=False) should supply ``error_bound``.
    """

    evaluate: Callable[[Word], Fraction | float]
    exact: bool
    error_bound: Optional[Callable[[Word], float]] = None
    description: str = ""

    def __call__(self, w: Word) -> Fraction | float:
        return self.evaluate(w)

    @classmethod
    def from_marked_graph(cls, M: MarkedMetricGraph) -> "LengthFunctionOracle":
        return cls(
            evaluate=lambda w: translation_length(M, w),
            exact=True,
            description="chart lengths",
        )

    def spot_check(self, sample: Sequence[Word], rel_tol: float = 1e-6) -> None:
        """Raise if the oracle visibly fails the length-function laws on
        the sample (identity value, conjugacy invariance, homogeneity)."""

        def close(x, y) -> bool:
            if self.exact:
                return x == y
            return abs(float(x) - float(y)) <= rel_tol * (1 + abs(float(x)))

        for w in sample:
            if w.is_identity:
                if self.evaluate(w) != 0:
                    raise ValueError("oracle does not vanish on the identity")
                continue
            base = self.evaluate(w)
            u = Word(w.rank, (1,)) if w.letters[0] != -1 else Word(w.rank, (2,))
            if not close(self.evaluate(w.conjugate_by(u)), base):
                raise ValueError(f"oracle is not conjugacy invariant at {w}")
            if not close(self.evaluate(w ** 2), 2 * base):
                raise ValueError(f"oracle is not power homogeneous at {w}")


def intersect_oracle(oracle: LengthFunctionOracle, mu: RationalCurrent):
    """Pairing of an oracle-backed length function with a rational
    current: the weighted sum of oracle values over the terms (a finite
    sum, so no limit is involved).  Exactness follows the oracle."""
    total = Fraction(0) if oracle.exact else 0.0
    for cw, weight in mu.terms:
        total += (weight if oracle.exact else float(weight)) * oracle.evaluate(cw.as_word())
    return total


@dataclass(frozen=True)
class EquivarianceReport:
    moved: Fraction
    original: Fraction

    @property
    def equal(self) -> bool:
        return self.moved == self.original


def equivariance_check(
    phi: Automorphism, M: MarkedMetricGraph, mu: RationalCurrent
) -> EquivarianceReport:
    """Evaluate the pairing before and after moving both arguments by
    ``phi``; the two exact values are reported, equality is the caller's
    assertion."""
    moved = intersect(_marked_graph.act(phi, M), _currents.act(phi, mu))
    original = intersect(M, mu)
    return EquivarianceReport(moved, original)


@dataclass(frozen=True)
class ScalingReport:
    delta: Fraction
    lengths_one: tuple[Fraction, ...]
    lengths_two: tuple[Fraction, ...]
    empirical_modulus: Fraction
    a_priori_modulus: Fraction
    worst_word: Optional[Word]
    skipped_identities: int

    @property
    def holds(self) -> bool:
        return self.empirical_modulus <= self.a_priori_modulus


def scaling_modulus_experiment(
    M: MarkedMetricGraph,
    delta,
    sample: Sequence[Word],
    seed: int = 0,
) -> ScalingReport:
    """Perturb the chart twice and measure how translation lengths move.

    Each edge length of each perturbed copy is shifted by an exact
    rational amount of magnitude at most delta/2, so corresponding edges
    of the two copies differ by at most delta.  For every sampled word
    the length difference is then at most delta times the number of edge
    crossings, giving the a-priori modulus
    ``delta * max(crossings(w) / cyclic_length_A(w))`` which the measured
    modulus may not exceed; a violation raises.
    """
    delta = Fraction(delta)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    rng = random.Random(seed)

    def perturbed() -> MarkedMetricGraph:
        out = []
        for L in M.lengths:
            shift = delta * Fraction(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 21)
            if L + shift <= 0:
                raise ValueError(f"perturbation makes edge length {L} nonpositive")
            out.append(L + shift)
        return _marked_graph.with_lengths(M, out)

    T1, T2 = perturbed(), perturbed()
    empirical = Fraction(0)
    ratio = Fraction(0)
    worst = None
    skipped = 0
    for w in sample:
        den = cyclic_length(w)
        if den == 0:
            skipped += 1
            continue
        gap = abs(translation_length(T1, w) - translation_length(T2, w)) / den
        crossings = len(_marked_graph.cyclic_reduce_path(M.word_to_path(w)))
        ratio = max(ratio, Fraction(crossings, den))
        if gap > empirical:
            empirical, worst = gap, w
    report = ScalingReport(
        delta=delta,
        lengths_one=T1.lengths,
        lengths_two=T2.lengths,
        empirical_modulus=empirical,
        a_priori_modulus=delta * ratio,
        worst_word=worst,
        skipped_identities=skipped,
    )
    if not report.holds:
        raise RouteDisagreement(
            f"empirical modulus {empirical} exceeds a-priori bound {report.a_priori_modulus}"
        )
    return report
