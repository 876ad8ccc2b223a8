"""Batch command line front end.

Commands read JSON inputs, run one computation and emit a single result
(JSON object) or a table (CSV with ``#`` header lines).  Every output
carries the tool version, a hash of the fully resolved configuration and
the random seed (null when the command uses none), and is byte-identical
across reruns with the same inputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import click

from . import __version__
from .currents import RationalCurrent, frequency_vector
from .dynamics import (
    graph_map_from_json_obj,
    iwip_rows,
    metric_from_pf,
    pf_eigenpair,
    transition_matrix,
)
from .intersection import RouteDisagreement, intersect_report, scaling_modulus_experiment
from .marked_graph import (
    MarkedMetricGraph,
    bbt_upper_bound,
    marked_graph_from_json_obj,
    translation_length,
)
from .splittings import FreeSplitting, bfs_distance
from .words import Automorphism, CyclicWord, Word, parse_word, reduce, word_str


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _fail(f"cannot read JSON from {path}: {exc}")


def _load_graph(path: str) -> MarkedMetricGraph:
    try:
        return marked_graph_from_json_obj(_load_json(path))
    except (KeyError, ValueError) as exc:
        raise _fail(f"bad graph file {path}: {exc}")


def _load_current(path: str) -> RationalCurrent:
    try:
        return RationalCurrent.from_json_obj(_load_json(path))
    except (KeyError, ValueError) as exc:
        raise _fail(f"bad current file {path}: {exc}")


def _parse_word_arg(text: str, rank: int) -> Word:
    try:
        if text.lstrip().startswith("["):
            return reduce(json.loads(text), rank)
        return parse_word(text, rank)
    except (ValueError, json.JSONDecodeError) as exc:
        raise _fail(f"bad word {text!r}: {exc}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters of one batch run, hashed into every output so
    reruns are verifiable."""

    command: str
    rank: int
    inputs: tuple[tuple[str, str], ...]
    iteration_cap: Optional[int] = None
    depth: Optional[int] = None
    tolerance: Optional[float] = None
    seed: Optional[str] = None

    def __post_init__(self) -> None:
        if self.iteration_cap is not None and self.iteration_cap < 1:
            raise ValueError("iteration cap must be >= 1")
        if self.depth is not None and self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    def payload(self) -> dict:
        return asdict(self)


def _config_hash(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _meta(command: str, payload, seed=None) -> dict:
    return {
        "tool": "oi",
        "version": __version__,
        "config_hash": _config_hash([command, payload]),
        "seed": seed,
    }


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True, indent=2))


def _echo_csv(command: str, payload, seed, columns, rows, extra_header=()) -> None:
    meta = _meta(command, payload, seed)
    click.echo(f"# oi {command} v{meta['version']}")
    click.echo(f"# config_hash={meta['config_hash']} seed={meta['seed']}")
    for line in extra_header:
        click.echo(f"# {line}")
    click.echo(",".join(columns))
    for row in rows:
        click.echo(",".join(row))


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


@click.group()
@click.version_option(__version__, prog_name="oi")
def main() -> None:
    """Exact intersection pairings on free groups: length functions,
    currents, expanding-map diagnostics and splitting graphs."""
    threads = os.environ.get("OI_THREADS")
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            raise _fail(f"OI_THREADS must be a positive integer, got {threads!r}")


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.argument("word")
def translen(graph: str, word: str) -> None:
    """Translation length of WORD on the tree of GRAPH."""
    M = _load_graph(graph)
    w = _parse_word_arg(word, M.rank)
    click.echo(_fmt(translation_length(M, w)))


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
def bbt(graph: str) -> None:
    """Back-tracking bound of GRAPH: total generator displacement."""
    M = _load_graph(graph)
    click.echo(_fmt(bbt_upper_bound(M)))


@main.command()
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.argument("current", type=click.Path(exists=True, dir_okay=False))
def intersect(graph: str, current: str) -> None:
    """Pairing of GRAPH with CURRENT; both evaluation routes are shown
    and any disagreement is a hard failure."""
    M = _load_graph(graph)
    mu = _load_current(current)
    payload = {"graph": graph, "current": current}
    try:
        report = intersect_report(M, mu)
    except RouteDisagreement as exc:
        click.echo(f"route disagreement: {exc}", err=True)
        sys.exit(3)
    _echo_json(
        {
            "value": _fmt(report.value),
            "route_a": _fmt(report.via_lengths),
            "route_b": _fmt(report.via_crossings),
            "meta": _meta("intersect", payload),
        }
    )


@main.command("current-freq")
@click.argument("current", type=click.Path(exists=True, dir_okay=False))
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--depth", "-k", default=1, show_default=True, help="Cylinder path length.")
def current_freq(current: str, graph: str, depth: int) -> None:
    """Frequency vector of CURRENT at the given depth on GRAPH."""
    M = _load_graph(graph)
    mu = _load_current(current)
    if mu.is_zero:
        raise _fail("the zero current has no frequency vector")
    vec = frequency_vector(mu, M, depth)
    rows = [
        [".".join(M.graph.name(e) for e in path), _fmt(value)]
        for path, value in vec.entries
    ]
    _echo_csv(
        "current-freq",
        {"current": current, "graph": graph, "depth": depth},
        None,
        ["path", "frequency"],
        rows,
    )


@main.command("scaling-exp")
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--delta", default="1/10", show_default=True, help="Perturbation size (rational).")
@click.option("--samples", default=1000, show_default=True)
@click.option("--max-len", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
def scaling_exp(graph: str, delta: str, samples: int, max_len: int, seed: int) -> None:
    """Perturb GRAPH twice and compare the length change of sampled words
    against the a-priori scaling bound."""
    M = _load_graph(graph)
    try:
        d = Fraction(delta)
    except ValueError:
        raise _fail(f"bad delta {delta!r}")
    rng = random.Random(seed)
    sample = [_random_reduced_word(rng, M.rank, rng.randint(1, max_len)) for _ in range(samples)]
    config = ExperimentConfig(
        command="scaling-exp",
        rank=M.rank,
        inputs=(("graph", graph),),
        iteration_cap=samples,
        depth=max_len,
        seed=str(seed),
    )
    try:
        report = scaling_modulus_experiment(M, d, sample, seed=seed)
    except ValueError as exc:
        raise _fail(str(exc))
    _echo_json(
        {
            "delta": _fmt(report.delta),
            "empirical_modulus": _fmt(report.empirical_modulus),
            "a_priori_modulus": _fmt(report.a_priori_modulus),
            "holds": report.holds,
            "worst_word": None if report.worst_word is None else word_str(report.worst_word),
            "skipped_identities": report.skipped_identities,
            "meta": _meta("scaling-exp", config.payload(), seed),
        }
    )


def _random_reduced_word(rng: random.Random, rank: int, length: int) -> Word:
    letters: list[int] = []
    alphabet = [l for i in range(1, rank + 1) for l in (i, -i)]
    while len(letters) < length:
        l = rng.choice(alphabet)
        if letters and letters[-1] == -l:
            continue
        letters.append(l)
    return Word(rank, tuple(letters))


@main.command()
@click.option("--map", "map_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", default=1e-12, show_default=True)
def pf(map_path: str, tol: float) -> None:
    """Dominant eigenpair of the transition matrix of an expanding map."""
    f = _load_graph_map(map_path)
    T = transition_matrix(f)
    result = pf_eigenpair(T, tol=tol)
    M = metric_from_pf(f, tol=tol)
    g = f.chart.graph
    _echo_json(
        {
            "lambda": _fmt(result.eigenvalue),
            "lambda_error": _fmt(result.eigenvalue_bound),
            "residual": _fmt(result.residual),
            "iterations": result.iterations,
            "eigenvector": {
                g.edge_names[k - 1]: _fmt(result.eigenvector[k - 1])
                for k in g.positive_edges
            },
            "metric": {
                g.edge_names[k - 1]: _fmt(M.lengths[k - 1]) for k in g.positive_edges
            },
            "meta": _meta("pf", {"map": map_path, "tol": tol}),
        }
    )


def _load_graph_map(path: str):
    try:
        return graph_map_from_json_obj(_load_json(path))
    except (KeyError, ValueError) as exc:
        raise _fail(f"bad graph map file {path}: {exc}")


@main.command()
@click.option("--map", "map_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", "seed_word", required=True, help="Seed word, e.g. 'a' or '[1,2]'.")
@click.option("--n", "n_max", default=10, show_default=True)
@click.option("--depth", default=2, show_default=True, help="Frequency vector depth.")
@click.option("--tol", default=1e-12, show_default=True)
@click.option("--cap", default=10 ** 6, show_default=True, help="Letter budget for iterates.")
@click.option(
    "--n-cap", default=15, show_default=True,
    help="Iteration ceiling; the stretch-factor error drifts like 2n times "
    "its enclosure width, so deep runs need a smaller tol.",
)
def iwip(
    map_path: str, seed_word: str, n_max: int, depth: int, tol: float, cap: int, n_cap: int
) -> None:
    """Deflated length, pairing and frequency diagnostics for an
    expanding map, one CSV row per iteration."""
    f = _load_graph_map(map_path)
    g = _parse_word_arg(seed_word, f.chart.rank)
    if g.is_identity:
        raise _fail("seed word must be nontrivial")
    if n_max > n_cap:
        raise _fail(f"n={n_max} exceeds the iteration ceiling {n_cap} (raise --n-cap deliberately)")
    config = ExperimentConfig(
        command="iwip",
        rank=f.chart.rank,
        inputs=(("map", map_path),),
        iteration_cap=cap,
        depth=depth,
        tolerance=tol,
        seed=seed_word,
    )
    pf_result = pf_eigenpair(transition_matrix(f), tol=tol)
    lam = pf_result.eigenvalue
    drift = 2 * n_max * pf_result.eigenvalue_bound / lam
    rows = iwip_rows(f.automorphism, f.chart, lam, g, n_max, depth, cap)
    _echo_csv(
        "iwip",
        config.payload(),
        seed_word,
        ["n", "length_estimate", "pairing_estimate", "freq_delta"],
        [
            [
                str(r.n),
                "cap_exceeded" if r.length_estimate is None else _fmt(r.length_estimate),
                "cap_exceeded" if r.pairing_estimate is None else _fmt(r.pairing_estimate),
                "cap_exceeded"
                if r.freq_delta is None and r.length_estimate is None
                else ("" if r.freq_delta is None else _fmt(float(r.freq_delta))),
            ]
            for r in rows
        ],
        extra_header=[
            f"lambda={_fmt(lam)} lambda_error={_fmt(pf_result.eigenvalue_bound)} "
            f"relative_drift_bound={_fmt(drift)}"
        ],
    )


def _load_vertex(path: str):
    obj = _load_json(path)
    try:
        if "kind" in obj:
            return FreeSplitting.from_json_obj(obj)
        if "terms" in obj:
            return RationalCurrent.from_json_obj(obj)
        if "class" in obj:
            w = reduce(obj["class"], int(obj["rank"]))
            return CyclicWord(w.rank, w.letters)
        if "edges" in obj:
            return marked_graph_from_json_obj(obj)
    except (KeyError, ValueError) as exc:
        raise _fail(f"bad vertex file {path}: {exc}")
    raise _fail(f"cannot tell what kind of vertex {path} holds")


@main.command("graph")
@click.option("--flavor", required=True, type=click.Choice(["F", "S", "Fstar", "Z", "I0"]))
@click.option("--from", "from_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--to", "to_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--radius", default=3, show_default=True)
@click.option("--moves", "moves_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--search-length", default=6, show_default=True)
@click.option("--key-depth", default=4, show_default=True)
@click.option("--state-cap", default=5000, show_default=True)
def graph_cmd(
    flavor: str,
    from_path: str,
    to_path: str,
    radius: int,
    moves_path: str | None,
    search_length: int,
    key_depth: int,
    state_cap: int,
) -> None:
    """Bounded-radius distance between two vertices of a splitting graph."""
    v1, v2 = _load_vertex(from_path), _load_vertex(to_path)
    moves = []
    if moves_path:
        try:
            moves = [Automorphism.from_json_obj(o) for o in _load_json(moves_path)]
        except (KeyError, ValueError) as exc:
            raise _fail(f"bad moves file {moves_path}: {exc}")
    payload = {
        "flavor": flavor,
        "from": from_path,
        "to": to_path,
        "radius": radius,
        "moves": moves_path,
        "search_length": search_length,
        "key_depth": key_depth,
    }
    try:
        dist = bfs_distance(
            flavor,  # type: ignore[arg-type]
            v1,
            v2,
            radius,
            moves,
            search_length=search_length,
            key_depth=key_depth,
            state_cap=state_cap,
        )
    except ValueError as exc:
        raise _fail(str(exc))
    _echo_json(
        {
            "flavor": flavor,
            "distance": dist,
            "radius": radius,
            "meta": _meta("graph", payload),
        }
    )


if __name__ == "__main__":
    main()
