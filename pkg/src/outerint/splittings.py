"""One-edge free splittings and the desk-scale splitting graphs.

A splitting is either separating (the group splits as the subgroup on a
proper subset of the basis against the subgroup on the rest) or of loop
type (one distinguished stable letter over the subgroup on the remaining
letters), optionally twisted by an automorphism.  Its Bass-Serre tree is
only ever touched through the integer translation length function:

* separating, untwisted: the number of maximal basis-vs-complement
  syllable blocks of the cyclic word, when both kinds occur (always
  even), else 0;
* loop, untwisted: the number of stable-letter occurrences in the cyclic
  word;
* twisted: the same after applying the inverse twist.

Vertices of the splitting graphs are identified by their length functions
sampled on a fixed finite test set (:class:`GraphVertexKey`).  Distinct
splittings may in principle share a key at a given depth; merges of
structurally different data are re-checked at a deeper depth and raise
:class:`KeyCollisionError` on disagreement instead of silently merging.

The adjacency predicates are deliberately partial where no algorithm is
available: refinement adjacency decides only coordinate-compatible pairs,
and common-elliptic adjacency is a bounded search whose negative verdict
("none found within the bound") is not a proof of non-adjacency.
Distances come from breadth-first search over an explicitly generated
vertex universe, so they are exact within the explored ball and upper
bounds in general.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Literal, Optional, Sequence, Union

from .currents import RationalCurrent, one_letter_mass, scale
from .marked_graph import MarkedMetricGraph, translation_length
from .words import (
    Automorphism,
    CyclicWord,
    Word,
    compose,
    cyclic_reduce,
    enumerate_cyclic_words,
    flip_normalize,
)

Flavor = Literal["F", "S", "Fstar", "Z", "I0"]
FLAVORS: tuple[Flavor, ...] = ("F", "S", "Fstar", "Z", "I0")


class StateCapExceeded(Exception):
    def __init__(self, explored: int):
        super().__init__(f"state cap exceeded after exploring {explored} vertices")
        self.explored = explored


class KeyCollisionError(Exception):
    """Two splittings agree on the key test set but differ deeper: the
    key depth is too coarse for this instance."""


@dataclass(frozen=True)
class FreeSplitting:
    """A one-edge trivial-edge-group splitting, possibly twisted."""

    rank: int
    kind: Literal["sep", "loop"]
    subset: Optional[frozenset[int]]
    stable: Optional[int]
    twist: Automorphism

    def __post_init__(self) -> None:
        if self.rank < 2:
            raise ValueError("rank must be >= 2")
        if self.twist.rank != self.rank:
            raise ValueError("twist rank mismatch")
        if self.kind == "sep":
            if self.stable is not None or self.subset is None:
                raise ValueError("separating splittings need a subset and no stable letter")
            if not self.subset or not self.subset < set(range(1, self.rank + 1)):
                raise ValueError("subset must be nonempty and proper in {1..N}")
        elif self.kind == "loop":
            if self.subset is not None or self.stable is None:
                raise ValueError("loop splittings need a stable letter and no subset")
            if not 1 <= self.stable <= self.rank:
                raise ValueError("stable letter out of range")
        else:
            raise ValueError(f"unknown splitting kind {self.kind!r}")

    def to_json_obj(self) -> dict:
        obj: dict = {"kind": self.kind, "rank": self.rank}
        if self.kind == "sep":
            obj["subset"] = sorted(self.subset)
        else:
            obj["stable"] = self.stable
        obj["twist"] = None if self.twist.is_identity else self.twist.to_json_obj()
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FreeSplitting":
        twist = obj.get("twist")
        if twist is not None:
            phi = Automorphism.from_json_obj(twist)
            rank = phi.rank
        else:
            if "rank" not in obj:
                raise ValueError("untwisted splitting JSON needs an explicit rank")
            rank = int(obj["rank"])
            phi = Automorphism.identity(rank)
        if obj["kind"] == "sep":
            return separating_splitting(rank, obj["subset"], phi)
        return loop_splitting(rank, int(obj["stable"]), phi)


def separating_splitting(
    rank: int, subset: Iterable[int], twist: Automorphism | None = None
) -> FreeSplitting:
    return FreeSplitting(
        rank, "sep", frozenset(subset), None, twist or Automorphism.identity(rank)
    )


def loop_splitting(rank: int, stable: int, twist: Automorphism | None = None) -> FreeSplitting:
    return FreeSplitting(rank, "loop", None, stable, twist or Automorphism.identity(rank))


def act(phi: Automorphism, s: FreeSplitting) -> FreeSplitting:
    if phi.rank != s.rank:
        raise ValueError("rank mismatch")
    return FreeSplitting(s.rank, s.kind, s.subset, s.stable, compose(phi, s.twist))


def splitting_length(s: FreeSplitting, g: Word) -> int:
    """Translation length of ``g`` on the Bass-Serre tree of ``s``."""
    if g.rank != s.rank:
        raise ValueError("rank mismatch")
    if not s.twist.is_identity:
        g = s.twist.apply_inverse(g)
    root, _ = cyclic_reduce(g)
    if root is None:
        return 0
    letters = root.letters
    if s.kind == "loop":
        return sum(1 for l in letters if abs(l) == s.stable)
    inside = [abs(l) in s.subset for l in letters]
    if all(inside) or not any(inside):
        return 0
    n = len(inside)
    return sum(1 for i in range(n) if inside[i] != inside[(i + 1) % n])


def is_elliptic(s: FreeSplitting, g: Word) -> bool:
    if g.is_identity:
        raise ValueError("the identity is not classified as elliptic or hyperbolic")
    return splitting_length(s, g) == 0


@dataclass(frozen=True)
class GraphVertexKey:
    """Length-function fingerprint on the deterministic test set of all
    cyclic words up to the given depth (inverse pairs listed once)."""

    rank: int
    depth: int
    lengths: tuple[int, ...]


def vertex_key(s: FreeSplitting, depth: int = 4) -> GraphVertexKey:
    test_set = enumerate_cyclic_words(s.rank, depth, up_to_inversion=True)
    return GraphVertexKey(
        s.rank, depth, tuple(splitting_length(s, cw.as_word()) for cw in test_set)
    )


def fstar_adjacent(
    s1: FreeSplitting, s2: FreeSplitting, search_length: int = 6
) -> Optional[CyclicWord]:
    """Search for a common elliptic element among all cyclic words up to
    ``search_length``.

    Returns a witness, or None when none exists within the bound; the
    None verdict is sound but not a proof of non-adjacency.  Equal
    vertices are rejected (the graph is simple).
    """
    if s1.rank != s2.rank:
        raise ValueError("rank mismatch")
    if vertex_key(s1) == vertex_key(s2):
        raise ValueError("identical vertices are not adjacency candidates")
    return _common_elliptic(s1, s2, search_length)


def _common_elliptic(
    s1: FreeSplitting, s2: FreeSplitting, search_length: int
) -> Optional[CyclicWord]:
    for cw in enumerate_cyclic_words(s1.rank, search_length, up_to_inversion=True):
        w = cw.as_word()
        if is_elliptic(s1, w) and is_elliptic(s2, w):
            return cw
    return None


def _same_twist(s1: FreeSplitting, s2: FreeSplitting) -> bool:
    return s1.twist.images == s2.twist.images


def refinement_adjacent(s1: FreeSplitting, s2: FreeSplitting) -> str:
    """Decidable refinement adjacency for separating splittings.

    Certifies "yes" for pairs in a compatible coordinate system: equal
    twist and strictly nested subsets (the three-factor refinement is then
    read off the basis).  Returns "no" for equal vertices and "unknown"
    otherwise; no general refinement detection is attempted.
    """
    if s1.kind != "sep" or s2.kind != "sep":
        raise ValueError("refinement adjacency is defined here for separating splittings")
    if s1.rank != s2.rank:
        raise ValueError("rank mismatch")
    if vertex_key(s1) == vertex_key(s2):
        return "no"
    if not _same_twist(s1, s2):
        return "unknown"
    if s1.subset < s2.subset or s2.subset < s1.subset:
        return "yes"
    return "unknown"


def cut_refinement_adjacent(s1: FreeSplitting, s2: FreeSplitting) -> str:
    """Coordinate-compatible refinement adjacency allowing loop types.

    Beyond nested separating pairs: a separating splitting and a loop
    splitting refine to a common two-edge graph exactly when the stable
    letter avoids the subset, and two loop splittings with distinct
    stable letters always do (same twist required throughout).
    """
    if s1.rank != s2.rank:
        raise ValueError("rank mismatch")
    if vertex_key(s1) == vertex_key(s2):
        return "no"
    if not _same_twist(s1, s2):
        return "unknown"
    if s1.kind == "sep" and s2.kind == "sep":
        return "yes" if (s1.subset < s2.subset or s2.subset < s1.subset) else "unknown"
    if s1.kind == "loop" and s2.kind == "loop":
        return "yes" if s1.stable != s2.stable else "unknown"
    sep, loop = (s1, s2) if s1.kind == "sep" else (s2, s1)
    return "yes" if loop.stable not in sep.subset else "unknown"


TreeVertex = Union[FreeSplitting, MarkedMetricGraph]
GraphVertex = Union[FreeSplitting, MarkedMetricGraph, RationalCurrent, CyclicWord]


def intersection_graph_adjacent(T: TreeVertex, mu: RationalCurrent) -> bool:
    """Whether [T] and [mu] span an edge of the intersection graph, i.e.
    the pairing vanishes exactly.  Charts act freely, so they are never
    adjacent to a nonzero current."""
    if mu.is_zero:
        raise ValueError("the zero current has no projective class")
    if isinstance(T, MarkedMetricGraph):
        return False
    total = 0
    for cw, weight in mu.terms:
        total += weight * splitting_length(T, cw.as_word())
    return total == 0


def map_j(s: FreeSplitting) -> FreeSplitting:
    """Vertex map from the refinement graph to the common-elliptic graph;
    the vertex data is unchanged, only the ambient adjacency changes."""
    return s


def map_q(s: FreeSplitting) -> FreeSplitting:
    """Vertex map into the intersection graph: the splitting stands for
    the projective class of its Bass-Serre tree."""
    return s


# -- breadth-first exploration -------------------------------------------------


def _class_key(cw: CyclicWord) -> tuple:
    return ("class", flip_normalize(cw).letters)


def _current_key(mu: RationalCurrent) -> tuple:
    unit = scale(Fraction(1) / one_letter_mass(mu), mu)
    return ("curr", tuple((cw.letters, w) for cw, w in unit.terms))


def _chart_key(M: MarkedMetricGraph, depth: int) -> tuple:
    test_set = enumerate_cyclic_words(M.rank, depth, up_to_inversion=True)
    values = [translation_length(M, cw.as_word()) for cw in test_set]
    first = next(v for v in values if v > 0)
    return ("cvtree", tuple(v / first for v in values))


def _splitting_data(s: FreeSplitting) -> tuple:
    return (s.kind, None if s.subset is None else tuple(sorted(s.subset)), s.stable,
            tuple(w.letters for w in s.twist.images))


class _Universe:
    """Deterministic key-canonicalised vertex store with collision checks.

    A vertex may be reached through several presentations (for example a
    twisted loop splitting can equal an untwisted one over a different
    stable letter); every structurally distinct presentation is kept,
    because the partial adjacency certificates depend on the coordinates
    a presentation exposes.
    """

    def __init__(self, depth: int, cap: int):
        self.depth = depth
        self.cap = cap
        self.vertices: dict[tuple, list[GraphVertex]] = {}

    def key(self, v: GraphVertex) -> tuple:
        if isinstance(v, FreeSplitting):
            return ("tree", vertex_key(v, self.depth).lengths)
        if isinstance(v, MarkedMetricGraph):
            return _chart_key(v, self.depth)
        if isinstance(v, RationalCurrent):
            return _current_key(v)
        if isinstance(v, CyclicWord):
            return _class_key(v)
        raise TypeError(f"not a graph vertex: {v!r}")

    def add(self, v: GraphVertex) -> tuple:
        k = self.key(v)
        known = self.vertices.get(k)
        if known is None:
            if len(self.vertices) >= self.cap:
                raise StateCapExceeded(len(self.vertices))
            self.vertices[k] = [v]
        elif isinstance(v, FreeSplitting) and isinstance(known[0], FreeSplitting):
            if all(_splitting_data(v) != _splitting_data(u) for u in known):
                deep = self.depth + 2
                if vertex_key(v, deep) != vertex_key(known[0], deep):
                    raise KeyCollisionError(
                        f"splittings {_splitting_data(v)} and {_splitting_data(known[0])} "
                        f"collide at key depth {self.depth} but differ at depth {deep}"
                    )
                known.append(v)
        return k

    def splittings(self) -> list[FreeSplitting]:
        out = []
        for presentations in self.vertices.values():
            out.extend(p for p in presentations if isinstance(p, FreeSplitting))
        return out

    def each(self, cls) -> list:
        return [ps[0] for ps in self.vertices.values() if isinstance(ps[0], cls)]


def _move_closure(
    universe: _Universe, seeds: Sequence[GraphVertex], moves: Sequence[Automorphism], depth: int
) -> None:
    from . import currents as _currents

    def apply_move(phi: Automorphism, v: GraphVertex) -> GraphVertex:
        if isinstance(v, FreeSplitting):
            return act(phi, v)
        if isinstance(v, RationalCurrent):
            return _currents.act(phi, v)
        if isinstance(v, CyclicWord):
            root, _ = cyclic_reduce(phi.apply(v.as_word()))
            return root
        if isinstance(v, MarkedMetricGraph):
            from . import marked_graph as _mg

            return _mg.act(phi, v)
        raise TypeError

    frontier = list(seeds)
    for v in frontier:
        universe.add(v)
    for _ in range(depth):
        nxt = []
        for v in frontier:
            for phi in moves:
                for psi in (phi, phi.inverse()):
                    image = apply_move(psi, v)
                    is_new = universe.key(image) not in universe.vertices
                    universe.add(image)
                    if is_new:
                        nxt.append(image)
        frontier = nxt
        if not frontier:
            break


def _family(s: FreeSplitting, include_loops: bool) -> list[FreeSplitting]:
    """Every one-edge splitting sharing the twist of ``s``."""
    out: list[FreeSplitting] = []
    gens = range(1, s.rank + 1)
    for size in range(1, s.rank):
        for sub in combinations(gens, size):
            out.append(FreeSplitting(s.rank, "sep", frozenset(sub), None, s.twist))
    if include_loops:
        for t in gens:
            out.append(FreeSplitting(s.rank, "loop", None, t, s.twist))
    return out


def _elliptic_classes(s: FreeSplitting, search_length: int) -> list[CyclicWord]:
    return [
        cw
        for cw in enumerate_cyclic_words(s.rank, search_length, up_to_inversion=True)
        if splitting_length(s, cw.as_word()) == 0
    ]


def bfs_distance(
    flavor: Flavor,
    v1: GraphVertex,
    v2: GraphVertex,
    radius: int,
    move_generators: Sequence[Automorphism] = (),
    *,
    search_length: int = 6,
    key_depth: int = 4,
    state_cap: int = 5000,
) -> Optional[int]:
    """Distance between two vertices within an explicitly explored ball.

    The vertex universe is generated from the endpoints by the move
    generators (both directions, up to ``radius`` applications) and by
    the flavor's own adjacency moves (coordinate families, bounded
    common-elliptic searches, minted witness currents or classes).  The
    returned value is the exact distance in the explored subgraph, hence
    an upper bound for the full graph; None means the target was not
    reached within ``radius``.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    rank = v1.rank
    if rank < 3:
        raise ValueError("the splitting graphs are defined for rank >= 3")
    if v2.rank != rank:
        raise ValueError("rank mismatch")
    _check_vertex_type(flavor, v1)
    _check_vertex_type(flavor, v2)

    universe = _Universe(key_depth, state_cap)
    k1, k2 = universe.add(v1), universe.add(v2)
    _move_closure(universe, [v1, v2], list(move_generators), radius)
    if k1 == k2:
        return 0

    def neighbor_keys(key: tuple) -> list[tuple]:
        presentations = universe.vertices[key]
        v = presentations[0]
        found: set[tuple] = set()
        if flavor in ("F", "S", "Fstar") and isinstance(v, FreeSplitting):
            # a separating splitting equals its complement presentation;
            # fold any same-vertex family members into the view list first,
            # since the coordinate certificates depend on the presentation
            for p in [p for p in presentations if isinstance(p, FreeSplitting)]:
                for u in _family(p, include_loops=flavor == "S"):
                    if universe.key(u) == key:
                        universe.add(u)
            views = [p for p in universe.vertices[key] if isinstance(p, FreeSplitting)]
            candidates: list[FreeSplitting] = []
            for p in views:
                candidates += _family(p, include_loops=flavor == "S")
            candidates += universe.splittings()
            for u in candidates:
                uk = universe.key(u)
                if uk == key:
                    continue
                if uk in found:
                    universe.add(u)  # extra presentation of a known neighbour
                    continue
                if flavor == "Fstar":
                    ok = _common_elliptic(v, u, search_length) is not None
                elif flavor == "F":
                    ok = any(refinement_adjacent(p, u) == "yes" for p in views)
                else:
                    ok = any(cut_refinement_adjacent(p, u) == "yes" for p in views)
                if ok:
                    universe.add(u)
                    found.add(uk)
        elif flavor == "Z":
            if isinstance(v, FreeSplitting):
                for cw in _elliptic_classes(v, search_length):
                    found.add(universe.add(cw))
                for u in universe.each(CyclicWord):
                    if splitting_length(v, u.as_word()) == 0:
                        found.add(universe.key(u))
            elif isinstance(v, CyclicWord):
                for u in universe.each(FreeSplitting):
                    if splitting_length(u, v.as_word()) == 0:
                        found.add(universe.key(u))
        elif flavor == "I0":
            if isinstance(v, (FreeSplitting, MarkedMetricGraph)):
                if isinstance(v, FreeSplitting):
                    from .currents import counting_current

                    for cw in _elliptic_classes(v, search_length):
                        found.add(universe.add(counting_current(cw.as_word())))
                for u in universe.each(RationalCurrent):
                    if intersection_graph_adjacent(v, u):
                        found.add(universe.key(u))
            elif isinstance(v, RationalCurrent):
                for u in universe.each(FreeSplitting) + universe.each(MarkedMetricGraph):
                    if intersection_graph_adjacent(u, v):
                        found.add(universe.key(u))
        return sorted(found)

    dist = {k1: 0}
    queue = deque([k1])
    while queue:
        key = queue.popleft()
        if dist[key] >= radius:
            continue
        for nk in neighbor_keys(key):
            if nk not in dist:
                dist[nk] = dist[key] + 1
                if nk == k2:
                    return dist[nk]
                queue.append(nk)
    return dist.get(k2)


def _check_vertex_type(flavor: Flavor, v: GraphVertex) -> None:
    if flavor in ("F", "Fstar"):
        if not (isinstance(v, FreeSplitting) and v.kind == "sep"):
            raise ValueError(f"flavor {flavor} vertices are separating splittings")
    elif flavor == "S":
        if not isinstance(v, FreeSplitting):
            raise ValueError("flavor S vertices are splittings")
    elif flavor == "Z":
        if not isinstance(v, (FreeSplitting, CyclicWord)):
            raise ValueError("flavor Z vertices are splittings or conjugacy classes")
    else:
        if not isinstance(v, (FreeSplitting, MarkedMetricGraph, RationalCurrent)):
            raise ValueError("flavor I0 vertices are trees or currents")
