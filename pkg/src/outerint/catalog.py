"""Curated expanding rose maps used as fixtures and CLI examples.

Expanding graph maps are inputs to this library, never computed; the
catalog ships a few classical ones with known stretch factors so that
experiments and tests have trustworthy data.
"""

from __future__ import annotations

from .dynamics import GraphMap
from .marked_graph import unit_rose
from .words import Automorphism


def fibonacci_automorphism() -> Automorphism:
    """Rank 2, a -> ab, b -> a; stretch factor the golden ratio."""
    return Automorphism.from_images(2, [[1, 2], [1]], [[2], [-2, 1]])


def fibonacci_rose_map() -> GraphMap:
    return GraphMap.on_rose(unit_rose(2), fibonacci_automorphism())


def fibonacci_inverse_rose_map() -> GraphMap:
    """The inverse substitution a -> b, b -> b^-1 a; same stretch factor."""
    return GraphMap.on_rose(unit_rose(2), fibonacci_automorphism().inverse())


def supergolden_automorphism() -> Automorphism:
    """Rank 3, a -> ab, b -> c, c -> a; stretch factor the real root of
    x^3 - x^2 - 1 (the supergolden ratio, ~1.4656)."""
    return Automorphism.from_images(
        3, [[1, 2], [3], [1]], [[3], [-3, 1], [2]]
    )


def supergolden_rose_map() -> GraphMap:
    return GraphMap.on_rose(unit_rose(3), supergolden_automorphism())


def catalog() -> dict[str, GraphMap]:
    return {
        "fibonacci": fibonacci_rose_map(),
        "fibonacci_inverse": fibonacci_inverse_rose_map(),
        "supergolden": supergolden_rose_map(),
    }
