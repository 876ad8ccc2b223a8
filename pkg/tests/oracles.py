"""Independent reference implementations used only to check the library.

These deliberately take different computational routes from the package:
repeated-scan reduction instead of a stack, divisor scans instead of
prefix functions, characteristic-polynomial bisection instead of power
iteration, and orbit-displacement growth instead of cyclic syllable
counts.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence


def scan_reduce(letters: Sequence[int]) -> list[int]:
    """Free reduction by repeated full passes until nothing cancels."""
    out = list(letters)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(out) - 1:
            if out[i] == -out[i + 1]:
                del out[i : i + 2]
                changed = True
            else:
                i += 1
    return out


def divisor_primitive_root(letters: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Smallest-period root of a cyclic letter sequence by trying every
    divisor of the length directly."""
    letters = tuple(letters)
    n = len(letters)
    for d in range(1, n + 1):
        if n % d:
            continue
        if all(letters[i] == letters[i % d] for i in range(n)):
            return letters[:d], n // d
    raise AssertionError("unreachable")


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Sign-change bisection; needs f(lo) < 0 < f(hi)."""
    flo, fhi = f(lo), f(hi)
    assert flo < 0 < fhi, (flo, fhi)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def char_poly(matrix: Sequence[Sequence[int]]) -> list[Fraction]:
    """Coefficients of det(xI - M), highest degree first, by the
    Faddeev-LeVerrier recursion in exact arithmetic."""
    n = len(matrix)
    M = [[Fraction(matrix[i][j]) for j in range(n)] for i in range(n)]

    def matmul(A, B):
        return [
            [sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)
        ]

    coeffs = [Fraction(1)]
    Ak = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        Ak[i][i] = Fraction(1)
    for k in range(1, n + 1):
        Ak = matmul(M, Ak)
        c = -sum(Ak[i][i] for i in range(n)) / k
        coeffs.append(c)
        for i in range(n):
            Ak[i][i] += c
    return coeffs


def dominant_root_by_bisection(matrix: Sequence[Sequence[int]], tol: float) -> float:
    """Largest real root of the characteristic polynomial: scan down from
    the Gershgorin bound to the first sign change, then bisect."""
    coeffs = char_poly(matrix)

    def p(x: float) -> float:
        acc = 0.0
        for c in coeffs:
            acc = acc * x + float(c)
        return acc

    hi = 1.0 + max(sum(abs(x) for x in row) for row in matrix)
    assert p(hi) > 0
    step = 1e-3
    x = hi
    while p(x) >= 0:
        x -= step
        assert x > -hi, "no sign change found"
    return bisect_root(p, x, x + step, tol)


# -- Bass-Serre displacement oracle ------------------------------------------
#
# The splitting trees are probed through the orbit of a base vertex: the
# displacement of the base under g comes from the coset normal form, and
# translation length is recovered from the linear growth of displacements
# of powers.  For words of length <= 6 the base point sits within distance
# 11/2 of any axis, so rounding d(g^30)/30 gives the exact integer.


def sep_displacement(subset: frozenset[int], letters: Sequence[int]) -> int:
    """Tree distance between the base vertex (the subset-side factor) and
    its translate: twice the number of complement-syllables once the
    trailing subset-run is stripped."""
    word = list(letters)
    while word and abs(word[-1]) in subset:
        word.pop()
    blocks = 0
    previous_inside = True
    for l in word:
        inside = abs(l) in subset
        if not inside and previous_inside:
            blocks += 1
        previous_inside = inside
    return 2 * blocks


def loop_displacement(stable: int, letters: Sequence[int]) -> int:
    return sum(1 for l in letters if abs(l) == stable)


def bass_serre_translation_length(
    kind: str, data, letters: Sequence[int], power: int = 30
) -> int:
    """Translation length via displacement growth: round(d(g^m)/m)."""
    piece = list(letters)
    word: list[int] = []
    for _ in range(power):
        word = scan_reduce(word + piece)
    if kind == "sep":
        d = sep_displacement(data, word)
    elif kind == "loop":
        d = loop_displacement(data, word)
    else:
        raise ValueError(kind)
    return round(d / power)
