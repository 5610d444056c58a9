"""Univariate exact polynomials and Sturm real-root isolation.

Polynomials are lists of Fractions, lowest degree first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Sequence

UPoly = list[Fraction]


def strip(p: Sequence) -> UPoly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p: Sequence) -> int:
    return len(strip(p)) - 1


def evaluate(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p: Sequence) -> UPoly:
    return strip([i * c for i, c in enumerate(p)][1:])


def mul(p: Sequence, q: Sequence) -> UPoly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return strip(out)


def add(p: Sequence, q: Sequence) -> UPoly:
    n = max(len(p), len(q))
    return strip([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def scale(c, p: Sequence) -> UPoly:
    return strip([c * a for a in p])


def divmod_poly(p: Sequence, q: Sequence) -> tuple[UPoly, UPoly]:
    p, q = strip(p), strip(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    lead = q[-1]
    while len(r) >= len(q) and r:
        k = len(r) - len(q)
        f = r[-1] / lead
        quo[k] = f
        for i, c in enumerate(q):
            r[i + k] -= f * c
        r = strip(r)
    return strip(quo), r


def monic(p: Sequence) -> UPoly:
    p = strip(p)
    return [c / p[-1] for c in p] if p else []


def gcd_poly(p: Sequence, q: Sequence) -> UPoly:
    a, b = strip(p), strip(q)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    return monic(a)


def primitive_integer(p: Sequence) -> list[int]:
    """Integer multiple with coprime coefficients and positive leading term."""
    p = strip(p)
    if not p:
        return []
    den = reduce(lcm, (c.denominator for c in p), 1)
    ints = [int(c * den) for c in p]
    g = reduce(gcd, (abs(i) for i in ints), 0)
    ints = [i // g for i in ints]
    if ints[-1] < 0:
        ints = [-i for i in ints]
    return ints


def squarefree(p: Sequence) -> UPoly:
    p = strip(p)
    g = gcd_poly(p, derivative(p))
    return monic(divmod_poly(p, g)[0]) if len(g) > 1 else monic(p)


def sturm_sequence(p: Sequence) -> list[UPoly]:
    seq = [strip(p), derivative(p)]
    while seq[-1]:
        r = divmod_poly(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _variations(seq: Sequence[UPoly], x: Fraction) -> int:
    signs = [v for v in (evaluate(s, x) for s in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def count_roots(p: Sequence, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots in the half-open interval (lo, hi]."""
    seq = sturm_sequence(squarefree(p))
    return _variations(seq, lo) - _variations(seq, hi)


def root_bound(p: Sequence) -> Fraction:
    p = strip(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


@dataclass(frozen=True)
class RealRoot:
    """Exact isolating interval [lo, hi] holding exactly one root of poly."""

    lo: Fraction
    hi: Fraction
    poly: tuple[Fraction, ...]

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.midpoint)

    def refine(self, width: Fraction) -> "RealRoot":
        lo, hi = self.lo, self.hi
        if lo == hi:
            return self
        slo = evaluate(self.poly, lo)
        while hi - lo > width:
            mid = (lo + hi) / 2
            v = evaluate(self.poly, mid)
            if v == 0:
                return RealRoot(mid, mid, self.poly)
            if (v > 0) == (slo > 0):
                lo, slo = mid, v
            else:
                hi = mid
        return RealRoot(lo, hi, self.poly)


def isolate_real_roots(p: Sequence, width: Fraction | None = None) -> list[RealRoot]:
    """All distinct real roots, ascending, each in an exact isolating interval.

    Intervals are bisected with Sturm counts until each holds one root, then
    (on the squarefree part, where signs change at the root) by sign.
    """
    p = strip(p)
    if len(p) <= 1:
        return []
    sf = squarefree(p)
    seq = sturm_sequence(sf)
    b = root_bound(sf)
    stack = [(-b, b, _variations(seq, -b) - _variations(seq, b))]
    found: list[RealRoot] = []
    key = tuple(sf)
    while stack:
        lo, hi, n = stack.pop()
        if n == 0:
            continue
        if n == 1 and evaluate(sf, hi) == 0:
            found.append(RealRoot(hi, hi, key))
            continue
        if n == 1 and evaluate(sf, lo) != 0:
            found.append(RealRoot(lo, hi, key))
            continue
        mid = (lo + hi) / 2
        vm = _variations(seq, mid)
        stack.append((lo, mid, _variations(seq, lo) - vm))
        stack.append((mid, hi, vm - _variations(seq, hi)))
    found.sort(key=lambda r: r.lo)
    if width is not None:
        found = [r.refine(width) for r in found]
    return found


def interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> UPoly:
    """Exact Newton interpolation through (xs, ys)."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out: UPoly = [coef[-1]]
    for i in range(n - 2, -1, -1):
        out = add(mul(out, [-xs[i], Fraction(1)]), [coef[i]])
    return strip(out)


def to_string(p: Sequence, var: str = "s") -> str:
    p = strip(p)
    if not p:
        return "0"
    parts = []
    for k in range(len(p) - 1, -1, -1):
        c = p[k]
        if c == 0:
            continue
        cs = str(c.numerator) if c.denominator == 1 else f"({c.numerator}/{c.denominator})"
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if mono and abs(c) == 1:
            parts.append(("-" if c < 0 else "") + mono)
        elif mono:
            parts.append(f"{cs}*{mono}")
        else:
            parts.append(cs)
    return " + ".join(parts).replace("+ -", "- ")
