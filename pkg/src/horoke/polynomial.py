"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .rational import fmt

Exponent = tuple[int, ...]


class Poly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: coefficient}."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, Fraction] | None = None):
        self.nvars = nvars
        clean: dict[Exponent, Fraction] = {}
        for e, c in (terms or {}).items():
            if len(e) != nvars:
                raise ValueError("exponent length does not match nvars")
            c = Fraction(c)
            if c != 0:
                clean[e] = clean.get(e, Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c != 0}

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def linear(cls, coeffs: Sequence, const=0) -> "Poly":
        """<coeffs, x> + const."""
        n = len(coeffs)
        terms = {(0,) * n: Fraction(const)}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = Fraction(c)
        return cls(n, terms)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("nvars mismatch")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, Fraction(0)) + c
        return Poly(self.nvars, t)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = self._coerce(other)
        t: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, Fraction(0)) + c1 * c2
        return Poly(self.nvars, t)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power")
        out = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.const(self.nvars, other)
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nvars, tuple(sorted(self.terms.items()))))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __call__(self, point: Sequence):
        total = 0
        for e, c in self.terms.items():
            m = c
            for x, k in zip(point, e):
                if k:
                    m = m * x**k
            total = total + m
        return total

    def eval_float(self, point: Sequence[float]) -> float:
        return float(sum(float(c) * _prod(x**k for x, k in zip(point, e) if k) for e, c in self.terms.items()))

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Compose: variable i is replaced by images[i] (all in the same ring)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0].nvars if images else 0
        powers: list[dict[int, Poly]] = [{0: Poly.const(target, 1)} for _ in images]
        out = Poly(target)
        for e, c in self.terms.items():
            m = Poly.const(target, c)
            for i, k in enumerate(e):
                if k:
                    cache = powers[i]
                    if k not in cache:
                        cache[k] = images[i] ** k
                    m = m * cache[k]
            out = out + m
        return out

    def affine_pullback(self, matrix: Sequence[Sequence], offset: Sequence) -> "Poly":
        """f(M y + b) as a polynomial in y."""
        m = len(matrix[0]) if matrix else 0
        images = [Poly.linear(row, b) for row, b in zip(matrix, offset)]
        if not images:
            return Poly.const(m, self.terms.get((), 0))
        return self.substitute(images)

    def derivative(self, i: int) -> "Poly":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                t[tuple(ne)] = c * e[i]
        return Poly(self.nvars, t)

    def scale(self, c) -> "Poly":
        return self * Fraction(c)

    def univariate_coeffs(self) -> list[Fraction]:
        """Coefficients low to high for a polynomial in one variable."""
        if self.nvars != 1:
            raise ValueError("not univariate")
        d = self.degree
        out = [Fraction(0)] * (d + 1)
        for (k,), c in self.terms.items():
            out[k] = c
        return out

    def canonical_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-k for k in t[0])))

    def __repr__(self) -> str:
        return f"Poly({self.to_string()})"

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e, c in self.canonical_terms():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if not mono:
                parts.append(fmt(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{fmt(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _prod(xs: Iterable[float]) -> float:
    out = 1.0
    for x in xs:
        out *= x
    return out


def product(polys: Iterable[Poly], nvars: int) -> Poly:
    out = Poly.const(nvars, 1)
    for p in polys:
        out = out * p
    return out
