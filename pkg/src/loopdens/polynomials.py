"""Dense univariate polynomials over CycNum or mpmath complex coefficients."""

from __future__ import annotations

from typing import Sequence

__all__ = ["Polynomial", "poly_eval", "poly_derivative", "poly_arg_scale"]


def _is_zero(c) -> bool:
    return c == 0


class Polynomial:
    """Immutable polynomial; ``coeffs[k]`` multiplies ``u**k``.

    Trailing zeros are trimmed; the zero polynomial has an empty coefficient
    tuple.  Coefficients only need ``+``, ``-``, ``*`` and comparison with 0,
    so the same class serves the exact and the multiprecision pipelines.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):
        cs = list(coeffs)
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def leading(self):
        return self.coeffs[-1] if self.coeffs else 0

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    def __call__(self, x):
        return poly_eval(self, x)

    def __add__(self, other: Polynomial) -> Polynomial:
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self[k] + other[k] for k in range(n)])

    def __neg__(self) -> Polynomial:
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    def __rmul__(self, scalar):
        return Polynomial([scalar * c for c in self.coeffs])

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def map(self, fn) -> Polynomial:
        """Apply ``fn`` to each coefficient (e.g. an embedding into C)."""
        return Polynomial([fn(c) for c in self.coeffs])

    def derivative(self) -> Polynomial:
        return poly_derivative(self)

    def arg_scale(self, c) -> Polynomial:
        return poly_arg_scale(self, c)


def poly_eval(p: Polynomial, x):
    """Horner evaluation; returns integer 0 for the zero polynomial."""
    acc = 0
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def poly_derivative(p: Polynomial) -> Polynomial:
    return Polynomial([k * p.coeffs[k] for k in range(1, len(p.coeffs))])


def poly_arg_scale(p: Polynomial, c) -> Polynomial:
    """Return the polynomial ``u -> p(c*u)``."""
    out = []
    ck = 1
    for coeff in p.coeffs:
        out.append(coeff * ck)
        ck = ck * c
    return Polynomial(out)
