"""Lattice parameters and the polynomial Phi(u) = (u-1)^(ml) (u-1/q)^(nl)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import comb

from .cyclotomic import ONE, Q, CycNum
from .polynomials import Polynomial

__all__ = ["LatticeParams", "InvalidParams", "phi_coefficients", "phi_product_form"]

Q_INV = ONE - Q  # 1/q


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True, order=True)
class LatticeParams:
    """Tilt integers ``(m, n)`` and the even circumference multiplier ``l``.

    The cylinder has circumference ``L = l*(m+n)`` and the leading eigenvalue
    lives in the sector with ``p = L/2`` up arrows.
    """

    m: int
    n: int
    l: int

    def __post_init__(self):
        m, n, l = self.m, self.n, self.l
        for name, v in (("m", m), ("n", n), ("l", l)):
            if not isinstance(v, int) or isinstance(v, bool):
                raise InvalidParams(f"{name} must be an integer")
        if m < 0 or n < 0:
            raise InvalidParams("m and n must be non-negative")
        if m == 0 and n == 0:
            raise InvalidParams("(m,n) must not be (0,0)")
        if math.gcd(m, n) != 1:
            raise InvalidParams(f"m and n must be co-prime, got ({m},{n})")
        if l <= 0 or l % 2:
            raise InvalidParams(f"l must be a positive even integer, got {l}")
        if m > n:
            warnings.warn(
                f"m > n ({m} > {n}); results are expected to equal those of ({n},{m})",
                stacklevel=3,
            )

    @property
    def p(self) -> int:
        return self.l * (self.m + self.n) // 2

    @property
    def L(self) -> int:
        return self.l * (self.m + self.n)

    @property
    def alpha(self) -> float:
        """Tilt angle arctan(m/n)."""
        return math.atan2(self.m, self.n)

    @property
    def scaled_length_sq(self) -> int:
        """``l**2 (m**2 + n**2) / 2``; always an integer since ``l`` is even."""
        return self.l * self.l * (self.m * self.m + self.n * self.n) // 2


def phi_coefficients(params: LatticeParams) -> Polynomial:
    """Coefficients of Phi from the closed binomial sum.

    ``phi_k = (-q)^(k-nl) * sum_s C(nl, k-s) C(ml, s) q^(-s)`` with ``s``
    running over ``max(0, k-nl) .. min(k, ml)``.
    """
    ml, nl = params.m * params.l, params.n * params.l
    # powers of 1/q repeat with period 6
    qinv_pows = [Q_INV**s for s in range(6)]
    coeffs = []
    for k in range(ml + nl + 1):
        acc = CycNum()
        for s in range(max(0, k - nl), min(k, ml) + 1):
            acc = acc + comb(nl, k - s) * comb(ml, s) * qinv_pows[s % 6]
        coeffs.append((-Q) ** (k - nl) * acc)
    return Polynomial(coeffs)


def phi_product_form(params: LatticeParams) -> Polynomial:
    """Phi by repeated multiplication of the linear factors."""
    ml, nl = params.m * params.l, params.n * params.l
    return Polynomial([-ONE, ONE]) ** ml * Polynomial([-Q_INV, ONE]) ** nl
