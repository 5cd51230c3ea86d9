"""Contractible / non-contractible loop densities from a solved Q, P pair.

All constants at the stochastic point are written in Q(q): ``i*sqrt(3) =
2q - 1``, ``1/q = 1 - q``, ``1/q + 1 = 2 - q``.  The same formulas run on
CycNum (exact, rational result) or on mpmath complex numbers (float mode).

Sign and normalisation conventions, fixed against the exact tables and the
transfer-matrix oracle:

* ``A(u)`` is the explicit-argument part of ``dT/dq`` (so that
  ``dT/dq = 3 A(u) + d Phi(-u)/dq``); it enters ``nu_c`` with a minus sign.
* ``nu_nc`` is built directly from the symmetric bracket
  ``q^2 Q(q^2 u) P(u/q^2) + q^-2 Q(u/q^2) P(q^2 u)``, which is real-rational
  after the prefactors are applied; no ``i`` or ``sqrt(3)`` is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .cyclotomic import NonRealError, cyc_as_rational
from .phi import LatticeParams
from .tq import QPPair, solve_qp

__all__ = [
    "DensityResult",
    "compute_A",
    "compute_C",
    "density_contractible",
    "density_noncontractible",
    "density_total",
    "densities_from_pair",
    "lambda_from_T",
]


@dataclass(frozen=True)
class DensityResult:
    params: LatticeParams
    nu_c: object  # Fraction (exact) or mpf
    nu_nc: object
    nu_total: object
    digits: int | None = None

    @property
    def exact(self) -> bool:
        return self.digits is None

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    @property
    def nu(self):
        return self.nu_total


def compute_A(pair: QPPair, u0):
    """Explicit-q-derivative kernel entering ``nu_c``.

    ``A(u) = u/(q - 1/q) * ( q^2 [q Q'(q^2u) P(u/q^2) - q^-3 Q(q^2u) P'(u/q^2)]
                           - q^-2 [q Q(u/q^2) P'(q^2u) - q^-3 Q'(u/q^2) P(q^2u)] )``
    """
    with pair.context():
        q = pair.q()
        qi = 1 / q
        q2, qi2 = q * q, qi * qi
        Qp, Pp = pair.Q.derivative(), pair.P.derivative()
        Q, P = pair.Q, pair.P
        up, dn = q2 * u0, qi2 * u0
        first = q * Qp(up) * P(dn) - qi**3 * Q(up) * Pp(dn)
        second = q * Q(dn) * Pp(up) - qi**3 * Qp(dn) * P(up)
        return u0 / (q - qi) * (q2 * first - qi2 * second)


def compute_C(pair: QPPair, u0):
    """Bracket ``q^2 Q(q^2 u) P(u/q^2) + q^-2 Q(u/q^2) P(q^2 u)`` at ``u0``.

    The twist-derivative kernel is ``2i * bracket / (q - 1/q)``; the density
    formula consumes the bracket directly so the result stays in Q(q).
    """
    with pair.context():
        q = pair.q()
        qi = 1 / q
        q2, qi2 = q * q, qi * qi
        return q2 * pair.Q(q2 * u0) * pair.P(qi2 * u0) + qi2 * pair.Q(qi2 * u0) * pair.P(q2 * u0)


def _realify(value, pair: QPPair, what: str):
    if pair.exact:
        try:
            return cyc_as_rational(value)
        except NonRealError as exc:
            raise NonRealError(f"{what} for {pair.params} is not rational: {value}") from exc
    with pair.context():
        tol = mpmath.mpf(10) ** (-(pair.digits // 2))
        if abs(mpmath.im(value)) > tol * max(1, abs(value)):
            raise NonRealError(f"{what} for {pair.params} has imaginary part {mpmath.im(value)}")
        return mpmath.re(value)


def _nu_c(pair: QPPair):
    pr = pair.params
    m, n, l = pr.m, pr.n, pr.l
    with pair.context():
        q = pair.q()
        qi = 1 / q
        i_sqrt3 = 2 * q - 1
        term = 0
        if m:
            term = term + m * compute_A(pair, 1) / (2 ** (l * m) * (q + 1) ** (l * n))
        if n:
            term = term + n * q ** (l * m) * compute_A(pair, qi) / (2 ** (l * n) * (q + 1) ** (l * m))
        half_sq = Fraction((m + n) ** 2, 2) if pair.exact else mpmath.mpf((m + n) ** 2) / 2
        value = (half_sq - i_sqrt3 * q ** (l * n + 1) * term / l) / (m * m + n * n)
        return _realify(value, pair, "nu_c")


def _nu_nc(pair: QPPair):
    pr = pair.params
    m, n, l = pr.m, pr.n, pr.l
    with pair.context():
        q = pair.q()
        qi = 1 / q
        term = 0
        if m:
            term = term + m * compute_C(pair, 1) / (2 ** (l * m) * (qi + 1) ** (l * n))
        if n:
            term = term + n * compute_C(pair, qi) / ((qi + 1) ** (l * m) * (2 * qi) ** (l * n))
        value = -term / (l * (m * m + n * n))
        return _realify(value, pair, "nu_nc")


def densities_from_pair(pair: QPPair) -> DensityResult:
    nu_c = _nu_c(pair)
    nu_nc = _nu_nc(pair)
    if pair.exact:
        total = nu_c + nu_nc
    else:
        with pair.context():
            total = nu_c + nu_nc
    return DensityResult(pair.params, nu_c, nu_nc, total, pair.digits)


def density_contractible(params: LatticeParams, digits: int | None = None):
    return _nu_c(solve_qp(params, digits))


def density_noncontractible(params: LatticeParams, digits: int | None = None):
    return _nu_nc(solve_qp(params, digits))


def density_total(params: LatticeParams, digits: int | None = None) -> DensityResult:
    """Solve for Q and P and return all three densities.

    ``digits=None`` gives exact rationals; otherwise the multiprecision path
    with the default escalation policy starting at ``digits``.
    """
    return densities_from_pair(solve_qp(params, digits))


def lambda_from_T(params: LatticeParams, u0, T_value, digits: int = 50):
    """Transfer-matrix eigenvalue ``Lambda(u0)`` from the polynomial ``T(u0)``.

    ``Lambda = T u^{-p} q^{p + nl/2} (-1)^p (1-q)^{-L}``.  The integer power
    ``u^{-p}`` is what makes ``Lambda u^{L/2}`` polynomial; a half-integer
    power ``u^{-p/2}`` disagrees with the transfer-matrix eigenvalue by the
    phase ``u^{p/2}`` away from ``u = 1``.
    """
    p, L = params.p, params.L
    nl = params.n * params.l
    with mpmath.workdps(digits):
        q = mpmath.expjpi(mpmath.mpf(1) / 3)
        u0 = mpmath.mpc(u0)
        t = T_value.to_complex(digits) if hasattr(T_value, "to_complex") else mpmath.mpc(T_value)
        return (t * u0 ** (-p) * q ** (p + nl // 2)
                * (-1) ** p / (1 - q) ** L)
