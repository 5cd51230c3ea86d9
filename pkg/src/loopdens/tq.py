"""Q- and P-polynomials at the stochastic point.

At q = exp(i*pi/3) the T-Q and T-P equations close after three shifts of the
argument by q**2 and force T(u) = Phi(-u).  Matching coefficients then gives
two square inhomogeneous linear systems for the non-leading coefficients of
the monic degree-p polynomials Q and P.
"""

from __future__ import annotations

import json
from contextlib import nullcontext
from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .cyclotomic import ONE, Q, CycNum, cyc_to_complex
from .numeric import PrecisionPolicy, SingularMatrixError, escalate, solve_linear_float
from .phi import LatticeParams, phi_coefficients
from .polynomials import Polynomial

__all__ = [
    "QPPair",
    "VerificationError",
    "build_linear_system",
    "solve_exact",
    "solve_qp",
    "verify_wronskian",
    "verify_t",
]

Q_SHIFT = 1
P_SHIFT = 2


class VerificationError(ArithmeticError):
    """A solved pair violates the Wronskian or T identity."""


@dataclass(frozen=True)
class QPPair:
    Q: Polynomial
    P: Polynomial
    params: LatticeParams
    digits: int | None = None  # None for exact Q(q) coefficients

    @property
    def exact(self) -> bool:
        return self.digits is None

    @property
    def backend(self) -> str:
        return "exact" if self.exact else f"float({self.digits})"

    def q(self):
        """The deformation parameter in this pair's coefficient field."""
        return Q if self.exact else cyc_to_complex(Q, self.digits)

    def context(self):
        """mpmath precision context matching the pair (no-op when exact)."""
        return nullcontext() if self.exact else mpmath.workdps(self.digits)

    def to_json(self) -> str:
        if self.exact:
            enc = str
        else:
            def enc(z):
                return [mpmath.nstr(z.real, self.digits, min_fixed=1, max_fixed=0),
                        mpmath.nstr(z.imag, self.digits, min_fixed=1, max_fixed=0)]
        doc = {
            "m": self.params.m,
            "n": self.params.n,
            "l": self.params.l,
            "backend": "exact" if self.exact else "float",
            "digits": self.digits,
            "Q": [enc(c) for c in self.Q.coeffs],
            "P": [enc(c) for c in self.P.coeffs],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> QPPair:
        doc = json.loads(text)
        params = LatticeParams(doc["m"], doc["n"], doc["l"])
        digits = doc["digits"]
        if doc["backend"] == "exact":
            dec = CycNum.parse
        else:
            def dec(pair):
                with mpmath.workdps(digits):
                    return mpmath.mpc(mpmath.mpf(pair[0]), mpmath.mpf(pair[1]))
        return cls(
            Polynomial([dec(c) for c in doc["Q"]]),
            Polynomial([dec(c) for c in doc["P"]]),
            params,
            None if doc["backend"] == "exact" else digits,
        )


@lru_cache(maxsize=64)
def _phi(params: LatticeParams) -> Polynomial:
    return phi_coefficients(params)


def build_linear_system(params: LatticeParams, shift: int, phi: Polynomial | None = None):
    """Coefficient system for Q (``shift=1``) or P (``shift=2``).

    Row ``k`` is ``sum_r (-1)^r phi_r x_{3k+shift-r} = 0`` for ``k < p``; the
    known ``x_p = 1`` term moves to the right-hand side.  Returns
    ``(matrix, rhs)`` with CycNum entries.
    """
    if shift not in (Q_SHIFT, P_SHIFT):
        raise ValueError("shift must be 1 (Q) or 2 (P)")
    p = params.p
    phi = _phi(params) if phi is None else phi
    zero = CycNum()
    matrix = [[zero] * p for _ in range(p)]
    rhs = [zero] * p
    for k in range(p):
        t = 3 * k + shift
        for r in range(max(0, t - p), min(2 * p, t) + 1):
            c = phi[r] if r % 2 == 0 else -phi[r]
            j = t - r
            if j == p:
                rhs[k] = rhs[k] - c
            else:
                matrix[k][j] = matrix[k][j] + c
    return matrix, rhs


def _solve_exact_system(matrix, rhs) -> list[CycNum]:
    n = len(matrix)
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv, best = None, 0
        for r in range(col, n):
            nr = a[r][col].norm()
            if nr > best:
                piv, best = r, nr
        if piv is None:
            raise SingularMatrixError(f"singular coefficient system (column {col})")
        a[col], a[piv] = a[piv], a[col]
        prow = a[col]
        inv = prow[col].inverse()
        for r in range(col + 1, n):
            row = a[r]
            f = row[col]
            if not f:
                continue
            f = f * inv
            for c in range(col + 1, n + 1):
                if prow[c]:
                    row[c] = row[c] - f * prow[c]
            row[col] = CycNum()
    x = [CycNum()] * n
    for r in range(n - 1, -1, -1):
        row = a[r]
        s = row[n]
        for c in range(r + 1, n):
            if row[c]:
                s = s - row[c] * x[c]
        x[r] = s / row[r]
    return x


def _embed_system(matrix, rhs, digits):
    emb = {}

    def e(x):
        key = (x.a, x.b)
        if key not in emb:
            emb[key] = cyc_to_complex(x, digits)
        return emb[key]

    return [[e(x) for x in row] for row in matrix], [e(x) for x in rhs]


def solve_exact(params: LatticeParams) -> QPPair:
    polys = []
    for shift in (Q_SHIFT, P_SHIFT):
        matrix, rhs = build_linear_system(params, shift)
        polys.append(Polynomial(_solve_exact_system(matrix, rhs) + [ONE]))
    return QPPair(polys[0], polys[1], params)


def _solve_float(params: LatticeParams, digits: int) -> QPPair:
    polys = []
    for shift in (Q_SHIFT, P_SHIFT):
        matrix, rhs = _embed_system(*build_linear_system(params, shift), digits)
        x = solve_linear_float(matrix, rhs, digits)
        polys.append(Polynomial(x + [mpmath.mpc(1)]))
    return QPPair(polys[0], polys[1], params, digits)


def solve_qp(params: LatticeParams, digits: int | None = None,
             policy: PrecisionPolicy | None = None) -> QPPair:
    """Solve both coefficient systems and verify the result.

    With ``digits=None`` and no policy the solve is exact over Q(q).
    Otherwise it runs in multiprecision, escalating precision until both
    identities hold to ``policy.target`` digits.  Raises VerificationError
    (exact) or PrecisionExhaustedError (float) if they never hold.
    """
    if digits is None and policy is None:
        pair = solve_exact(params)
        if not (verify_wronskian(pair) and verify_t(pair)):
            raise VerificationError(f"identity check failed for {params}")
        return pair

    policy = policy or PrecisionPolicy.for_size(params.p, digits)

    def attempt(d):
        try:
            pair = _solve_float(params, d)
        except SingularMatrixError:
            return False, None
        tol = policy.target
        return verify_wronskian(pair, tol) and verify_t(pair, tol), pair

    pair, _ = escalate(attempt, policy)
    return pair


# -- identities -------------------------------------------------------------

def _sample_points(count: int, digits: int):
    # off-axis points on |u| = 1, avoiding the special values 1 and 1/q
    with mpmath.workdps(digits):
        return [mpmath.expjpi(mpmath.mpf(2 * j + 1) / (count + 0.5) + mpmath.mpf(1) / 7)
                for j in range(count)]


def _check(lhs_fn, rhs_fn, pair: QPPair, tol_digits: int | None) -> bool:
    if pair.exact:
        return lhs_fn() == rhs_fn()
    digits = pair.digits
    tol_digits = digits // 2 if tol_digits is None else tol_digits
    lhs, rhs = lhs_fn(), rhs_fn()
    tol = mpmath.mpf(10) ** (-tol_digits)
    for u in _sample_points(2 * pair.params.p + 1, digits):
        a = lhs(u)
        b1, b2 = rhs(u)
        scale = max(abs(a), abs(b1), abs(b2))
        if abs(a - (b1 - b2)) > tol * scale:
            return False
    return True


def _phi_for(pair: QPPair) -> Polynomial:
    phi = _phi(pair.params)
    if pair.exact:
        return phi
    return phi.map(lambda c: cyc_to_complex(c, pair.digits))


def verify_wronskian(pair: QPPair, tol_digits: int | None = None) -> bool:
    """Check ``(q - 1/q) Phi(u) = q Q(qu) P(u/q) - (1/q) Q(u/q) P(qu)``."""
    with pair.context():
        return _verify_wronskian(pair, tol_digits)


def _verify_wronskian(pair, tol_digits):
    q = pair.q()
    qi = 1 / q
    phi = _phi_for(pair)
    Qa, Qb = pair.Q.arg_scale(q), pair.Q.arg_scale(qi)
    Pa, Pb = pair.P.arg_scale(qi), pair.P.arg_scale(q)
    if pair.exact:
        return _check(lambda: phi * (q - qi),
                      lambda: Qa * Pa * q - Qb * Pb * qi, pair, tol_digits)
    return _check(lambda: (lambda u: phi(u) * (q - qi)),
                  lambda: (lambda u: (q * Qa(u) * Pa(u), qi * Qb(u) * Pb(u))),
                  pair, tol_digits)


def verify_t(pair: QPPair, tol_digits: int | None = None) -> bool:
    """Check ``(q - 1/q) Phi(-u) = q^2 Q(q^2 u) P(u/q^2) - q^-2 Q(u/q^2) P(q^2 u)``."""
    with pair.context():
        return _verify_t(pair, tol_digits)


def _verify_t(pair, tol_digits):
    q = pair.q()
    qi = 1 / q
    q2, qi2 = q * q, qi * qi
    phi_neg = _phi_for(pair).arg_scale(-1)
    Qa, Qb = pair.Q.arg_scale(q2), pair.Q.arg_scale(qi2)
    Pa, Pb = pair.P.arg_scale(qi2), pair.P.arg_scale(q2)
    if pair.exact:
        return _check(lambda: phi_neg * (q - qi),
                      lambda: Qa * Pa * q2 - Qb * Pb * qi2, pair, tol_digits)
    return _check(lambda: (lambda u: phi_neg(u) * (q - qi)),
                  lambda: (lambda u: (q2 * Qa(u) * Pa(u), qi2 * Qb(u) * Pb(u))),
                  pair, tol_digits)
