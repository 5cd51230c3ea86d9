"""Brute-force check of the densities from the inhomogeneous six-vertex transfer matrix.

Nothing here uses Q, P or T.  The leading eigenvalue of
``V(1/q)^n V(1)^m`` is found by power iteration in the half-filled sector,
the free energy is assembled from it, and the loop densities follow from
central differences in the crossing parameter ``theta`` (``q = e^{i theta}``)
and the twist ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import mpmath

from .phi import LatticeParams

__all__ = [
    "OracleConfig",
    "NonConvergenceError",
    "vertex_weights",
    "transfer_apply",
    "leading_eigenvalue",
    "free_energy",
    "oracle_densities",
    "sector_states",
]

MAX_L = 14
DEFAULT_DIGITS = 60


class NonConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    """Oracle run settings; ``theta``/``phi`` of None mean the stochastic value pi/3."""

    params: LatticeParams
    theta: object = None
    phi: object = None
    fd_step: float = 1e-4
    eig_tol: float = 1e-40
    max_iter: int = 20000
    digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        if self.params.L > MAX_L:
            raise ValueError(f"oracle limited to L <= {MAX_L}, got L = {self.params.L}")
        if not 1e-6 <= self.fd_step <= 1e-2:
            raise ValueError("fd_step must lie in [1e-6, 1e-2]")
        if self.eig_tol <= 0 or self.max_iter < 1:
            raise ValueError("eig_tol and max_iter must be positive")

    def angles(self):
        """``(theta, phi)`` as mpf at the current working precision."""
        third = mpmath.pi / 3
        theta = third if self.theta is None else mpmath.mpf(self.theta)
        phi = third if self.phi is None else mpmath.mpf(self.phi)
        return theta, phi


def vertex_weights(u, theta, phi, L: int):
    """Six-vertex weights ``(a1, a2, b1, b2, c1, c2)`` at spectral parameter ``u``.

    ``a``/``b`` weights carry the twist phase ``e^{+-i phi/L}``; square roots
    use the principal branch.
    """
    q = mpmath.expj(theta)
    sq = mpmath.expj(theta / 2)  # principal q^{1/2}, |theta| < pi
    su = mpmath.sqrt(mpmath.mpc(u))
    den = 1 / sq - sq
    ph = mpmath.expj(phi / L)
    a = (su - 1 / su) / den
    b = (1 / (q * su) - q * su) / den
    c = sq + 1 / sq
    return a * ph, a / ph, b * ph, b / ph, c, c


def _site_args(params: LatticeParams, u, theta):
    """Spectral argument at each of the L sites (groups of m at u/q then n at u)."""
    q = mpmath.expj(theta)
    block = [u / q] * params.m + [u] * params.n
    return block * params.l


def transfer_apply(params: LatticeParams, u, theta, phi, state: dict) -> dict:
    """Apply ``V(u)`` to a state given as ``{config_bits: amplitude}``.

    Bit ``j`` of a configuration is 1 when site ``j`` carries an up arrow.
    The auxiliary space is carried along the row (last site first) together
    with its initial value, and the trace closes it at the end, so the cost is
    O(L * support) rather than a dense 2^L x 2^L product.
    """
    L = params.L
    sites = [vertex_weights(x, theta, phi, L) for x in _site_args(params, u, theta)]
    # work[(a0, a, config)] with a0 the initial auxiliary state
    work = {}
    for cfg, amp in state.items():
        for a0 in (0, 1):
            work[(a0, a0, cfg)] = work.get((a0, a0, cfg), 0) + amp
    for j in range(L - 1, -1, -1):
        a1, a2, b1, b2, c1, c2 = sites[j]
        bit = 1 << j
        nxt = {}
        for (a0, a, cfg), amp in work.items():
            s = 1 if cfg & bit else 0
            if a == s:
                w = a1 if a == 1 else a2
                k = (a0, a, cfg)
                nxt[k] = nxt.get(k, 0) + w * amp
            else:
                # diagonal b-type: auxiliary up/site down -> b1, auxiliary down/site up -> b2
                w = b1 if a == 1 else b2
                k = (a0, a, cfg)
                nxt[k] = nxt.get(k, 0) + w * amp
                # exchange c-type: arrows swap between auxiliary and site
                w = c1 if a == 0 else c2
                k = (a0, s, cfg ^ bit)
                nxt[k] = nxt.get(k, 0) + w * amp
        work = nxt
    out = {}
    for (a0, a, cfg), amp in work.items():
        if a0 == a:
            out[cfg] = out.get(cfg, 0) + amp
    return out


def sector_states(L: int, ups: int) -> list[int]:
    return [sum(1 << i for i in c) for c in combinations(range(L), ups)]


def _dot(x: dict, y: dict):
    return mpmath.fsum(mpmath.conj(v) * y.get(k, 0) for k, v in x.items())


def _normalize(x: dict) -> dict:
    nrm = mpmath.sqrt(mpmath.fsum(abs(v) ** 2 for v in x.values()))
    return {k: v / nrm for k, v in x.items()}


def leading_eigenvalue(config: OracleConfig):
    """Return ``(Lambda(1/q), Lambda(1))`` for the leading eigenvector.

    Power iteration on ``V(1/q)^n V(1)^m`` in the sector with ``L/2`` up
    arrows; the individual eigenvalues come from Rayleigh quotients of each
    factor on the converged vector.
    """
    params = config.params
    with mpmath.workdps(config.digits):
        theta, phi = config.angles()
        q = mpmath.expj(theta)
        L = params.L

        def product(v):
            for _ in range(params.m):
                v = transfer_apply(params, mpmath.mpf(1), theta, phi, v)
            for _ in range(params.n):
                v = transfer_apply(params, 1 / q, theta, phi, v)
            return v

        states = sector_states(L, L // 2)
        # deterministic, generic start vector
        v = _normalize({s: mpmath.mpc(1 + mpmath.mpf(i) / (7 * len(states)), mpmath.mpf(i % 3) / 11)
                        for i, s in enumerate(states)})
        tol = mpmath.mpf(config.eig_tol)
        prev = None
        for _ in range(config.max_iter):
            w = product(v)
            rq = _dot(v, w)
            v = _normalize(w)
            if prev is not None and abs(rq - prev) < tol * abs(rq):
                break
            prev = rq
        else:
            raise NonConvergenceError(
                f"power iteration did not converge in {config.max_iter} steps"
            )
        lam_qinv = _dot(v, transfer_apply(params, 1 / q, theta, phi, v))
        lam_one = _dot(v, transfer_apply(params, mpmath.mpf(1), theta, phi, v))
        return lam_qinv, lam_one


def free_energy(config: OracleConfig, eigs=None):
    """Per-normal-vertex free energy at ``(theta, phi)`` (complex off the real axis)."""
    p = config.params
    lam_qinv, lam_one = eigs if eigs is not None else leading_eigenvalue(config)
    with mpmath.workdps(config.digits):
        s = p.m**2 + p.n**2
        c = 2 * mpmath.cos(config.angles()[0] / 2)
        return ((p.n * mpmath.log(lam_qinv) + p.m * mpmath.log(lam_one)) / (s * p.l)
                - 2 * p.n * p.m * mpmath.log(c) / s)


def _log_ratio(config: OracleConfig, base, **shift):
    """``f(shifted) - f(config)`` using logs of eigenvalue ratios (branch safe)."""
    p = config.params
    lam_qinv, lam_one = leading_eigenvalue(replace(config, **shift))
    s = p.m**2 + p.n**2
    c0 = 2 * mpmath.cos(config.angles()[0] / 2)
    c1 = 2 * mpmath.cos(mpmath.mpf(shift["theta"]) / 2) if "theta" in shift else c0
    return ((p.n * mpmath.log(lam_qinv / base[0]) + p.m * mpmath.log(lam_one / base[1])) / (s * p.l)
            - 2 * p.n * p.m * mpmath.log(c1 / c0) / s)


def _derivative(config: OracleConfig, base, name: str, h):
    x0 = dict(zip(("theta", "phi"), config.angles()))[name]

    def central(step):
        fp = _log_ratio(config, base, **{name: x0 + step})
        fm = _log_ratio(config, base, **{name: x0 - step})
        return (fp - fm) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    return (4 * d2 - d1) / 3, d1, d2


def oracle_densities(config: OracleConfig):
    """Finite-difference loop densities ``(nu_c, nu_nc)``.

    ``nu_c = w df/dw`` with ``w = 2 cos theta`` and ``nu_nc = v df/dv`` with
    ``v = 2 cos phi``; each derivative is a central difference refined by one
    step-halving Richardson extrapolation.  Returned values are real parts.
    """
    with mpmath.workdps(config.digits):
        base = leading_eigenvalue(config)
        h = mpmath.mpf(config.fd_step)
        theta, phi = config.angles()
        dth, _, _ = _derivative(config, base, "theta", h)
        dph, _, _ = _derivative(config, base, "phi", h)
        w = 2 * mpmath.cos(theta)
        v = 2 * mpmath.cos(phi)
        nu_c = w * dth / (-2 * mpmath.sin(theta))
        nu_nc = v * dph / (-2 * mpmath.sin(phi))
        return mpmath.re(nu_c), mpmath.re(nu_nc)
