"""Finite-size corrections to the total loop density.

With the rescaled circumference ``s**2 = l**2 (m**2 + n**2) / 2`` the density
behaves as ``nu = nu_inf + K/s**2 + a/s**4 + b/s**6 + ...`` where
``nu_inf = (3*sqrt(3) - 5)/2`` and ``K = 5*sqrt(3)/24``.  The amplitudes
``a`` and ``b`` depend on the tilt angle, roughly as ``cos(4 alpha)`` and
``cos(8 alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np

from .phi import LatticeParams

__all__ = [
    "DensitySample",
    "FitResult",
    "AngleFit",
    "RankDeficientError",
    "nu_infinity",
    "conformal_amplitude",
    "scaled_deviation",
    "correction_series",
    "fit_corrections",
    "angle_coefficients",
    "default_window",
]


class RankDeficientError(ValueError):
    pass


def nu_infinity():
    """Bulk density ``(3 sqrt 3 - 5) / 2`` at the current mpmath precision."""
    return (3 * mpmath.sqrt(3) - 5) / 2


def conformal_amplitude():
    """Leading correction ``5 sqrt 3 / 24`` in units of ``1/s**2``."""
    return 5 * mpmath.sqrt(3) / 24


@dataclass(frozen=True)
class DensitySample:
    params: LatticeParams
    nu: object  # mpf or Fraction

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValueError(f"density {self.nu} outside (0, 1)")

    @property
    def s2(self) -> int:
        return self.params.scaled_length_sq


def _mp(x):
    if hasattr(x, "numerator") and not isinstance(x, mpmath.mpf):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def scaled_deviation(sample: DensitySample):
    """``(nu - nu_inf) * s**2``; tends to ``5 sqrt 3 / 24`` as ``l`` grows."""
    return (_mp(sample.nu) - nu_infinity()) * sample.s2


def correction_series(sample: DensitySample):
    """``s**4 (nu - nu_inf - K/s**2)``, the quantity fitted by ``a + b/s**2``."""
    s2 = sample.s2
    return s2 * s2 * (_mp(sample.nu) - nu_infinity() - conformal_amplitude() / s2)


@dataclass
class FitResult:
    alpha: float
    a: float
    b: float | None
    residual_norm: float
    l_range: tuple[int, int]
    m: int = 0
    n: int = 1
    order: int = 2
    n_samples: int = 0
    a_err: float | None = None
    b_err: float | None = None
    b_sequential: float | None = None
    points: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["l_range"] = list(self.l_range)
        return d


def fit_corrections(samples: list[DensitySample], order: int = 2) -> FitResult:
    """Least-squares fit of ``s**4 (nu - nu_inf - K/s**2)`` to ``a`` (+ ``b/s**2``).

    Needs at least ``order + 3`` samples with distinct ``l`` and a common
    ``(m, n)``.  Error bars come from the residual variance.
    ``b_sequential`` is ``s**6 (nu - nu_inf - K/s**2 - a/s**4)`` at the largest
    ``l``, the finite-size estimate of ``b`` given the fitted ``a``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if len({(s.params.m, s.params.n) for s in samples}) > 1:
        raise ValueError("all samples must share the same (m, n)")
    ls = [s.params.l for s in samples]
    if len(set(ls)) != len(ls):
        raise RankDeficientError("duplicate l values in sample set")
    if len(samples) < order + 3:
        raise RankDeficientError(f"need at least {order + 3} samples, got {len(samples)}")

    samples = sorted(samples, key=lambda s: s.params.l)
    inv_s2 = np.array([1.0 / s.s2 for s in samples])
    y = np.array([float(correction_series(s)) for s in samples])
    cols = [np.ones_like(inv_s2)] + ([inv_s2] if order == 2 else [])
    X = np.column_stack(cols)
    coef, _, rank, sv = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1] or sv[-1] <= 1e-14 * sv[0]:
        raise RankDeficientError("degenerate sample set for the correction fit")
    resid = y - X @ coef
    dof = len(y) - X.shape[1]
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    errs = np.sqrt(np.diag(cov))

    a = float(coef[0])
    b = float(coef[1]) if order == 2 else None
    last = samples[-1]
    s2 = last.s2
    b_seq = float(s2**3 * (_mp(last.nu) - nu_infinity() - conformal_amplitude() / s2
                           - mpmath.mpf(a) / s2**2))
    pr = samples[0].params
    return FitResult(
        alpha=pr.alpha,
        a=a,
        b=b,
        residual_norm=float(np.linalg.norm(resid)),
        l_range=(samples[0].params.l, last.params.l),
        m=pr.m,
        n=pr.n,
        order=order,
        n_samples=len(samples),
        a_err=float(errs[0]),
        b_err=float(errs[1]) if order == 2 else None,
        b_sequential=b_seq,
        points=[(s.params.l, float(s.s2), float(yy)) for s, yy in zip(samples, y)],
    )


@dataclass
class AngleFit:
    table: list  # rows (alpha, a, b)
    c1: float
    c2: float
    c3: float
    residual_a: float
    residual_b: float
    c3_with_shift: float | None = None
    c4_shift: float | None = None
    residual_b_with_shift: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _lstsq(cols, y):
    X = np.column_stack(cols)
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise RankDeficientError("degenerate angle set")
    return coef, float(np.linalg.norm(y - X @ coef))


def angle_coefficients(sweep: list[FitResult]) -> AngleFit:
    """Fit ``a(alpha) = c1 cos 4alpha + c2`` and ``b(alpha) = c3 cos 8alpha``.

    The ``b`` fit is also reported with a constant shift ``c3 cos 8alpha + c4``;
    the data do not decide between the two.
    """
    alphas = np.array([f.alpha for f in sweep])
    if len(set(np.round(alphas, 12))) < 4:
        raise RankDeficientError("need at least 4 distinct tilt angles")
    a = np.array([f.a for f in sweep])
    (c1, c2), res_a = _lstsq([np.cos(4 * alphas), np.ones_like(alphas)], a)
    table = [(float(al), f.a, f.b) for al, f in zip(alphas, sweep)]
    if any(f.b is None for f in sweep):
        return AngleFit(table, float(c1), float(c2), math.nan, res_a, math.nan)
    b = np.array([f.b for f in sweep])
    (c3,), res_b = _lstsq([np.cos(8 * alphas)], b)
    (c3s, c4), res_bs = _lstsq([np.cos(8 * alphas), np.ones_like(alphas)], b)
    return AngleFit(table, float(c1), float(c2), float(c3), res_a, res_b,
                    float(c3s), float(c4), res_bs)


def default_window(m: int, n: int, max_L: int = 200) -> tuple[int, int]:
    """Even ``l`` range covering the upper half of circumferences up to ``max_L``."""
    lmax = max_L // (m + n)
    lmax -= lmax % 2
    lmin = max(2, lmax // 2)
    lmin += lmin % 2
    return lmin, lmax
