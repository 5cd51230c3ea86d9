import math
import warnings
from fractions import Fraction

import mpmath
import pytest

from loopdens.asymptotics import (
    DensitySample, FitResult, RankDeficientError, angle_coefficients, conformal_amplitude,
    correction_series, default_window, fit_corrections, nu_infinity, scaled_deviation,
)
from loopdens.phi import LatticeParams


def _synthetic(m, n, ls, a, b, digits=60):
    with mpmath.workdps(digits):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        out = []
        for l in ls:
            pr = LatticeParams(m, n, l)
            s2 = mpmath.mpf(pr.scaled_length_sq)
            nu = nu_infinity() + conformal_amplitude() / s2 + a / s2**2 + b / s2**3
            out.append(DensitySample(pr, nu))
        return out


def test_constants():
    with mpmath.workdps(30):
        assert abs(nu_infinity() - mpmath.mpf("0.0980762113533159402911695122588")) < 1e-28
        assert abs(conformal_amplitude() - mpmath.mpf("0.360843918243516")) < 1e-14


def test_scaled_deviation_small():
    s = DensitySample(LatticeParams(1, 1, 2), Fraction(1, 5))
    assert s.s2 == 4
    with mpmath.workdps(30):
        assert abs(scaled_deviation(s) - mpmath.mpf("0.4076951545867362388")) < 1e-15


def test_sample_range_check():
    with pytest.raises(ValueError):
        DensitySample(LatticeParams(1, 1, 2), Fraction(3, 2))


def test_synthetic_fit_recovers_amplitudes():
    samples = _synthetic(1, 1, range(20, 42, 2), "0.18", "0.5")
    with mpmath.workdps(60):
        fit = fit_corrections(samples)
    assert isinstance(fit, FitResult)
    assert fit.a == pytest.approx(0.18, abs=1e-10)
    assert fit.b == pytest.approx(0.5, abs=1e-10)
    assert fit.l_range == (20, 40) and fit.n_samples == 11
    assert fit.alpha == pytest.approx(math.pi / 4)
    assert fit.b_sequential == pytest.approx(0.5, abs=1e-8)
    assert fit.residual_norm < 1e-10


def test_order_one_fit():
    samples = _synthetic(0, 1, range(10, 30, 2), "-0.2", 0)
    with mpmath.workdps(60):
        fit = fit_corrections(samples, order=1)
    assert fit.a == pytest.approx(-0.2, abs=1e-10) and fit.b is None


def test_correction_series_value():
    (s,) = _synthetic(1, 2, [10], "0.1", 0)
    with mpmath.workdps(60):
        assert abs(correction_series(s) - mpmath.mpf("0.1")) < 1e-40


def test_bulk_limit_approached():
    # the deviation shrinks like 1/s^2 for synthetic data
    samples = _synthetic(1, 1, [10, 100, 1000], 0.18, 0.5)
    devs = [float(abs(s.nu - nu_infinity())) for s in samples]
    assert devs[0] > devs[1] > devs[2] and devs[2] < 1e-6


def test_rank_errors():
    with pytest.raises(RankDeficientError):
        fit_corrections(_synthetic(1, 1, [2, 4, 6, 8], 0.1, 0.1))
    with pytest.raises(RankDeficientError):
        fit_corrections(_synthetic(1, 1, [2, 4, 6, 8, 8], 0.1, 0.1))
    with pytest.raises(ValueError):
        fit_corrections(_synthetic(1, 1, [2, 4, 6], 0.1, 0.1) + _synthetic(1, 2, [2, 4], 0.1, 0.1))
    with pytest.raises(ValueError):
        fit_corrections(_synthetic(1, 1, range(2, 20, 2), 0.1, 0.1), order=3)


def _fake_fit(alpha, a, b):
    return FitResult(alpha=alpha, a=a, b=b, residual_norm=0.0, l_range=(2, 4))


def test_angle_fit_synthetic():
    alphas = [0, math.atan(1 / 3), math.atan(1 / 2), math.atan(2 / 3), math.pi / 4]
    sweep = [_fake_fit(al, math.cos(4 * al), 0.5 * math.cos(8 * al)) for al in alphas]
    res = angle_coefficients(sweep)
    assert res.c1 == pytest.approx(1, abs=1e-12)
    assert res.c2 == pytest.approx(0, abs=1e-12)
    assert res.c3 == pytest.approx(0.5, abs=1e-12)
    assert res.c4_shift == pytest.approx(0, abs=1e-12)
    assert len(res.table) == 5


def test_angle_fit_needs_four_angles():
    with pytest.raises(RankDeficientError):
        angle_coefficients([_fake_fit(0, 1, 1), _fake_fit(0.3, 1, 1), _fake_fit(0.3, 1, 1)])


def test_default_window():
    assert default_window(1, 1) == (50, 100)
    assert default_window(0, 1) == (100, 200)
    assert default_window(2, 3) == (20, 40)
    lo, hi = default_window(1, 2)
    assert hi * 3 <= 200 and lo % 2 == 0 and hi % 2 == 0
