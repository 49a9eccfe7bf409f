import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkfrac.special import (
    MLParams,
    NonConvergenceError,
    beta,
    gamma,
    gauss_gamma_product,
    log_beta,
    mittag_leffler,
)

SQRT_PI = 1.7724538509055160273


class TestGamma:
    def test_known_values(self):
        assert gamma(1.0) == pytest.approx(1.0, rel=1e-12)
        assert gamma(5.0) == pytest.approx(24.0, rel=1e-12)
        assert gamma(0.5) == pytest.approx(SQRT_PI, rel=1e-12)

    def test_against_high_precision(self):
        # frozen mpmath (dps=40) values across the working range
        reference = {
            1e-3: 999.42377248459546611,
            0.1: 9.5135076986687318363,
            0.85: 1.1124837369484652462,
            2.5: 1.3293403881791370205,
            17.5: 85634974475162.063871,
            170.0: 4.2690680090047052749e304,
        }
        for x, expected in reference.items():
            assert gamma(x) == pytest.approx(expected, rel=1e-12)

    def test_recurrence_on_grid(self):
        for x in np.linspace(0.1, 50.0, 97):
            lhs = gamma(x + 1.0)
            assert abs(lhs - x * gamma(x)) <= 1e-12 * lhs

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            gamma(bad)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            gamma(200.0)


class TestBeta:
    def test_known_values(self):
        assert beta(1.0, 1.0) == pytest.approx(1.0, rel=1e-12)
        assert beta(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-12)
        assert beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-12)

    @given(
        x=st.floats(min_value=0.01, max_value=60.0),
        y=st.floats(min_value=0.01, max_value=60.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_symmetry_and_gamma_ratio(self, x, y):
        assert beta(x, y) == beta(y, x)  # identical code path
        ratio = gamma(x) * gamma(y) / gamma(x + y)
        assert beta(x, y) == pytest.approx(ratio, rel=1e-12)

    def test_large_arguments_stay_finite(self):
        # direct gamma ratio would overflow; the log-space path must not
        assert math.isfinite(log_beta(0.5, 500.0))
        assert beta(0.5, 500.0) > 0

    @pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
    def test_domain_errors(self, args):
        with pytest.raises(ValueError):
            beta(*args)


class TestGaussGammaProduct:
    def test_telescoping_x1(self):
        # m^1 * m! / (1*2*...*(m+1)) = m/(m+1)
        assert gauss_gamma_product(1.0, 10) == pytest.approx(10.0 / 11.0, rel=1e-12)
        assert gauss_gamma_product(1.0, 10**6) == pytest.approx(1.0, abs=1e-5)

    def test_approaches_gamma_half(self):
        assert abs(gauss_gamma_product(0.5, 10**5) - gamma(0.5)) <= 1e-4 * SQRT_PI

    def test_monotone_approach(self):
        for x in (0.3, 0.5, 0.8):
            errs = [abs(gauss_gamma_product(x, m) - gamma(x)) for m in (100, 1000, 10**4, 10**5)]
            assert all(errs[i + 1] < errs[i] for i in range(len(errs) - 1))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gauss_gamma_product(-1.0, 10)
        with pytest.raises(ValueError):
            gauss_gamma_product(1.0, 0)


class TestMittagLeffler:
    def test_reduces_to_exp(self):
        p = MLParams(ml_alpha=1.0, ml_beta=1.0, tol=1e-15, max_terms=200)
        worst = max(abs(mittag_leffler(p, z) - math.exp(z)) for z in (-2, -1, 0, 1, 2))
        assert worst <= 1e-10

    def test_z_zero_is_reciprocal_gamma(self):
        for a, b in ((0.7, 0.85), (1.3, 2.0), (0.5, 0.5)):
            p = MLParams(ml_alpha=a, ml_beta=b)
            value, terms = mittag_leffler(p, 0.0, with_terms=True)
            assert value == pytest.approx(1.0 / gamma(b), rel=1e-14)
            assert terms == 1

    def test_against_high_precision_series(self):
        # frozen: 200-term summation at mpmath dps=50
        p = MLParams(ml_alpha=0.7, ml_beta=0.85, tol=1e-15, max_terms=400)
        assert mittag_leffler(p, -1.0) == pytest.approx(0.31052727998252383, rel=1e-12)

    def test_reports_terms(self):
        p = MLParams(ml_alpha=1.0, ml_beta=1.0, tol=1e-10, max_terms=100)
        value, terms = mittag_leffler(p, 1.0, with_terms=True)
        assert value == pytest.approx(math.e, rel=1e-9)
        assert 5 < terms < 100

    def test_non_convergence(self):
        p = MLParams(ml_alpha=0.5, ml_beta=1.0, tol=1e-14, max_terms=5)
        with pytest.raises(NonConvergenceError):
            mittag_leffler(p, 30.0)

    def test_desk_scale_cap(self):
        p = MLParams(ml_alpha=1.0, ml_beta=1.0)
        with pytest.raises(ValueError):
            mittag_leffler(p, 51.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(ml_alpha=0.0, ml_beta=1.0),
            dict(ml_alpha=1.0, ml_beta=-1.0),
            dict(ml_alpha=1.0, ml_beta=1.0, tol=0.0),
            dict(ml_alpha=1.0, ml_beta=1.0, max_terms=0),
        ],
    )
    def test_param_validation(self, kwargs):
        with pytest.raises(ValueError):
            MLParams(**kwargs)
