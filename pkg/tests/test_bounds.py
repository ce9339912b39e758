import io
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varscale.bounds import (
    UnverifiedBoundWarning,
    bound_monotonicity,
    check_coincidence,
    error_bound,
    interpolation_check,
    modulus_bound_direct,
    modulus_bound_nested,
    modulus_brute_force,
    rate_curve,
    specialized_bound,
)
from varscale.exceptions import PreconditionError, SpectrumError
from varscale.indexfn import (
    CONCAVE_FAMILY,
    Const,
    Power,
    chi_from_Psi,
    eddington_Psi,
    log_capped,
    over_log_capped,
    theta_fn,
)
from varscale.operators import DiagonalOperator

E = math.e


class TestErrorBound:
    @pytest.mark.parametrize("kappa", [0.25, 0.5, 0.75])
    def test_power(self, kappa):
        eps, zeta = 0.03, 2.5
        np.testing.assert_allclose(error_bound(Power(kappa), eps, zeta), eps ** (1 - kappa) * zeta**kappa, rtol=1e-13)

    def test_identity(self):
        np.testing.assert_allclose(error_bound(Power(1.0), 0.3, 2.0), 2.0, rtol=1e-14)

    def test_half(self):
        np.testing.assert_allclose(error_bound(Power(0.5), 0.01, 1.0), 0.1, rtol=1e-14)

    def test_vectorised(self):
        out = error_bound(Power(0.5), np.array([0.01, 0.04]), 1.0)
        np.testing.assert_allclose(out, [0.1, 0.2], rtol=1e-14)

    def test_nonpositive_input(self):
        with pytest.raises(ValueError):
            error_bound(Power(0.5), 0.0, 1.0)
        with pytest.raises(ValueError):
            error_bound(Power(0.5), 0.1, -1.0)

    def test_non_concave_strict(self):
        with pytest.raises(PreconditionError):
            error_bound(Power(2.0), 0.1, 1.0)

    def test_non_concave_lenient(self):
        with pytest.warns(UnverifiedBoundWarning):
            val = error_bound(Power(2.0), 0.1, 1.0, strict=False)
        np.testing.assert_allclose(val, 0.1 * 100.0, rtol=1e-12)

    def test_no_warning_when_verified(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", UnverifiedBoundWarning)
            error_bound(Power(0.5), 0.1, 1.0, strict=False)

    @pytest.mark.parametrize("name", sorted(CONCAVE_FAMILY))
    def test_monotone(self, name):
        grid = np.geomspace(1e-4, 1e2, 40)
        assert bound_monotonicity(CONCAVE_FAMILY[name](), grid, grid) == (True, True)


class TestSpecialized:
    def test_power(self):
        np.testing.assert_allclose(specialized_bound("power", 0.04, 1.0, kappa=0.5), 0.2, rtol=1e-14)

    def test_over_log(self):
        np.testing.assert_allclose(specialized_bound("over_log", 1.0, E), E / math.sqrt(2), rtol=1e-14)

    def test_log(self):
        np.testing.assert_allclose(specialized_bound("log", 0.3, 0.3 * E), 0.3 * math.sqrt(2), rtol=1e-14)

    @pytest.mark.parametrize("kind", ["over_log", "log"])
    def test_ratio_below_one(self, kind):
        with pytest.raises(ValueError):
            specialized_bound(kind, 1.0, 1.0)
        with pytest.raises(ValueError):
            specialized_bound(kind, 1.0, 0.5)

    def test_errors(self):
        with pytest.raises(ValueError):
            specialized_bound("power", 1.0, 2.0)
        with pytest.raises(ValueError):
            specialized_bound("power", 1.0, 2.0, kappa=1.5)
        with pytest.raises(ValueError):
            specialized_bound("other", 1.0, 2.0)

    @given(
        eps=st.floats(1e-4, 1e2),
        ratio=st.floats(E + 1e-3, 1e6),
    )
    @settings(max_examples=60, deadline=None)
    def test_cross_check(self, eps, ratio):
        zeta = eps * ratio
        # lam = ratio**2 >= e**2, inside the uncapped branch of both caps
        np.testing.assert_allclose(
            specialized_bound("over_log", eps, zeta), error_bound(over_log_capped(), eps, zeta), rtol=1e-12
        )
        np.testing.assert_allclose(
            specialized_bound("log", eps, zeta), error_bound(log_capped(), eps, zeta), rtol=1e-12
        )
        np.testing.assert_allclose(
            specialized_bound("power", eps, zeta, kappa=0.3), error_bound(Power(0.3), eps, zeta), rtol=1e-12
        )


class TestModulus:
    def test_direct_half(self):
        np.testing.assert_allclose(modulus_bound_direct(Power(0.5), 1.0, 0.01), 0.1, rtol=1e-14)

    @pytest.mark.parametrize("kappa", [0.25, 0.5, 0.75])
    def test_direct_delta_equals_R(self, kappa):
        np.testing.assert_allclose(modulus_bound_direct(Power(kappa), 3.0, 3.0), 3.0, rtol=1e-14)

    def test_direct_eddington(self):
        np.testing.assert_allclose(modulus_bound_direct(eddington_Psi(), 1.0, 1 / E), 2 / E, rtol=1e-12)

    def test_nested_half(self):
        np.testing.assert_allclose(modulus_bound_nested(Power(0.5), 1.0, 0.01), 0.1, rtol=1e-8)

    @pytest.mark.parametrize("mu", [0.25, 0.5, 1.0, 2.0])
    def test_nested_monomial(self, mu):
        R, d = 2.0, 1e-3
        expected = R * (d / R) ** (2 * mu / (2 * mu + 1))
        np.testing.assert_allclose(modulus_bound_nested(Power(mu), R, d), expected, rtol=1e-8)

    def test_nested_at_theta_one(self):
        pb = Power(0.3)
        R = 4.0
        d = R * float(theta_fn(pb)(1.0))
        np.testing.assert_allclose(modulus_bound_nested(pb, R, d), R * pb(1.0), rtol=1e-8)


class TestCoincidence:
    def test_half(self):
        rep = check_coincidence(Power(0.5), 1.0, np.geomspace(1e-6, 1, 30))
        assert rep.max_dev <= 1e-8
        assert np.all(rep.rel_dev >= 0)

    def test_quarter(self):
        rep = check_coincidence(Power(0.25), 10.0, np.geomspace(1e-5, 10, 30))
        assert rep.max_dev <= 1e-8

    def test_eddington(self):
        rep = check_coincidence(eddington_Psi(), 1.0, np.geomspace(1e-6, 1, 30))
        assert rep.max_dev <= 1e-6

    @pytest.mark.parametrize("name", sorted(CONCAVE_FAMILY))
    def test_family(self, name):
        rep = check_coincidence(CONCAVE_FAMILY[name](), 1.0, np.geomspace(1e-6, 1, 20))
        assert rep.max_dev <= 1e-6

    def test_csv(self):
        rep = check_coincidence(Power(0.5), 1.0, [1e-2, 1e-3])
        buf = io.StringIO()
        rep.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "delta,bound_direct,bound_nested,rel_dev"
        assert len(lines) == 3
        np.testing.assert_allclose(rep.ratios, [1e-2, 1e-3])


class TestBruteForce:
    @given(R=st.floats(1e-3, 1e3), d=st.floats(1e-3, 1e3))
    @settings(max_examples=40, deadline=None)
    def test_single(self, R, d):
        A = DiagonalOperator([1.0])
        np.testing.assert_allclose(modulus_brute_force(A, Const(1.0), R, d), min(R, d), rtol=1e-12)

    def test_two_dominated(self):
        A = DiagonalOperator([1.0, 0.1])
        w = modulus_brute_force(A, Power(1.0), 1.0, 0.05)
        assert 0 < w <= modulus_bound_direct(Power(0.5), 1.0, 0.05) * (1 + 1e-8)

    def test_two_exact(self):
        # constraints y1 + 100 y2 <= 1, y1 + 0.01 y2 <= 0.0025: vertex in closed form
        A = DiagonalOperator([1.0, 0.1])
        y2 = (1 - 0.0025) / (100 - 0.01)
        y1 = 0.0025 - 0.01 * y2
        np.testing.assert_allclose(modulus_brute_force(A, Power(1.0), 1.0, 0.05), math.sqrt(y1 + y2), rtol=1e-12)

    def test_scaling(self, rng):
        A = DiagonalOperator(np.sort(rng.uniform(0.01, 1, 5))[::-1])
        chi = chi_from_Psi(Power(0.5))
        w1 = modulus_brute_force(A, chi, 1.0, 0.01)
        w2 = modulus_brute_force(A, chi, 2.0, 0.02)
        np.testing.assert_allclose(w2, 2 * w1, rtol=1e-10)

    @pytest.mark.parametrize("name", sorted(CONCAVE_FAMILY))
    def test_domination(self, rng, name):
        Psi = CONCAVE_FAMILY[name]()
        chi = chi_from_Psi(Psi)
        for n in (2, 4, 8):
            A = DiagonalOperator(np.sort(rng.uniform(1e-3, 1, n))[::-1])
            for R, d in [(1.0, 1e-2), (10.0, 1e-4), (1.0, 0.5)]:
                w = modulus_brute_force(A, chi, R, d)
                assert w <= modulus_bound_direct(Psi, R, d) * (1 + 1e-8)

    def test_errors(self):
        with pytest.raises(SpectrumError):
            modulus_brute_force(DiagonalOperator.power_decay(9), Power(1.0), 1.0, 0.1)
        with pytest.raises(SpectrumError):
            modulus_brute_force(DiagonalOperator([1.0, 1.0]), Power(1.0), 1.0, 0.1)


class TestRateCurve:
    def test_power(self):
        d = np.geomspace(1e-6, 1e-1, 12)
        rc = rate_curve(Power(0.4), 1.0, d)
        np.testing.assert_allclose(rc.bounds, d**0.6, rtol=1e-13)
        assert rc.monotone and rc.decays

    def test_identity_constant(self):
        rc = rate_curve(Power(1.0), 4.0, np.geomspace(1e-6, 1e-1, 12))
        np.testing.assert_allclose(rc.bounds, 2.0, rtol=1e-14)
        assert not rc.decays

    def test_eddington(self):
        eta = 0.7
        d = np.geomspace(1e-8, 0.5, 15)
        rc = rate_curve(eddington_Psi(), eta**2, d)
        np.testing.assert_allclose(rc.bounds, d * (1 + np.log(eta / d)), rtol=1e-12)
        assert rc.monotone and rc.decays

    def test_iter_and_csv(self):
        rc = rate_curve(Power(0.5), 1.0, [1e-2, 1e-4])
        assert len(rc) == 2
        assert list(rc)[0][0] == 1e-2
        buf = io.StringIO()
        rc.write_csv(buf)
        assert buf.getvalue().splitlines()[0] == "delta,bound"

    def test_strict(self):
        with pytest.raises(PreconditionError):
            rate_curve(Power(2.0), 1.0, [0.1])


class TestInterpolation:
    @pytest.mark.parametrize("name", sorted(CONCAVE_FAMILY))
    def test_random(self, rng, name):
        Psi = CONCAVE_FAMILY[name]()
        chi = chi_from_Psi(Psi)
        n = 32
        A = DiagonalOperator(np.geomspace(1.0, 1e-3, n))
        F = rng.standard_normal((300, n)) * rng.uniform(0, 1, (300, n)) ** 4
        rep = interpolation_check(A, Psi, chi, F)
        assert rep.violations == 0
        assert rep.n_samples == 300

    @given(st.lists(st.floats(-10, 10), min_size=4, max_size=4), st.floats(0.1, 0.9))
    @settings(max_examples=60, deadline=None)
    def test_power_hypothesis(self, f, kappa):
        f = np.asarray(f)
        if not np.any(f):
            return
        A = DiagonalOperator([1.0, 0.5, 0.2, 0.05])
        Psi = Power(kappa)
        rep = interpolation_check(A, Psi, chi_from_Psi(Psi), f[None, :])
        assert rep.violations == 0

    def test_violation_detected(self):
        # Psi(lam) = lam**0.1 with the chi of lam**0.5 breaks the inequality
        A = DiagonalOperator(np.geomspace(1.0, 1e-3, 8))
        F = np.eye(8)
        rep = interpolation_check(A, Power(0.1), chi_from_Psi(Power(0.5)), F)
        assert rep.violations > 0 and rep.max_ratio > 1

    def test_shape(self):
        with pytest.raises(ValueError):
            interpolation_check(DiagonalOperator([1.0, 0.5]), Power(0.5), Power(1.0), np.ones((2, 3)))
