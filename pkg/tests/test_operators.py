import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varscale.exceptions import ConfigError, SpectrumError
from varscale.indexfn import CONCAVE_FAMILY, Const, Power, SobolevPoly, chi_from_Psi
from varscale.operators import (
    DiagonalOperator,
    FourierGrid,
    FourierMultiplier,
    GOperator,
    bessel_j1,
    bessel_j1_zero,
    chi_is_unbounded,
    eddington_L,
    hilbert_norm,
    hs_range_test,
    identity_G,
    make_kernel,
    partial_blur_symbol,
    range_inclusion_check,
    read_grid_function,
    sobolev_G,
    write_grid_function,
)

GRID = FourierGrid(1024, 20.0)


def _operators():
    return [
        DiagonalOperator.power_decay(50),
        DiagonalOperator.exponential_decay(20, 0.5),
        make_kernel("eddington", N=512, L=50.0),
        make_kernel("gaussian_broadening", N=512, L=50.0),
        make_kernel("partial_blur", N=512, L=20.0),
        make_kernel("out_of_focus", N=512, L=50.0, D=1.0),
    ]


class TestDiagonal:
    def test_apply(self):
        A = DiagonalOperator([2.0, 1.0])
        np.testing.assert_array_equal(A.apply(np.array([1.0, 1.0])), [2.0, 1.0])
        np.testing.assert_array_equal(A.apply_adjoint(np.array([1.0, 1.0])), [2.0, 1.0])

    def test_tikhonov_filter(self, rng):
        A = DiagonalOperator.power_decay(30)
        g = rng.standard_normal(30)
        alpha = 1e-3
        f = A.apply_fn(lambda t: 1.0 / (t + alpha), A.apply_adjoint(g))
        s = A.sigma
        np.testing.assert_allclose(f, s * g / (s**2 + alpha), rtol=1e-14)

    def test_invalid(self):
        with pytest.raises(SpectrumError):
            DiagonalOperator([1.0, 0.0])
        with pytest.raises(ValueError):
            DiagonalOperator([1.0, 2.0])
        with pytest.raises(ValueError):
            DiagonalOperator([1.0, 0.5]).apply(np.ones(3))

    def test_decay_constructors(self):
        np.testing.assert_allclose(DiagonalOperator.power_decay(4).sigma, [1, 1 / 2, 1 / 3, 1 / 4])
        np.testing.assert_allclose(DiagonalOperator.exponential_decay(3).sigma, np.exp(-np.arange(1, 4)))


class TestFourier:
    def test_unit_multiplier_identity(self, rng):
        A = FourierMultiplier(GRID, np.ones(GRID.N))
        x = rng.standard_normal(GRID.N)
        np.testing.assert_allclose(A.apply(x), x, atol=1e-12)

    def test_apply_fn_one_identity(self, rng):
        for A in _operators():
            x = rng.standard_normal(A.size)
            np.testing.assert_allclose(A.apply_fn(1.0, x), x, atol=1e-12)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            FourierGrid(1000, 1.0)
        with pytest.raises(ValueError):
            FourierGrid(1024, -1.0)

    def test_eddington_dc(self):
        assert make_kernel("eddington", N=256, L=10.0).multiplier[0] == 1.0

    def test_eddington_theta(self):
        # theta(lam) = 1/(1 + lam/2) at lam = omega**2 = 2
        from varscale.operators import eddington_symbol

        assert eddington_symbol(math.sqrt(2.0)) == pytest.approx(0.5)

    def test_gaussian(self):
        A = make_kernel("gaussian_broadening", N=4096, L=200.0)
        assert A.multiplier[0] == 1.0
        w = A.grid.omega
        assert np.all(A.multiplier[np.abs(w) >= 8.6] < 1e-8)

    def test_out_of_focus_first_zero(self):
        A = make_kernel("out_of_focus", N=4096, L=200.0)
        assert A.has_zeros
        w = A.grid.omega
        pos = np.argsort(w)
        m, ws = A.multiplier[pos], w[pos]
        keep = ws > 0
        m, ws = m[keep], ws[keep]
        i = int(np.argmax(np.sign(m[:-1]) != np.sign(m[1:])))
        assert ws[i] <= 3.8317 <= ws[i + 1]
        assert A.multiplier[0] == 1.0

    def test_partial_blur_dc_clamped(self):
        A = make_kernel("partial_blur", N=256, L=20.0)
        assert A.multiplier[0] == pytest.approx((2 * math.pi / 20.0) ** -1.5)
        assert A.multiplier[0] == pytest.approx(A.multiplier[1])

    def test_kernel_config_errors(self):
        with pytest.raises(ConfigError):
            make_kernel("nope", N=256, L=1.0)
        with pytest.raises(ConfigError):
            make_kernel({"kernel": "eddington", "N": 256})
        with pytest.raises(ConfigError):
            make_kernel({"kernel": "eddington", "N": 100, "L": 1.0})
        with pytest.raises(ConfigError):
            make_kernel("out_of_focus", N=256, L=1.0, D=-1.0)

    def test_json_mapping(self):
        A = make_kernel({"kernel": "eddington", "N": 4096, "L": 200.0})
        assert A.size == 4096 and A.grid.L == 200.0


class TestInvariants:
    @pytest.mark.parametrize("k", range(6))
    def test_adjoint(self, rng, k):
        A = _operators()[k]
        x = rng.standard_normal(A.size)
        y = rng.standard_normal(A.size)
        lhs = A.inner(A.apply(x), y)
        rhs = A.inner(x, A.apply_adjoint(y))
        assert abs(lhs - rhs) <= 1e-10 * A.norm(x) * A.norm(y)

    @pytest.mark.parametrize("k", range(6))
    def test_homomorphism(self, rng, k):
        A = _operators()[k]
        x = rng.standard_normal(A.size)
        h1 = lambda t: 1.0 / (t + 0.1)  # noqa: E731
        h2 = lambda t: np.sqrt(t) + 1.0  # noqa: E731
        lhs = A.apply_fn(lambda t: h1(t) * h2(t), x)
        rhs = A.apply_fn(h1, A.apply_fn(h2, x))
        np.testing.assert_allclose(lhs, rhs, atol=1e-10 * np.max(np.abs(lhs)))

    @pytest.mark.parametrize("k", range(6))
    def test_sqrt_identity(self, rng, k):
        A = _operators()[k]
        x = rng.standard_normal(A.size)
        np.testing.assert_allclose(A.norm(A.apply(x)), A.norm(A.apply_fn(Power(0.5), x)), rtol=1e-10)

    def test_parseval(self, rng):
        x = rng.standard_normal(GRID.N)
        direct = math.sqrt(GRID.dx * np.sum(x**2))
        np.testing.assert_allclose(hilbert_norm(x, 1.0, GRID), direct, rtol=1e-10)
        np.testing.assert_allclose(hilbert_norm(x, Const(1.0), GRID), direct, rtol=1e-10)


class TestHilbertNorm:
    def _mode(self, j):
        w0 = 2 * math.pi * j / GRID.L
        return w0, math.sqrt(2.0 / GRID.L) * np.cos(w0 * GRID.x)

    def test_unit_mode(self):
        _, x = self._mode(3)
        np.testing.assert_allclose(hilbert_norm(x, 1.0, GRID), 1.0, rtol=1e-12)

    def test_sobolev1(self):
        w0, x = self._mode(3)
        np.testing.assert_allclose(hilbert_norm(x, SobolevPoly(1), GRID) ** 2, 1 + w0**2, rtol=1e-12)

    def test_sobolev2(self):
        w0, x = self._mode(5)
        np.testing.assert_allclose(hilbert_norm(x, SobolevPoly(2), GRID) ** 2, 1 + w0**2 + w0**4, rtol=1e-12)

    def test_exp_weight_no_overflow(self):
        g = np.fft.ifft(np.exp(-0.5 * GRID.omega**2) * np.fft.fft(np.ones(GRID.N))).real
        from varscale.indexfn import Exp

        assert math.isfinite(hilbert_norm(g, Exp(), GRID, cap=1e-300))


class TestRangeInclusion:
    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_partial_blur_boundary(self, l):
        G = sobolev_G(GRID, l)
        edge = 2 * l / 3
        assert range_inclusion_check(partial_blur_symbol, G, Power(0.99 * edge)).bounded
        above = range_inclusion_check(partial_blur_symbol, G, Power(1.01 * edge))
        assert not above.bounded and above.witness is not None

    def test_partial_blur_edge_bounded(self):
        res = range_inclusion_check(partial_blur_symbol, sobolev_G(GRID, 1), Power(2.0 / 3.0))
        assert res.bounded and res.bound == pytest.approx(1.0, rel=0.05)

    @pytest.mark.parametrize("name", sorted(CONCAVE_FAMILY))
    def test_out_of_focus(self, name):
        A = make_kernel("out_of_focus", N=1024, L=100.0)
        chi = chi_from_Psi(CONCAVE_FAMILY[name]())
        assert chi_is_unbounded(chi)
        res = range_inclusion_check(A, None, chi)
        assert not res.bounded
        assert res.witness == pytest.approx(bessel_j1_zero(1), rel=1e-9)

    def test_constant_chi_bounded(self):
        A = make_kernel("out_of_focus", N=1024, L=100.0)
        G = GOperator(np.full(GRID.N, 0.5), GRID, squared_symbol=lambda w: np.full_like(np.asarray(w, float), 0.25))
        res = range_inclusion_check(A, G, Const(1.0))
        assert res.bounded and res.bound <= 1.0

    def test_identity_G(self):
        A = DiagonalOperator.power_decay(5)
        G = identity_G(A)
        np.testing.assert_array_equal(G.spectrum, np.ones(5))
        assert G.compatible(A)


class TestHilbertSchmidt:
    def test_gaussian_oracle(self):
        res = hs_range_test(lambda w, s: np.exp(-(w**2)) * np.exp(-(s**2)), SobolevPoly(1))
        assert res.finite and res.heuristic
        np.testing.assert_allclose(res.value, (math.pi / 2) * (5 / 4), rtol=1e-6)

    def test_divergent(self):
        res = hs_range_test(lambda w, s: np.exp(-(s**2)) / np.sqrt(1 + w**2), Power(1.0))
        assert not res.finite

    def test_hs_norm_finite(self):
        res = hs_range_test(lambda w, s: np.exp(-(s**2)) / np.sqrt(1 + w**2), 1.0)
        assert res.finite

    def test_nonfinite_samples(self):
        with pytest.raises(ValueError):
            hs_range_test(lambda w, s: np.full(np.broadcast(w, s).shape, np.inf), 1.0)


class TestBessel:
    def test_values(self):
        assert bessel_j1(0.0) == 0.0
        np.testing.assert_allclose(bessel_j1(1.0), 0.44005058574493355, rtol=1e-12)
        np.testing.assert_allclose(bessel_j1(-1.0), -0.44005058574493355, rtol=1e-12)

    def test_first_zero(self):
        np.testing.assert_allclose(bessel_j1_zero(1), 3.8317059702075125, rtol=1e-14)

    def test_against_scipy(self):
        special = pytest.importorskip("scipy.special")
        z = np.concatenate([np.linspace(-40, 40, 4001), np.geomspace(12, 1e4, 500)])
        np.testing.assert_allclose(bessel_j1(z), special.j1(z), atol=1e-10)

    @given(st.floats(min_value=0.1, max_value=100.0))
    @settings(max_examples=50)
    def test_recurrence_bound(self, z):
        assert abs(bessel_j1(z)) <= 0.5820 + 1e-12


class TestGridIO:
    def test_real_round_trip(self, tmp_path, rng):
        x = rng.standard_normal(64)
        write_grid_function(tmp_path / "x.csv", x)
        np.testing.assert_array_equal(read_grid_function(tmp_path / "x.csv"), x)

    def test_complex_round_trip(self, tmp_path, rng):
        x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        write_grid_function(tmp_path / "z.csv", x)
        np.testing.assert_array_equal(read_grid_function(tmp_path / "z.csv"), x)


class TestEddingtonL:
    def test_inverse_of_forward(self, rng):
        grid = FourierGrid(512, 50.0)
        A = make_kernel("eddington", N=512, L=50.0)
        x = rng.standard_normal(512)
        np.testing.assert_allclose(eddington_L(grid).apply(A.apply(x)), x, atol=1e-12)
