import math

import numpy as np
import pytest

from rabi_metrology import (
    GaussianPacket,
    MomentumGrid,
    NonConvergence,
    build_measurement_grid,
    gaussian_expectation,
    gaussian_expectation_hermite,
)
from rabi_metrology.cfi import survival_weight
from rabi_metrology.quadrature import (
    adaptive_gauss,
    gaussian_expectation_complex,
    gaussian_expectation_with_error,
    hermite_weight_grid,
)


class TestGaussianExpectation:
    def test_constant_integrates_to_one(self, paper_params, paper_packet):
        value = gaussian_expectation(lambda p: 1.0, paper_packet, paper_params, tol=1e-12)
        assert abs(value - 1.0) < 1e-10

    def test_odd_integrand_vanishes(self, paper_params, paper_packet):
        value = gaussian_expectation(lambda p: p, paper_packet, paper_params, tol=1e-12)
        assert abs(value) < 1e-40  # scale: packet momenta are ~1e-30

    def test_second_moment(self, paper_params, paper_packet):
        value = gaussian_expectation(lambda p: p * p, paper_packet, paper_params, tol=1e-12)
        expected = paper_params.hbar**2 / (2.0 * paper_params.sigma**2)
        assert value == pytest.approx(expected, rel=1e-10)

    def test_rejects_nonpositive_tol(self, paper_params, paper_packet):
        with pytest.raises(ValueError):
            gaussian_expectation(lambda p: 1.0, paper_packet, paper_params, tol=0.0)

    def test_oscillatory_integrand_converges(self, paper_params, paper_packet):
        # ~40 rad of phase across the packet; closed form e^{-a^2/4} cos-free
        scale = paper_params.hbar / paper_params.sigma
        a = 40.0
        value = gaussian_expectation(
            lambda p: math.cos(a * p / scale), paper_packet, paper_params, tol=1e-12)
        assert value == pytest.approx(math.exp(-a * a / 4.0), abs=1e-12)

    def test_budget_exhaustion_raises(self, paper_params, paper_packet):
        scale = paper_params.hbar / paper_params.sigma

        def wild(p):
            return 1.0 + math.cos(2.0e5 * p / scale)

        with pytest.raises(NonConvergence):
            gaussian_expectation(wild, paper_packet, paper_params, tol=1e-10, budget=512)
        # the same integrand converges once the budget allows refinement
        value = gaussian_expectation(wild, paper_packet, paper_params, tol=1e-10,
                                     budget=1 << 21)
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_doubling_budget_leaves_converged_value_unchanged(self, paper_params, paper_packet):
        def f(p):
            return survival_weight(paper_params, p)

        a = gaussian_expectation(f, paper_packet, paper_params, tol=1e-11,
                                 budget=1 << 18, vectorized=True)
        b = gaussian_expectation(f, paper_packet, paper_params, tol=1e-11,
                                 budget=1 << 19, vectorized=True)
        assert a == b

    def test_truncation_sufficiency(self, paper_params, paper_packet):
        # widening the window from 8 to 10 density widths changes nothing
        scale = paper_params.hbar / paper_packet.sigma

        def integrand(u):
            return np.exp(-u * u) / math.sqrt(math.pi) * survival_weight(paper_params, scale * u)

        narrow, _ = adaptive_gauss(integrand, -8.0, 8.0, epsabs=1e-12, epsrel=1e-12,
                                   vectorized=True)
        wide, _ = adaptive_gauss(integrand, -10.0, 10.0, epsabs=1e-12, epsrel=1e-12,
                                 vectorized=True)
        assert abs(narrow - wide) / abs(wide) < 1e-10

    def test_error_estimate_is_reported(self, paper_params, paper_packet):
        value, err = gaussian_expectation_with_error(
            lambda p: survival_weight(paper_params, p), paper_packet, paper_params,
            tol=1e-10, vectorized=True)
        assert 0.0 <= err < 1e-9
        assert 0.0 < value < 1.0

    def test_complex_integrand(self, paper_params, paper_packet):
        scale = paper_params.hbar / paper_params.sigma
        a = 17.0
        value, err = gaussian_expectation_complex(
            lambda p: np.exp(1j * a * p / scale), paper_packet, paper_params, tol=1e-12,
            vectorized=True)
        assert value.real == pytest.approx(math.exp(-a * a / 4.0), abs=1e-11)
        assert abs(value.imag) < 1e-11
        assert err < 1e-9


class TestHermiteRule:
    def test_agrees_with_adaptive_at_small_phase(self, paper_packet):
        from rabi_metrology import PhysicalParams

        params = PhysicalParams(hbar=1e-34, wavevector=1e5, time=0.3)
        adaptive = gaussian_expectation(
            lambda p: survival_weight(params, p), paper_packet, params,
            tol=1e-12, vectorized=True)
        fixed = gaussian_expectation_hermite(
            lambda p: survival_weight(params, p), paper_packet, params, n=200)
        assert fixed == pytest.approx(adaptive, abs=1e-12)


class TestMomentumGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            MomentumGrid(points=np.array([1.0, 0.5]), weights=np.array([1.0, 1.0]),
                         lo=0.0, hi=2.0)
        with pytest.raises(ValueError):
            MomentumGrid(points=np.array([0.0, 1.0]), weights=np.array([1.0, -1.0]),
                         lo=0.0, hi=1.0)
        with pytest.raises(ValueError):
            MomentumGrid(points=np.array([0.0, 1.0]), weights=np.array([1.0, 1.0]),
                         lo=1.0, hi=0.0)

    def test_build_requires_64_points(self, paper_params):
        with pytest.raises(ValueError):
            build_measurement_grid(paper_params, 63)

    def test_zero_wavevector_grid_is_symmetric(self, paper_params):
        params = paper_params.replace(wavevector=0.0)
        grid = build_measurement_grid(params, 64)
        width = 16.0 * params.hbar / params.sigma
        assert grid.lo == pytest.approx(-0.5 * width, rel=1e-15)
        assert grid.hi == pytest.approx(0.5 * width, rel=1e-15)

    def test_default_grid_span(self, codata_params):
        grid = build_measurement_grid(codata_params, 4096)
        hbar, sigma, k0 = codata_params.hbar, codata_params.sigma, codata_params.wavevector
        assert grid.lo == pytest.approx(-8.0 * hbar / sigma, rel=1e-14)
        assert grid.hi == pytest.approx(hbar * k0 + 8.0 * hbar / sigma, rel=1e-14)
        # arithmetic anchors
        assert grid.lo == pytest.approx(-2.1091436e-29, rel=1e-6)
        assert grid.hi == pytest.approx(1.0545718e-28 + 2.1091436e-29, rel=1e-6)

    def test_negative_wavevector_grid_reflects(self, paper_params):
        params = paper_params.replace(wavevector=-1e6)
        grid = build_measurement_grid(params, 64)
        assert grid.lo < -params.hbar * 1e6
        assert grid.hi == pytest.approx(8.0 * params.hbar / params.sigma, rel=1e-14)

    def test_packet_density_integrates_to_one(self, paper_params, paper_packet):
        grid = build_measurement_grid(paper_params, 4096)
        total = grid.integrate(paper_packet.momentum_density(grid.points, paper_params.hbar))
        assert abs(total - 1.0) < 1e-8

    def test_hermite_weight_grid_mass(self, paper_params, paper_packet):
        grid = hermite_weight_grid(paper_packet, paper_params, n=200)
        total = grid.integrate(paper_packet.momentum_density(grid.points, paper_params.hbar))
        assert 1.0 - 1e-9 <= total <= 1.0 + 1e-12

    def test_hermite_weight_grid_node_cap(self, paper_params, paper_packet):
        with pytest.raises(ValueError):
            hermite_weight_grid(paper_packet, paper_params, n=400)
