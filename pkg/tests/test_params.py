import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabi_metrology import (
    GaussianPacket,
    PhysicalParams,
    gaussian_expectation,
    omega_p,
    omega_prime,
    recoil_shift,
)


class TestOmegaPrime:
    def test_zero_detuning_reduces_to_rabi(self):
        assert omega_prime(PhysicalParams(detuning=0.0, rabi=1000.0)) == 1000.0

    def test_pythagorean_triple(self):
        assert omega_prime(PhysicalParams(detuning=3.0, rabi=4.0)) == pytest.approx(5.0, rel=1e-15)

    def test_equal_detuning_and_rabi(self):
        value = omega_prime(PhysicalParams(detuning=1000.0, rabi=1000.0))
        assert value == pytest.approx(1000.0 * math.sqrt(2.0), rel=1e-15)


class TestOmegaP:
    def test_no_wavevector_reduces_to_omega_prime(self, paper_params):
        params = paper_params.replace(wavevector=0.0)
        for p in (0.0, -3e-28, 5e-29):
            assert omega_p(params, p) == pytest.approx(omega_prime(params), rel=1e-15)

    def test_cancelling_momentum_gives_bare_rabi(self, paper_params):
        params = paper_params
        p = -0.5 * params.hbar * params.wavevector - params.mass * params.detuning / params.wavevector
        assert omega_p(params, p) == pytest.approx(params.rabi, rel=1e-12)

    def test_value_at_zero_momentum(self, paper_params):
        # direct scalar evaluation, written out independently
        shift = 1e6 * (0.5 * 1e-34 * 1e6 + 0.0) / 1.44e-25
        expected = math.sqrt((1000.0 + shift) ** 2 + 1000.0**2)
        assert expected == pytest.approx(1677.7984730143792, rel=1e-12)
        assert omega_p(paper_params, 0.0) == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(
        delta=st.floats(-5e3, 5e3),
        k0=st.floats(-5e6, 5e6),
        p=st.floats(-1e-27, 1e-27),
    )
    def test_never_below_rabi(self, delta, k0, p):
        params = PhysicalParams(detuning=delta, wavevector=k0)
        assert omega_p(params, p) >= params.rabi

    @settings(max_examples=50, deadline=None)
    @given(
        delta=st.floats(-5e3, 5e3),
        k0=st.floats(1e4, 5e6),
        p=st.floats(-1e-27, 1e-27),
    )
    def test_reflection_symmetry(self, delta, k0, p):
        params = PhysicalParams(detuning=delta, wavevector=k0)
        mirrored = params.replace(detuning=-delta - 2.0 * recoil_shift(params))
        a = float(omega_p(params, p))
        b = float(omega_p(mirrored, -p))
        assert b == pytest.approx(a, rel=1e-12)


class TestRecoilShift:
    def test_zero_wavevector(self):
        assert recoil_shift(PhysicalParams(wavevector=0.0)) == 0.0

    def test_hand_arithmetic(self, paper_params):
        assert 1e-22 / 2.88e-25 == pytest.approx(347.2222222222222, rel=1e-13)
        assert recoil_shift(paper_params) == pytest.approx(1e-22 / 2.88e-25, rel=1e-14)

    def test_quadratic_in_wavevector(self, paper_params):
        doubled = paper_params.replace(wavevector=2.0 * paper_params.wavevector)
        assert recoil_shift(doubled) == pytest.approx(4.0 * recoil_shift(paper_params), rel=1e-14)


class TestPhysicalParamsValidation:
    @pytest.mark.parametrize("field,value", [
        ("hbar", 0.0), ("hbar", -1e-34), ("mass", 0.0), ("sigma", -1e-5),
        ("time", -0.1), ("rabi", -1.0), ("detuning", math.nan),
    ])
    def test_rejects_bad_values(self, field, value):
        with pytest.raises(ValueError):
            PhysicalParams(**{field: value})

    def test_negative_and_zero_wavevector_allowed(self):
        PhysicalParams(wavevector=0.0)
        PhysicalParams(wavevector=-1e6)

    def test_replace_returns_new_frozen_instance(self, paper_params):
        other = paper_params.replace(detuning=-500.0)
        assert other.detuning == -500.0
        assert paper_params.detuning == 1000.0


class TestGaussianPacket:
    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            GaussianPacket(sigma=0.0)

    def test_from_params_copies_sigma(self, paper_params):
        assert GaussianPacket.from_params(paper_params).sigma == paper_params.sigma

    def test_momentum_std(self, paper_params, paper_packet):
        expected = paper_params.hbar / (paper_params.sigma * math.sqrt(2.0))
        assert paper_packet.momentum_std(paper_params.hbar) == pytest.approx(expected, rel=1e-15)

    def test_density_normalized(self, paper_params, paper_packet):
        total = gaussian_expectation(lambda p: 1.0, paper_packet, paper_params, tol=1e-12)
        assert abs(total - 1.0) < 1e-10

    def test_density_normalized_off_center(self, paper_params):
        packet = GaussianPacket(sigma=paper_params.sigma, center_p=3e-29)
        total = gaussian_expectation(lambda p: 1.0, packet, paper_params, tol=1e-12)
        assert abs(total - 1.0) < 1e-10

    def test_density_peak_at_center(self, paper_params):
        packet = GaussianPacket(sigma=paper_params.sigma, center_p=2e-29)
        w = packet.momentum_density(np.array([1e-29, 2e-29, 3e-29]), paper_params.hbar)
        assert w[1] == max(w)
        expected_peak = packet.sigma / (paper_params.hbar * math.sqrt(math.pi))
        assert w[1] == pytest.approx(expected_peak, rel=1e-15)
