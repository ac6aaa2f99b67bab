import math

import mpmath
import numpy as np
import pytest

from rabi_metrology import (
    AxisAngle,
    PhysicalParams,
    exp_axis_angle,
    generator_rvector,
    qfi_without_kinetic,
    rvector_with_kinetic,
    rvector_without_kinetic,
)
from rabi_metrology.su2 import SIGMA_X, SIGMA_Y, SIGMA_Z, _rotation_ratios


def fd_generator(omega, longitudinal, t, delta_omega):
    """i (dU'/dOmega) U by central differences on the axis-angle unitary.

    Returns the three Pauli components; the independent oracle for the
    closed-form generator.
    """
    def unitary(w):
        norm = math.hypot(w, longitudinal)
        if norm == 0.0:
            return np.eye(2, dtype=complex)
        axis = (w / norm, 0.0, longitudinal / norm)
        return exp_axis_angle(AxisAngle(angle=-0.5 * t * norm, axis=axis))

    u = unitary(omega)
    du_dag = (unitary(omega + delta_omega).conj().T
              - unitary(omega - delta_omega).conj().T) / (2.0 * delta_omega)
    h = 1j * du_dag @ u
    return tuple(0.5 * np.trace(h @ s).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))


class TestExpAxisAngle:
    def test_zero_angle_is_identity(self):
        u = exp_axis_angle(AxisAngle(angle=0.0, axis=(3.0, 0.0, 0.0)))
        np.testing.assert_allclose(u, np.eye(2), atol=1e-15)

    def test_quarter_turn_about_z(self):
        u = exp_axis_angle(AxisAngle(angle=math.pi / 2.0, axis=(0.0, 0.0, 1.0)))
        np.testing.assert_allclose(u, np.diag([1j, -1j]), atol=1e-15)

    def test_half_turn_about_x(self):
        u = exp_axis_angle(AxisAngle(angle=math.pi, axis=(1.0, 0.0, 0.0)))
        np.testing.assert_allclose(u, -np.eye(2), atol=1e-15)

    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValueError):
            AxisAngle(angle=1.0, axis=(1.0, 1.0, 0.0))

    def test_unitarity_for_random_rotations(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            angle = float(rng.uniform(-10.0, 10.0))
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            u = exp_axis_angle(AxisAngle(angle=angle, axis=tuple(axis)))
            np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
            assert abs(abs(np.linalg.det(u)) - 1.0) < 1e-12


class TestGeneratorRvector:
    def test_zero_time(self):
        r = generator_rvector((1000.0, 0.0, 500.0), (1.0, 0.0, 0.0), 0.0)
        assert (r.rx, r.ry, r.rz) == (0.0, 0.0, 0.0)

    def test_on_axis_case(self):
        for t in (1e-7, 0.3, 1.0):
            r = generator_rvector((1000.0, 0.0, 0.0), (1.0, 0.0, 0.0), t)
            assert r.rx == pytest.approx(-0.5 * t, rel=1e-12)
            assert r.ry == 0.0 and r.rz == 0.0

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            generator_rvector((1.0, 0.0, 0.0), (1.0, 0.0, 0.0), -1.0)

    @pytest.mark.parametrize("omega,longitudinal,t", [
        (1000.0, 1000.0, 1.0),
        (1000.0, -700.0, 0.37),
        (300.0, 2500.0, 0.8),
        (1500.0, 100.0, 0.05),
    ])
    def test_matches_finite_difference_generator(self, omega, longitudinal, t):
        r = generator_rvector((omega, 0.0, longitudinal), (1.0, 0.0, 0.0), t)
        fd = fd_generator(omega, longitudinal, t, delta_omega=1e-6 * omega)
        scale = max(1.0, abs(r.rx), abs(r.ry), abs(r.rz))
        for got, want in zip((r.rx, r.ry, r.rz), fd):
            assert abs(got - want) / scale < 1e-7

    def test_series_matches_high_precision_ratios_below_switchover(self):
        mpmath.mp.dps = 50
        for x in np.logspace(-9.0, -6.01, 15):
            a, b, c = _rotation_ratios(float(x))
            xm = mpmath.mpf(float(x))
            a_ref = (mpmath.sin(xm) - xm) / xm**3
            b_ref = mpmath.sin(xm) / xm
            c_ref = (1 - mpmath.cos(xm)) / xm**2
            assert abs(float(a) - float(a_ref)) / abs(float(a_ref)) < 1e-10
            assert abs(float(b) - float(b_ref)) / abs(float(b_ref)) < 1e-10
            assert abs(float(c) - float(c_ref)) / abs(float(c_ref)) < 1e-10

    def test_generator_accurate_across_switchover(self):
        # The raw (sin x - x)/x^3 ratio is ill-conditioned in doubles just
        # above the series switchover, but its contribution to R carries an
        # x^2 suppression; the generator components themselves must match a
        # 50-digit evaluation on both sides of the threshold.
        mpmath.mp.dps = 50
        omega, longitudinal = mpmath.mpf(3.0), mpmath.mpf(4.0)
        for x in np.logspace(-9, -3, 25):
            t = float(x) / 5.0  # |r| = 5
            r = generator_rvector((3.0, 0.0, 4.0), (1.0, 0.0, 0.0), t)
            tm = mpmath.mpf(t)
            norm = mpmath.sqrt(omega**2 + longitudinal**2)
            xm = norm * tm
            a = (mpmath.sin(xm) - xm) / xm**3
            b = mpmath.sin(xm) / xm
            c = (1 - mpmath.cos(xm)) / xm**2
            rx_ref = 0.5 * (omega * tm**3 * a * omega - tm * b)
            ry_ref = 0.5 * tm**2 * c * longitudinal
            rz_ref = 0.5 * (omega * tm**3 * a * longitudinal)
            scale = max(abs(float(rx_ref)), abs(float(ry_ref)), abs(float(rz_ref)))
            assert abs(r.rx - float(rx_ref)) / scale < 1e-10
            assert abs(r.ry - float(ry_ref)) / scale < 1e-10
            assert abs(r.rz - float(rz_ref)) / scale < 1e-10

    def test_degenerate_norm_is_finite(self):
        r = generator_rvector((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), 1.0)
        assert r.rx == pytest.approx(-0.5, rel=1e-12)
        assert math.isfinite(r.ry) and math.isfinite(r.rz)


class TestRvectorVariants:
    def test_with_kinetic_reduces_at_zero_wavevector(self, paper_params):
        params = paper_params.replace(wavevector=0.0)
        for q in (0.0, 1e-28, -3e-29):
            a = rvector_with_kinetic(params, q)
            b = rvector_without_kinetic(params)
            assert float(a.rx) == pytest.approx(b.rx, rel=1e-14)
            assert float(a.ry) == pytest.approx(b.ry, rel=1e-14)
            assert float(a.rz) == pytest.approx(b.rz, rel=1e-14)

    def test_longitudinal_components_vanish_at_cancelling_momentum(self, paper_params):
        # q = -m delta / k0 cancels the longitudinal rate up to one rounding
        q = -paper_params.mass * paper_params.detuning / paper_params.wavevector
        r = rvector_with_kinetic(paper_params, q)
        assert abs(float(r.ry)) < 1e-12
        assert abs(float(r.rz)) < 1e-12

    def test_with_kinetic_matches_finite_difference(self, paper_params):
        q = 0.5 * paper_params.hbar * paper_params.wavevector
        longitudinal = paper_params.wavevector * q / paper_params.mass + paper_params.detuning
        r = rvector_with_kinetic(paper_params, q)
        fd = fd_generator(paper_params.rabi, longitudinal, paper_params.time,
                          delta_omega=1e-6 * paper_params.rabi)
        for got, want in zip((float(r.rx), float(r.ry), float(r.rz)), fd):
            assert abs(got - want) < 1e-7

    def test_without_kinetic_on_resonance(self, paper_params):
        r = rvector_without_kinetic(paper_params.replace(detuning=0.0))
        assert r.rx == pytest.approx(-0.5 * paper_params.time, rel=1e-12)
        assert r.ry == 0.0 and r.rz == 0.0

    def test_without_kinetic_matches_finite_difference(self, paper_params):
        r = rvector_without_kinetic(paper_params)
        fd = fd_generator(paper_params.rabi, paper_params.detuning, paper_params.time,
                          delta_omega=1e-6 * paper_params.rabi)
        for got, want in zip((r.rx, r.ry, r.rz), fd):
            assert abs(got - want) < 1e-7

    def test_vanishes_at_zero_time(self, paper_params):
        r = rvector_without_kinetic(paper_params.replace(time=0.0))
        assert (r.rx, r.ry, r.rz) == (0.0, 0.0, 0.0)


class TestClosedFormIdentity:
    def test_generator_variance_reproduces_closed_form_qfi(self):
        # 4 (|R|^2 - R_z^2) on the lower state == the closed-form QFI,
        # checked on a 100-point parameter grid.
        deltas = np.linspace(-2000.0, 2000.0, 5)
        rabis = np.linspace(200.0, 2000.0, 5)
        times = np.linspace(0.1, 1.0, 4)
        count = 0
        for delta in deltas:
            for rabi in rabis:
                for t in times:
                    params = PhysicalParams(detuning=float(delta), rabi=float(rabi),
                                            time=float(t))
                    r = rvector_without_kinetic(params)
                    variance = 4.0 * (r.norm_squared() - r.rz**2)
                    closed = qfi_without_kinetic(params).value
                    assert variance == pytest.approx(closed, rel=1e-10)
                    count += 1
        assert count == 100
