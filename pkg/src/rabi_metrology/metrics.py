"""Headline quantities: state fidelity and quantum Fisher information.

Fidelity here means the squared overlap between the states evolved with
and without the kinetic-energy term, starting from the lower internal
state times a Gaussian packet.  It gauges how safe dropping that term is.

The QFI for the coupling strength is 4x the variance of the sensitivity
generator R.sigma on the initial state.  Without the kinetic term the
momentum drops out and the QFI is closed form; with it, the generator is
evaluated at the recoil-shifted momentum p + hbar k0 / 2 and averaged over
the packet's momentum density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateFrequency
from .params import GaussianPacket, PhysicalParams, omega_p, omega_prime
from .quadrature import (
    DEFAULT_BUDGET,
    gaussian_expectation_complex,
    gaussian_expectation_with_error,
)
from .su2 import rvector_with_kinetic

WITH_KINETIC = "with_kinetic"
WITHOUT_KINETIC = "without_kinetic"


@dataclass(frozen=True)
class FidelityResult:
    """Squared overlap in [0, 1] plus the quadrature error estimate."""

    value: float
    estimated_error: float

    def __post_init__(self) -> None:
        if not -1e-12 <= self.value <= 1.0 + 1e-12:
            raise ValueError(f"fidelity {self.value} outside [0, 1]")
        object.__setattr__(self, "value", min(max(self.value, 0.0), 1.0))


@dataclass(frozen=True)
class QfiResult:
    """QFI value in s^2, the Hamiltonian variant, and an error estimate.

    Values are clamped to 0 from above -1e-12; anything more negative is a
    bug and raises.
    """

    value: float
    variant: str
    estimated_error: float

    def __post_init__(self) -> None:
        if self.variant not in (WITH_KINETIC, WITHOUT_KINETIC):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.value < -1e-12:
            raise ValueError(f"QFI {self.value} is negative beyond tolerance")
        object.__setattr__(self, "value", max(self.value, 0.0))


def spin_overlap_factor(params: PhysicalParams, p):
    """Internal-state overlap between the two evolutions at momentum p.

    Both effective Hamiltonians are rotations about axes in the x-z plane;
    writing them as cos + i (axis.sigma) sin and taking the lower-state
    matrix element of the product gives the four-term combination below.
    Accepts scalars or arrays; p is the packet momentum (the recoil shift
    is applied internally).
    """
    p = np.asarray(p, dtype=float)
    q = p + 0.5 * params.hbar * params.wavevector
    long1 = params.detuning + params.wavevector * q / params.mass
    w1 = omega_p(params, p)
    w2 = omega_prime(params)

    c = 0.5 * params.time * w1
    d = -0.5 * params.time * w2
    # unit-axis components; the with-kinetic axis is momentum dependent
    with np.errstate(invalid="ignore", divide="ignore"):
        m1 = np.where(w1 > 0.0, params.rabi / np.where(w1 > 0.0, w1, 1.0), 0.0)
        m3 = np.where(w1 > 0.0, long1 / np.where(w1 > 0.0, w1, 1.0), 0.0)
    if w2 > 0.0:
        n1 = params.rabi / w2
        n3 = params.detuning / w2
    else:
        n1 = n3 = 0.0

    sc, cc = np.sin(c), np.cos(c)
    sd, cd = math.sin(d), math.cos(d)
    return (cc * cd
            - 1j * m3 * sc * cd
            - 1j * n3 * sd * cc
            - (m3 * n3 + m1 * n1) * sc * sd)


def free_phase(params: PhysicalParams, p):
    """Phase advance from the kinetic and constant recoil energies.

    (t/hbar) * (q^2/2m + hbar^2 k0^2 / 8m) with q = p + hbar k0 / 2; this
    is the piece of the with-kinetic evolution that the kinetic-free one
    lacks entirely.
    """
    q = np.asarray(p, dtype=float) + 0.5 * params.hbar * params.wavevector
    energy = q * q / (2.0 * params.mass) + params.hbar**2 * params.wavevector**2 / (8.0 * params.mass)
    return params.time * energy / params.hbar


def fidelity(params: PhysicalParams, packet: GaussianPacket | None = None,
             tol: float = 1e-10, budget: int = DEFAULT_BUDGET) -> FidelityResult:
    """Squared overlap of the final states with and without the kinetic term.

    The overlap is the momentum-density average of the free-evolution phase
    times the internal-state overlap factor; the fidelity is its modulus
    squared.  Propagates NonConvergence from the quadrature.
    """
    if packet is None:
        packet = GaussianPacket.from_params(params)
    if params.time == 0.0:
        return FidelityResult(value=1.0, estimated_error=0.0)

    def integrand(p):
        return np.exp(1j * free_phase(params, p)) * spin_overlap_factor(params, p)

    overlap, err = gaussian_expectation_complex(
        integrand, packet, params, tol=tol, budget=budget, vectorized=True)
    mag = abs(overlap)
    return FidelityResult(value=mag * mag, estimated_error=2.0 * mag * err)


def qfi_without_kinetic(params: PhysicalParams) -> QfiResult:
    """Closed-form QFI for the coupling when the kinetic term is dropped.

    Depends only on |detuning|, the coupling and time; the wavevector and
    packet width never enter.  Raises DegenerateFrequency when detuning and
    coupling are both zero.
    """
    wp = omega_prime(params)
    if wp == 0.0:
        raise DegenerateFrequency("detuning and rabi are both zero")
    t = params.time
    delta2 = params.detuning**2
    rabi2 = params.rabi**2
    x = wp * t
    num = (rabi2 * wp * t + delta2 * math.sin(x)) ** 2 \
        + delta2 * wp * wp * (math.cos(x) - 1.0) ** 2
    return QfiResult(value=num / wp**6, variant=WITHOUT_KINETIC, estimated_error=0.0)


def qfi_with_kinetic(params: PhysicalParams, packet: GaussianPacket | None = None,
                     tol: float = 1e-10, budget: int = DEFAULT_BUDGET) -> QfiResult:
    """QFI for the coupling with the kinetic term kept.

    4 * (<|R|^2> - <R_z>^2) where R is the sensitivity generator at the
    recoil-shifted momentum and <.> averages over the packet's momentum
    density.  Only the z component survives in the mean because the initial
    internal state is a sigma_z eigenstate.
    """
    if packet is None:
        packet = GaussianPacket.from_params(params)
    half_kick = 0.5 * params.hbar * params.wavevector

    def norm_sq(p):
        return rvector_with_kinetic(params, p + half_kick).norm_squared()

    def z_component(p):
        return rvector_with_kinetic(params, p + half_kick).rz

    mean_sq, err_sq = gaussian_expectation_with_error(
        norm_sq, packet, params, tol=tol, budget=budget, vectorized=True)
    mean_z, err_z = gaussian_expectation_with_error(
        z_component, packet, params, tol=tol, budget=budget, vectorized=True)
    value = 4.0 * (mean_sq - mean_z * mean_z)
    err = 4.0 * (err_sq + 2.0 * abs(mean_z) * err_z)
    return QfiResult(value=value, variant=WITH_KINETIC, estimated_error=err)
