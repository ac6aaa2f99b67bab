"""Physical parameters and the Gaussian center-of-mass wavepacket.

Everything is SI: angular frequencies in rad/s, momenta in kg*m/s, lengths
in m.  The coupling strength (Rabi frequency) is the estimated parameter
throughout, so Fisher information values carry units of s^2.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

#: CODATA value of the reduced Planck constant, J*s.  Configurable on
#: PhysicalParams because desk-scale reproductions round it to 1e-34.
HBAR_CODATA = 1.0545718e-34


@dataclass(frozen=True)
class PhysicalParams:
    """Scalar inputs shared by every computation in the package.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant, J*s.
    mass : float
        Atomic mass, kg.
    rabi : float
        Coupling strength Omega between light and the internal transition,
        rad/s.  This is the parameter being estimated; it must be >= 0.
    detuning : float
        Laser-atom detuning Delta, rad/s.  Any sign.
    wavevector : float
        Running-wave wavevector k0, 1/m.  Any sign, zero allowed.
    time : float
        Evolution time, s.
    sigma : float
        Initial position-space wavepacket width, m.
    """

    hbar: float = HBAR_CODATA
    mass: float = 1.44e-25
    rabi: float = 1.0e3
    detuning: float = 1.0e3
    wavevector: float = 1.0e6
    time: float = 1.0
    sigma: float = 4.0e-5

    def __post_init__(self) -> None:
        if not self.hbar > 0.0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.time < 0.0:
            raise ValueError(f"time must be >= 0, got {self.time}")
        if self.rabi < 0.0:
            raise ValueError(f"rabi must be >= 0, got {self.rabi}")
        for name in ("hbar", "mass", "rabi", "detuning", "wavevector", "time", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes: float) -> "PhysicalParams":
        """Return a copy with the given fields replaced."""
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class GaussianPacket:
    """Minimum-uncertainty Gaussian wavepacket for the center-of-mass motion.

    The position amplitude is exp(-z^2 / 2 sigma^2) / (pi sigma^2)^(1/4)
    for ``center_p = 0``.  In momentum space the probability density is

        w(p) = (sigma / (hbar sqrt(pi))) * exp(-(p - center_p)^2 sigma^2 / hbar^2),

    normalized so that the integral over all p is 1.
    """

    sigma: float
    center_p: float = 0.0

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.center_p):
            raise ValueError("center_p must be finite")

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "GaussianPacket":
        return cls(sigma=params.sigma)

    def momentum_density(self, p, hbar: float):
        """Normalized momentum-space probability density w(p)."""
        u = (np.asarray(p, dtype=float) - self.center_p) * self.sigma / hbar
        return (self.sigma / (hbar * math.sqrt(math.pi))) * np.exp(-u * u)

    def momentum_std(self, hbar: float) -> float:
        """Standard deviation of the momentum density, hbar / (sigma sqrt(2))."""
        return hbar / (self.sigma * math.sqrt(2.0))


def omega_prime(params: PhysicalParams) -> float:
    """Generalized Rabi frequency sqrt(detuning^2 + rabi^2), rad/s.

    Strictly positive unless detuning and rabi are both zero.
    """
    return math.hypot(params.detuning, params.rabi)


def omega_p(params: PhysicalParams, p):
    """Momentum-dependent generalized Rabi frequency, rad/s.

    For a momentum component p of the initial packet, the longitudinal
    (population-difference) part of the effective two-level Hamiltonian
    precesses at

        detuning + k0 * (hbar k0 / 2 + p) / mass,

    which combines the bare detuning, the Doppler shift, and the photon
    recoil.  The returned value is the quadrature sum with the coupling and
    is always >= rabi.  Accepts scalars or arrays.
    """
    shift = params.wavevector * (0.5 * params.hbar * params.wavevector + np.asarray(p, dtype=float)) / params.mass
    return np.hypot(params.detuning + shift, params.rabi)


def recoil_shift(params: PhysicalParams) -> float:
    """Single-photon recoil frequency hbar k0^2 / (2 m), rad/s.

    This is the offset by which the kinetic-energy term displaces the
    symmetry axis of momentum-averaged quantities along the detuning axis.
    """
    return params.hbar * params.wavevector**2 / (2.0 * params.mass)
