"""Exact 2x2 su(2) algebra.

Two jobs live here: axis-angle exponentials of Pauli vectors, and the
generator of the sensitivity of a constant-Hamiltonian evolution to the
swept coupling.  For U = exp(-i t r(phi).sigma/2) the Hermitian generator
i (d U'/d phi) U is again a Pauli vector R.sigma; ``generator_rvector``
returns R in closed form, with the half-angle factors from J = sigma/2
absorbed so callers never handle them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import PhysicalParams

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

#: Below this value of |r| t the sinc-like ratios switch to their Taylor
#: series; avoids 0/0 at the rabi = detuning = 0 corner during sweeps.
SERIES_THRESHOLD = 1e-6


@dataclass(frozen=True)
class AxisAngle:
    """An su(2) rotation exp(i * angle * (axis . sigma)).

    ``axis`` must be a unit 3-vector to within 1e-12 unless ``angle`` is 0,
    in which case the axis is irrelevant and may be arbitrary.
    """

    angle: float
    axis: tuple[float, float, float]

    def __post_init__(self) -> None:
        if self.angle != 0.0:
            norm = math.sqrt(sum(c * c for c in self.axis))
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"axis must be unit length, |axis| = {norm!r}")


@dataclass(frozen=True)
class RVector:
    """Components of a generator R.sigma, each in seconds.

    All components vanish as t -> 0: no parameter sensitivity accumulates
    in zero time.  Components may be scalars or equal-shape arrays.
    """

    rx: float
    ry: float
    rz: float

    def norm_squared(self):
        return self.rx * self.rx + self.ry * self.ry + self.rz * self.rz


def exp_axis_angle(rot: AxisAngle) -> np.ndarray:
    """Return the 2x2 unitary cos(angle) I + i sin(angle) (axis . sigma)."""
    c = math.cos(rot.angle)
    s = math.sin(rot.angle)
    nx, ny, nz = rot.axis
    return c * IDENTITY + 1j * s * (nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z)


def _rotation_ratios(x):
    """The three sinc-like ratios entering the generator formula.

    Returns ((sin x - x)/x^3, sin x / x, (1 - cos x)/x^2), with 4th-order
    Taylor series below SERIES_THRESHOLD.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_THRESHOLD
    xs = np.where(small, 1.0, x)  # safe divisor
    x2 = x * x
    with np.errstate(invalid="ignore"):
        a = np.where(small, -1.0 / 6.0 + x2 / 120.0 - x2 * x2 / 5040.0,
                     (np.sin(xs) - xs) / xs**3)
        b = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0,
                     np.sin(xs) / xs)
        c = np.where(small, 0.5 - x2 / 24.0 + x2 * x2 / 720.0,
                     (1.0 - np.cos(xs)) / (xs * xs))
    return a, b, c


def generator_rvector(r, v, t: float) -> RVector:
    """Generator components of the coupling sensitivity of exp(-i t r.sigma/2).

    Parameters
    ----------
    r : 3-sequence
        Precession vector at the working point, rad/s.  Entries may be
        scalars or broadcastable arrays.
    v : 3-sequence
        Derivative of r with respect to the swept parameter (dimensionless
        when sweeping a frequency).
    t : float
        Evolution time, s; must be >= 0.

    Returns
    -------
    RVector
        R such that i (dU'/d phi) U = R . sigma, in seconds.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    rx, ry, rz = (np.asarray(c, dtype=float) for c in r)
    vx, vy, vz = (np.asarray(c, dtype=float) for c in v)
    rnorm = np.sqrt(rx * rx + ry * ry + rz * rz)
    a, b, c = _rotation_ratios(rnorm * t)
    rdotv = rx * vx + ry * vy + rz * vz
    cx = ry * vz - rz * vy
    cy = rz * vx - rx * vz
    cz = rx * vy - ry * vx
    t2 = t * t
    coeff_parallel = 0.5 * rdotv * t * t2 * a
    coeff_v = 0.5 * t * b
    coeff_cross = 0.5 * t2 * c
    return RVector(
        rx=coeff_parallel * rx - coeff_v * vx + coeff_cross * cx,
        ry=coeff_parallel * ry - coeff_v * vy + coeff_cross * cy,
        rz=coeff_parallel * rz - coeff_v * vz + coeff_cross * cz,
    )


def rvector_with_kinetic(params: PhysicalParams, q) -> RVector:
    """Generator components when the kinetic term is kept, at momentum q.

    ``q`` is the momentum after the recoil bookkeeping shift, i.e. callers
    integrating over the packet density at p pass q = p + hbar k0 / 2.  The
    longitudinal precession rate (k0/m) q + detuning keeps its sign.
    """
    q = np.asarray(q, dtype=float)
    longitudinal = params.wavevector * q / params.mass + params.detuning
    one = np.ones_like(longitudinal)
    return generator_rvector(
        (params.rabi * one, 0.0 * one, longitudinal),
        (one, 0.0 * one, 0.0 * one),
        params.time,
    )


def rvector_without_kinetic(params: PhysicalParams) -> RVector:
    """Generator components when the kinetic term is dropped (momentum-free)."""
    return generator_rvector(
        (params.rabi, 0.0, params.detuning),
        (1.0, 0.0, 0.0),
        params.time,
    )
