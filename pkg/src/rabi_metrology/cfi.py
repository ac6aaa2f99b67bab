"""Measurement probabilities and classical Fisher information.

Three measurement schemes are covered for the coupling-strength estimate:

* PDM: population-difference (internal state only);
* MM:  momentum distribution only, internal state traced out;
* CM:  combined internal state + momentum record.

Without the kinetic term the PDM probability and CFI are closed form.
With it, the lower-state survival probability at each momentum component
depends on the recoil-shifted precession rate, and the observed momentum
of the flipped branch is kicked by one photon momentum hbar k0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateFrequency, IndeterminateAtBoundary
from .params import GaussianPacket, PhysicalParams, omega_p, omega_prime
from .quadrature import (
    DEFAULT_BUDGET,
    MomentumGrid,
    gaussian_expectation_with_error,
    measurement_bounds,
)

#: Below this value of P_a (1 - P_a) the PDM Fisher ratio is numerically
#: meaningless even when its analytic limit exists.
PINNED_PROBABILITY = 1e-14

#: Densities below this floor are skipped in Fisher integrands; their
#: numerators vanish at least as fast, so the loss is mathematically nil.
DENSITY_FLOOR = 1e-300


@dataclass(frozen=True)
class BranchDensity:
    """Joint (internal state, momentum) outcome densities on a grid.

    ``pa_density[i]`` is the probability density of finding the atom still
    in the lower state with momentum ``grid.points[i]``; ``pb_density`` is
    the flipped branch, observed one photon recoil higher.  Together they
    integrate to 1.
    """

    grid: MomentumGrid
    pa_density: np.ndarray
    pb_density: np.ndarray

    def total_mass(self) -> float:
        return self.grid.integrate(self.pa_density + self.pb_density)


def survival_weight(params: PhysicalParams, p):
    """Probability of remaining in the lower state for momentum component p.

    Equals cos^2(c) + nz^2 sin^2(c) for the rotation angle c = -t w(p)/2
    and longitudinal axis component nz; rewritten as
    1 - (rabi/w)^2 sin^2(t w / 2) which is manifestly in [0, 1].
    """
    w = omega_p(params, p)
    safe = np.where(w > 0.0, w, 1.0)
    s = np.sin(0.5 * params.time * w)
    frac = np.where(w > 0.0, (params.rabi / safe) ** 2, 0.0)
    return 1.0 - frac * s * s


def survival_weight_drabi(params: PhysicalParams, p):
    """Derivative of survival_weight with respect to the coupling."""
    w = omega_p(params, p)
    safe = np.where(w > 0.0, w, 1.0)
    q = np.asarray(p, dtype=float) + 0.5 * params.hbar * params.wavevector
    longi = params.detuning + params.wavevector * q / params.mass
    half_angle = 0.5 * params.time * w
    s = np.sin(half_angle)
    c = np.cos(half_angle)
    rabi = params.rabi
    term_axis = 2.0 * rabi * longi * longi / safe**4 * s * s
    term_angle = params.time * rabi**3 / safe**3 * s * c
    return np.where(w > 0.0, -(term_axis + term_angle), 0.0)


def pa_without_kinetic(params: PhysicalParams) -> float:
    """Lower-state population when the kinetic term is dropped."""
    wp = omega_prime(params)
    if wp == 0.0:
        raise DegenerateFrequency("detuning and rabi are both zero")
    half_angle = 0.5 * params.time * wp
    nz = params.detuning / wp
    return math.cos(half_angle) ** 2 + nz * nz * math.sin(half_angle) ** 2


def cfi_pdm_without_kinetic(params: PhysicalParams) -> float:
    """Closed-form PDM Fisher information without the kinetic term, s^2.

    Algebraically equal to (dP_a/dOmega)^2 / (P_a (1 - P_a)).  On resonance
    the expression collapses to t^2, the QFI itself.  When the probability
    is pinned at 0 or 1 the closed form is the limiting value where finite;
    if even that is indeterminate, IndeterminateAtBoundary is raised.
    """
    wp = omega_prime(params)
    if wp == 0.0:
        raise DegenerateFrequency("detuning and rabi are both zero")
    t = params.time
    if params.detuning == 0.0:
        return t * t
    delta2 = params.detuning**2
    rabi2 = params.rabi**2
    half = 0.5 * wp * t
    num = 2.0 * (2.0 * delta2 * wp * math.sin(half)
                 + wp * wp * t * rabi2 * math.cos(half)) ** 2
    den = wp**6 * (2.0 * delta2 + rabi2 * math.cos(wp * t) + rabi2)
    try:
        value = num / den
    except ZeroDivisionError:
        value = math.nan
    if math.isfinite(value):
        return float(value)
    pa = pa_without_kinetic(params)
    if pa * (1.0 - pa) < PINNED_PROBABILITY:
        raise IndeterminateAtBoundary(
            f"PDM probability pinned (P_a = {pa}); Fisher ratio undefined here")
    raise FloatingPointError("PDM closed form failed away from a pinned probability")


def pa_with_kinetic(params: PhysicalParams, packet: GaussianPacket | None = None,
                    tol: float = 1e-12, budget: int = DEFAULT_BUDGET) -> float:
    """Lower-state population with the kinetic term, by quadrature."""
    if packet is None:
        packet = GaussianPacket.from_params(params)
    value, _ = gaussian_expectation_with_error(
        lambda p: survival_weight(params, p), packet, params,
        tol=tol, budget=budget, vectorized=True)
    return min(max(value, 0.0), 1.0)


def cfi_pdm_with_kinetic(params: PhysicalParams, packet: GaussianPacket | None = None,
                         tol: float = 1e-12, budget: int = DEFAULT_BUDGET) -> float:
    """PDM Fisher information with the kinetic term, s^2.

    The population and its coupling derivative are separate quadratures;
    the derivative integrand is analytic (differentiation under the
    integral sign), which keeps the ratio stable where the probability
    barely moves.  Propagates NonConvergence; raises
    IndeterminateAtBoundary when the probability is pinned.
    """
    if packet is None:
        packet = GaussianPacket.from_params(params)
    if params.time == 0.0:
        return 0.0
    pa, _ = gaussian_expectation_with_error(
        lambda p: survival_weight(params, p), packet, params,
        tol=tol, budget=budget, vectorized=True)
    dpa, _ = gaussian_expectation_with_error(
        lambda p: survival_weight_drabi(params, p), packet, params,
        tol=tol, budget=budget, vectorized=True)
    pinned = pa * (1.0 - pa)
    if pinned < PINNED_PROBABILITY:
        raise IndeterminateAtBoundary(
            f"PDM probability pinned (P_a = {pa}); Fisher ratio undefined here")
    return dpa * dpa / pinned


def branch_density_with_kinetic(params: PhysicalParams, packet: GaussianPacket,
                                grid: MomentumGrid) -> BranchDensity:
    """Joint outcome densities for both internal-state branches.

    The unflipped branch keeps the initial momentum; the flipped branch is
    observed one photon recoil (hbar k0) higher and carries the
    complementary internal weight, as required by unitarity and the recoil
    bookkeeping of the final frame change.
    """
    _require_coverage(params, packet, grid)
    kick = params.hbar * params.wavevector
    p = grid.points
    w_a = packet.momentum_density(p, params.hbar)
    pa = w_a * survival_weight(params, p)
    shifted = p - kick
    w_b = packet.momentum_density(shifted, params.hbar)
    pb = w_b * (1.0 - survival_weight(params, shifted))
    return BranchDensity(grid=grid, pa_density=pa, pb_density=pb)


def branch_density_drabi(params: PhysicalParams, packet: GaussianPacket,
                         grid: MomentumGrid):
    """Coupling derivatives of the two branch densities on the grid."""
    kick = params.hbar * params.wavevector
    p = grid.points
    dpa = packet.momentum_density(p, params.hbar) * survival_weight_drabi(params, p)
    shifted = p - kick
    dpb = -packet.momentum_density(shifted, params.hbar) * survival_weight_drabi(params, shifted)
    return dpa, dpb


def _fisher_sum(grid: MomentumGrid, density: np.ndarray, derivative: np.ndarray) -> float:
    mask = density > DENSITY_FLOOR
    if not np.any(mask):
        return 0.0
    contrib = derivative[mask] ** 2 / density[mask]
    return float(np.dot(grid.weights[mask], contrib))


def cfi_mm(params: PhysicalParams, packet: GaussianPacket | None = None,
           grid: MomentumGrid | None = None, n: int = 32768) -> float:
    """Momentum-measurement Fisher information, s^2 (kinetic term kept).

    The internal state is traced out: the outcome density is the sum of
    both branch densities.
    """
    from .quadrature import build_measurement_grid

    if packet is None:
        packet = GaussianPacket.from_params(params)
    if grid is None:
        grid = build_measurement_grid(params, n)
    density = branch_density_with_kinetic(params, packet, grid)
    dpa, dpb = branch_density_drabi(params, packet, grid)
    return _fisher_sum(grid, density.pa_density + density.pb_density, dpa + dpb)


def cfi_cm(params: PhysicalParams, packet: GaussianPacket | None = None,
           grid: MomentumGrid | None = None, n: int = 32768) -> float:
    """Combined internal-state + momentum Fisher information, s^2.

    Per-branch Fisher integrands summed over both branches; refines both
    the PDM and MM records, so it upper-bounds each of their CFIs.
    """
    from .quadrature import build_measurement_grid

    if packet is None:
        packet = GaussianPacket.from_params(params)
    if grid is None:
        grid = build_measurement_grid(params, n)
    density = branch_density_with_kinetic(params, packet, grid)
    dpa, dpb = branch_density_drabi(params, packet, grid)
    return (_fisher_sum(grid, density.pa_density, dpa)
            + _fisher_sum(grid, density.pb_density, dpb))


def _require_coverage(params: PhysicalParams, packet: GaussianPacket, grid: MomentumGrid) -> None:
    # 6 density-width margins instead of the build default 8: permissive
    # enough for custom grids, tight enough to catch a wrong-branch grid.
    lo, hi = measurement_bounds(params, center_p=packet.center_p)
    slack = 2.0 * params.hbar / params.sigma
    if grid.lo > lo + slack or grid.hi < hi - slack:
        raise ValueError(
            f"grid [{grid.lo}, {grid.hi}] does not cover both branch supports "
            f"[{lo}, {hi}]")
