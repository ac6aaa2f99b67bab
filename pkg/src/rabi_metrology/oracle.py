"""Brute-force recomputation of every headline quantity.

Nothing in this module reuses the closed-form generator algebra or the
adaptive quadrature of the analytic paths.  Evolution happens on explicit
2x2 Hamiltonian matrices (fixed-step RK4 or unitary diagonalization),
coupling derivatives are central finite differences with a Richardson
halving gate, and momentum averages use fixed grids.  Agreement between
this module and the analytic modules is the package's core correctness
statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cfi as cfi_mod
from .exceptions import IndeterminateAtBoundary, StepTooCoarse
from .params import GaussianPacket, PhysicalParams
from .quadrature import MomentumGrid, build_measurement_grid
from .su2 import IDENTITY, SIGMA_X, SIGMA_Z

RK4 = "rk4"
CLOSED_FORM = "closed_form"

#: Default central-difference steps, as fractions of the coupling.  The
#: QFI step follows the state-derivative roundoff/truncation sweet spot;
#: the CFI step is larger because probability differences are much smaller
#: than state differences.
QFI_FD_FRACTION = 1e-6
CFI_FD_FRACTION = 1e-5

_LOWER = np.array([0.0, 1.0], dtype=complex)  # initial internal state


@dataclass(frozen=True)
class PropagationResult:
    """Per-momentum evolution operators plus how they were obtained."""

    unitary: np.ndarray
    steps: int
    method: str

    def unitarity_defect(self) -> float:
        u = self.unitary
        prod = u @ np.conj(np.swapaxes(u, -1, -2))
        return float(np.max(np.abs(prod - IDENTITY)))


def hamiltonian_with_kinetic(params: PhysicalParams, q):
    """Effective 2x2 Hamiltonian (J) at momentum eigenvalue q, scalar terms included."""
    q = np.asarray(q, dtype=float)
    hbar = params.hbar
    scalar = (q * q / (2.0 * params.mass)
              + hbar**2 * params.wavevector**2 / (8.0 * params.mass)
              + 0.5 * hbar * params.detuning)
    longitudinal = 0.5 * hbar * params.wavevector * q / params.mass + 0.5 * hbar * params.detuning
    coupling = 0.5 * hbar * params.rabi
    shape = q.shape + (2, 2)
    h = np.zeros(shape, dtype=complex)
    h += scalar[..., None, None] * IDENTITY
    h += longitudinal[..., None, None] * SIGMA_Z
    h += coupling * SIGMA_X
    return h


def hamiltonian_without_kinetic(params: PhysicalParams) -> np.ndarray:
    """Effective 2x2 Hamiltonian (J) when the kinetic term is dropped."""
    hbar = params.hbar
    return (0.5 * hbar * params.detuning * (IDENTITY + SIGMA_Z)
            + 0.5 * hbar * params.rabi * SIGMA_X)


def evolve_numeric(params: PhysicalParams, q: float, steps: int) -> np.ndarray:
    """Fixed-step RK4 integration of dU/dt = -(i/hbar) H U from the identity.

    Returns the 2x2 evolution operator at params.time for the with-kinetic
    Hamiltonian at momentum q.  Fixed stepping keeps the step count a test
    parameter: halving it must shrink the error 16-fold.
    """
    if steps < 100:
        raise ValueError(f"steps must be >= 100, got {steps}")
    h = hamiltonian_with_kinetic(params, float(q))
    return _rk4_propagate(h, params.time, steps, params.hbar)


def _rk4_propagate(h: np.ndarray, t: float, steps: int, hbar: float) -> np.ndarray:
    a = (-1j / hbar) * h
    dt = t / steps
    u = np.broadcast_to(IDENTITY, h.shape).astype(complex).copy()
    for _ in range(steps):
        k1 = a @ u
        k2 = a @ (u + 0.5 * dt * k1)
        k3 = a @ (u + 0.5 * dt * k2)
        k4 = a @ (u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


def evolve_closed(params: PhysicalParams, q, time: float | None = None) -> np.ndarray:
    """Evolution operator(s) by diagonalizing the Hermitian 2x2 Hamiltonian.

    Vectorized over q; exact to rounding, independent of both the RK4
    stepper and the trigonometric closed forms used by the analytic paths.
    """
    if time is None:
        time = params.time
    h = hamiltonian_with_kinetic(params, q)
    return _expi(h, -time / params.hbar)


def _expi(h: np.ndarray, factor: float) -> np.ndarray:
    """exp(1j * factor * h) for stacked Hermitian h via eigendecomposition."""
    evals, evecs = np.linalg.eigh(h)
    phases = np.exp(1j * factor * evals)
    return np.einsum("...ik,...k,...jk->...ij", evecs, phases, np.conj(evecs))


def propagate(params: PhysicalParams, q, steps: int = 0, method: str = CLOSED_FORM) -> PropagationResult:
    """Evolve at the given momenta with the requested method."""
    if method == CLOSED_FORM:
        return PropagationResult(unitary=evolve_closed(params, q), steps=0, method=method)
    if method == RK4:
        qs = np.atleast_1d(np.asarray(q, dtype=float))
        h = hamiltonian_with_kinetic(params, qs)
        u = _rk4_propagate(h, params.time, steps, params.hbar)
        if np.ndim(q) == 0:
            u = u[0]
        return PropagationResult(unitary=u, steps=steps, method=method)
    raise ValueError(f"unknown method {method!r}")


def _packet_grid(params: PhysicalParams, packet: GaussianPacket, n: int) -> MomentumGrid:
    # Only the packet support matters here (inner products carry the weight
    # w(p); no recoil branch separation in the rotated frame).
    half = 8.0 * params.hbar / packet.sigma
    pts = np.linspace(packet.center_p - half, packet.center_p + half, n)
    h = (pts[-1] - pts[0]) / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return MomentumGrid(points=pts, weights=w, lo=float(pts[0]), hi=float(pts[-1]))


def _spinors_with_kinetic(params: PhysicalParams, q) -> np.ndarray:
    u = evolve_closed(params, q)
    return u @ _LOWER


def _spinor_without_kinetic(params: PhysicalParams) -> np.ndarray:
    u = _expi(hamiltonian_without_kinetic(params), -params.time / params.hbar)
    return u @ _LOWER


def _qfi_from_states(chi, chi_plus, chi_minus, delta: float, weights=None) -> float:
    dchi = (chi_plus - chi_minus) / (2.0 * delta)
    if weights is None:
        norm_term = float(np.real(np.vdot(dchi, dchi)))
        overlap = complex(np.vdot(chi, dchi))
    else:
        norm_term = float(np.dot(weights, np.sum(np.abs(dchi) ** 2, axis=-1)))
        overlap = complex(np.dot(weights, np.einsum("...k,...k->...", np.conj(chi), dchi)))
    return 4.0 * (norm_term - abs(overlap) ** 2)


def qfi_fd(params: PhysicalParams, packet: GaussianPacket | None = None,
           delta_omega: float | None = None, tol: float = 1e-5,
           variant: str = "with", grid_n: int = 4097) -> float:
    """QFI by central differences of the numerically evolved state.

    Evolves the spinor packet at coupling +/- delta and +/- delta/2, forms
    the state derivative per momentum sample, and assembles
    4 (<d psi|d psi> - |<psi|d psi>|^2) by grid integration.  Returns the
    Richardson-extrapolated value; raises StepTooCoarse when the two step
    sizes disagree beyond ``tol`` (relative, floored at 1).  The step
    disagreement scales as (delta * t)^2 while the extrapolated residual is
    O((delta * t)^4), so the gate tolerance is deliberately looser than the
    accuracy of the returned value.
    """
    if packet is None:
        packet = GaussianPacket.from_params(params)
    if delta_omega is None:
        delta_omega = QFI_FD_FRACTION * params.rabi
    if not 1e-8 * params.rabi <= delta_omega <= 1e-3 * params.rabi:
        raise ValueError("delta_omega outside [1e-8, 1e-3] * rabi")

    if variant == "with":
        grid = _packet_grid(params, packet, grid_n)
        q = grid.points + 0.5 * params.hbar * params.wavevector
        weights = grid.weights * packet.momentum_density(grid.points, params.hbar)

        def states(omega: float) -> np.ndarray:
            return _spinors_with_kinetic(params.replace(rabi=omega), q)
    elif variant == "without":
        weights = None

        def states(omega: float) -> np.ndarray:
            return _spinor_without_kinetic(params.replace(rabi=omega))
    else:
        raise ValueError(f"unknown variant {variant!r}")

    chi = states(params.rabi)
    estimates = []
    for step in (delta_omega, 0.5 * delta_omega):
        plus = states(params.rabi + step)
        minus = states(params.rabi - step)
        estimates.append(_qfi_from_states(chi, plus, minus, step, weights))
    coarse, fine = estimates
    if abs(coarse - fine) > tol * max(1.0, abs(fine)):
        raise StepTooCoarse(
            f"QFI finite difference unstable: {coarse} vs {fine} at delta {delta_omega}")
    return (4.0 * fine - coarse) / 3.0


def _cfi_pdm_fd(params: PhysicalParams, packet: GaussianPacket, delta: float,
                variant: str = "with") -> tuple[float, float]:
    if variant == "with":
        def prob(omega: float) -> float:
            return cfi_mod.pa_with_kinetic(params.replace(rabi=omega), packet, tol=1e-14)
    else:
        def prob(omega: float) -> float:
            return cfi_mod.pa_without_kinetic(params.replace(rabi=omega))

    pa = prob(params.rabi)
    pinned = pa * (1.0 - pa)
    if pinned < cfi_mod.PINNED_PROBABILITY:
        raise IndeterminateAtBoundary(
            f"PDM probability pinned (P_a = {pa}); Fisher ratio undefined here")

    def estimate(step: float) -> float:
        dpa = (prob(params.rabi + step) - prob(params.rabi - step)) / (2.0 * step)
        return dpa * dpa / pinned

    return estimate(delta), estimate(0.5 * delta)


def _cfi_grid_fd(params: PhysicalParams, packet: GaussianPacket, scheme: str,
                 grid: MomentumGrid, delta: float) -> tuple[float, float]:
    def densities(omega: float):
        d = cfi_mod.branch_density_with_kinetic(params.replace(rabi=omega), packet, grid)
        return d.pa_density, d.pb_density

    pa, pb = densities(params.rabi)

    def estimate(step: float) -> float:
        pa_p, pb_p = densities(params.rabi + step)
        pa_m, pb_m = densities(params.rabi - step)
        dpa = (pa_p - pa_m) / (2.0 * step)
        dpb = (pb_p - pb_m) / (2.0 * step)
        if scheme == "mm":
            return cfi_mod._fisher_sum(grid, pa + pb, dpa + dpb)
        return (cfi_mod._fisher_sum(grid, pa, dpa)
                + cfi_mod._fisher_sum(grid, pb, dpb))

    return estimate(delta), estimate(0.5 * delta)


def cfi_fd(params: PhysicalParams, packet: GaussianPacket | None = None,
           scheme: str = "pdm", delta_omega: float | None = None,
           tol: float = 1e-3, grid: MomentumGrid | None = None,
           grid_n: int = 32768, variant: str = "with") -> float:
    """CFI by central differences on the probability outputs of the cfi module.

    Only the coupling derivative is redone by finite differences; the
    probabilities themselves come from the production code, so any error in
    the hand-derived derivative integrands shows up as disagreement.  Same
    Richardson gate and extrapolation as qfi_fd.  ``variant="without"`` is
    accepted for the pdm scheme only (the momentum schemes are defined by
    the with-kinetic branch densities).
    """
    if packet is None:
        packet = GaussianPacket.from_params(params)
    if delta_omega is None:
        delta_omega = CFI_FD_FRACTION * params.rabi
    if not 1e-8 * params.rabi <= delta_omega <= 1e-3 * params.rabi:
        raise ValueError("delta_omega outside [1e-8, 1e-3] * rabi")
    if variant not in ("with", "without"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "without" and scheme != "pdm":
        raise ValueError("variant='without' applies to scheme='pdm' only")
    if scheme == "pdm":
        coarse, fine = _cfi_pdm_fd(params, packet, delta_omega, variant)
    elif scheme in ("mm", "cm"):
        if grid is None:
            grid = build_measurement_grid(params, grid_n)
        coarse, fine = _cfi_grid_fd(params, packet, scheme, grid, delta_omega)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if abs(coarse - fine) > tol * max(1.0, abs(fine)):
        raise StepTooCoarse(
            f"CFI finite difference unstable: {coarse} vs {fine} at delta {delta_omega}")
    return (4.0 * fine - coarse) / 3.0


def fidelity_numeric(params: PhysicalParams, packet: GaussianPacket | None = None,
                     steps: int = 10000, method: str = CLOSED_FORM,
                     grid_n: int = 4097) -> float:
    """Fidelity by explicit matrix evolution and grid integration.

    Composes the adjoint with-kinetic evolution with the kinetic-free one
    per momentum sample and integrates the lower-state overlap against the
    packet density.  ``method`` selects diagonalization (default) or the
    RK4 stepper for the with-kinetic factor.
    """
    if packet is None:
        packet = GaussianPacket.from_params(params)
    if steps < 1000:
        raise ValueError(f"steps must be >= 1000, got {steps}")
    grid = _packet_grid(params, packet, grid_n)
    q = grid.points + 0.5 * params.hbar * params.wavevector
    if method == CLOSED_FORM:
        u1 = evolve_closed(params, q)
    elif method == RK4:
        u1 = _rk4_propagate(hamiltonian_with_kinetic(params, q), params.time, steps, params.hbar)
    else:
        raise ValueError(f"unknown method {method!r}")
    u2 = _expi(hamiltonian_without_kinetic(params), -params.time / params.hbar)
    prod = np.conj(np.swapaxes(u1, -1, -2)) @ u2
    amp = prod[..., 1, 1]  # lower-state matrix element
    w = packet.momentum_density(grid.points, params.hbar)
    overlap = np.dot(grid.weights, w * amp)
    return float(abs(overlap) ** 2)


def draw_parameters(rng: np.random.Generator, base: PhysicalParams) -> PhysicalParams:
    """One random parameter point in the oracle comparison box."""
    return base.replace(
        detuning=float(rng.uniform(-2000.0, 2000.0)),
        wavevector=float(rng.uniform(0.0, 4e6)),
        time=float(rng.uniform(0.05, 1.0)),
        rabi=float(rng.uniform(200.0, 2000.0)),
    )
