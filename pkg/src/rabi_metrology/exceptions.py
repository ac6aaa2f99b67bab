"""Exception types raised by the numerical routines."""


class NumericsError(Exception):
    """Base class for recoverable numerical failures."""


class NonConvergence(NumericsError):
    """Adaptive quadrature exhausted its subdivision budget.

    Usually means the integrand oscillates faster than the refinement can
    resolve; raise the budget or shrink the evolution time.
    """


class DegenerateFrequency(NumericsError):
    """The effective precession frequency is zero (detuning = coupling = 0)."""


class IndeterminateAtBoundary(NumericsError):
    """A measurement probability is pinned at 0 or 1, so the Fisher
    information ratio is numerically meaningless at this point."""


class StepTooCoarse(NumericsError):
    """Finite-difference step failed the Richardson halving consistency gate."""
