"""Exception hierarchy for laserchan."""


class LaserChanError(ValueError):
    """Base class for all library errors."""


class StateValidationError(LaserChanError):
    """Input state or weights violate a density-matrix invariant."""


class PositivityError(StateValidationError):
    """A matrix has an eigenvalue below the allowed roundoff floor."""


class TruncationError(LaserChanError):
    """The truncated Fock space cannot hold the state to tolerance.

    ``required_dim`` carries the suggested basis size when one is known.
    """

    def __init__(self, message, required_dim=None, trace_defect=None):
        super().__init__(message)
        self.required_dim = required_dim
        self.trace_defect = trace_defect


class ChannelOverflowError(TruncationError):
    """The evolved state is too spread out for any supported basis size."""


class RegimeError(LaserChanError):
    """The operation is only defined for a particular gain/loss regime."""


class DomainError(LaserChanError):
    """An argument lies outside the operation's domain."""


class DivergenceError(DomainError):
    """A generating function is evaluated outside its convergence region."""


class UndefinedObservableError(DomainError):
    """The observable is undefined for the given input (e.g. g2 of vacuum)."""


class BudgetError(LaserChanError):
    """An integrator would exceed its step budget."""
