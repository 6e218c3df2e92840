"""Exception hierarchy shared by all modules."""


class ConeLangevinError(Exception):
    """Base class for library errors."""


class DomainError(ConeLangevinError, ValueError):
    """A point lies outside the open domain of a geometry."""


class NumericalError(ConeLangevinError, ArithmeticError):
    """A factorization or evaluation broke down numerically."""


class StencilError(DomainError):
    """A finite-difference stencil left the domain."""

    def __init__(self, coordinate, message=None):
        self.coordinate = coordinate
        super().__init__(message or f"finite-difference stencil exits the domain along coordinate {coordinate}")


class UsageError(ConeLangevinError, ValueError):
    """An operation was called with arguments outside its contract."""


class StepFailure(ConeLangevinError, RuntimeError):
    """The integrator could not produce an interior step."""

    def __init__(self, replica, time, state, tries):
        self.replica = replica
        self.time = time
        self.state = state
        self.tries = tries
        super().__init__(
            f"replica {replica}: no interior step after {tries} resamples at t={time:.6g}, x={list(state)}"
        )


class ConvergenceError(ConeLangevinError, RuntimeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, decrement=None):
        self.decrement = decrement
        super().__init__(message)


class PreconditionError(ConeLangevinError, ValueError):
    """A statistical test was requested for a target it is not defined on."""


class ObservableError(DomainError):
    """An observable could not be evaluated along a path."""

    def __init__(self, step, message):
        self.step = step
        super().__init__(f"step {step}: {message}")
