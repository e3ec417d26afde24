"""Exception hierarchy.

``ParameterError`` covers bad input; everything deriving from
``PhysicsError`` means the inputs were fine but the requested point has no
meaningful answer (no steady state, unstable dynamics, ...).
"""


class ParameterError(ValueError):
    """Invalid or inconsistent input parameter."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class PhysicsError(RuntimeError):
    pass


class NonConvergence(PhysicsError):
    """Steady-state iteration did not settle within its budget."""


class UnphysicalSoftMode(PhysicsError):
    """Effective mechanical frequency is not positive.

    The offending steady state is kept on ``state`` so callers can still
    inspect it (e.g. build the drift matrix for a stability map).
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class UnstableSystem(PhysicsError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DivergentSensitivity(PhysicsError):
    """The measured quadrature carries no force signal (infinite noise)."""


class BracketError(PhysicsError):
    """No interior minimum inside the requested search bracket."""
