"""Exception types shared across the package."""


class KrylovlpError(Exception):
    """Base class for solver errors."""


class SingularMatrixError(KrylovlpError):
    """A (triangular or basic) matrix is numerically singular.

    ``index`` identifies the offending diagonal position.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"singular at diagonal index {index}")


class UnboundedStepError(KrylovlpError):
    """A ratio test found no blocking index; the state is inconsistent."""


class DegenerateDirectionError(KrylovlpError):
    """A simplex search direction does not move the objective."""


class StagnationError(KrylovlpError):
    """No admissible entering index exists for a degenerate expansion."""
