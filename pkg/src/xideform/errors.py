"""Exception hierarchy shared by all evaluators."""


class XiDeformError(Exception):
    """Base class for every error raised by the package."""


class PoleError(XiDeformError):
    """Evaluation point sits on a pole."""


class DomainError(XiDeformError):
    """Argument lies outside the region where the formula applies."""


class PrecisionError(XiDeformError):
    """Requested accuracy cannot be reached with the configured budget."""


class ModeError(XiDeformError):
    """Operation not available for the kernel's mode."""


class BoundaryZeroError(XiDeformError):
    """A zero persists on the boundary of a counting rectangle."""


class ConvergenceError(XiDeformError):
    """Newton refinement did not converge."""


class MarginError(XiDeformError):
    """Rouche inequality fails or holds without the required margin."""


class PoleProximityError(XiDeformError):
    """Point lies too low, where images of gamma poles may interfere."""


class PoleCrossingError(XiDeformError):
    """Contour shift would cross a pole with non-negligible residue."""


class WitnessNotFoundError(XiDeformError):
    """Search budget exhausted without a certified off-line zero."""


class NoShiftFoundError(XiDeformError):
    """No almost-period below the requested epsilon within the search range."""

    def __init__(self, message, best_tau=None, best_sup=None):
        super().__init__(message)
        self.best_tau = best_tau
        self.best_sup = best_sup


class ZeroCollisionError(MarginError):
    """The certification circle does not enclose exactly one zero of F_t."""
