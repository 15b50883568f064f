"""Exception types.

``ValueError`` is reserved for plainly malformed arguments (shape
mismatches, points outside the disc).  The classes below mark failures of
mathematical assumptions or of numerical convergence, so callers can tell
"you handed me the wrong object" apart from "the computation did not
certify".
"""


class WoldLabError(Exception):
    """Base class for package-specific errors."""


class AssumptionError(WoldLabError):
    """A mathematical hypothesis failed (not PSD, not a 2-isometry,
    not analytic, measures not compatible, ...)."""


class ConvergenceError(WoldLabError):
    """An iterative or rank-revealing computation did not certify
    (range iteration not stabilizing, condition number too large,
    least-squares residual above tolerance)."""
