"""Exception hierarchy for the toolkit.

Every error the library raises deliberately derives from RdnetError so the
CLI can map failures onto its exit-code contract: validation problems exit
with 2, I/O problems (plain OSError) with 3, numerical failures with 4.
"""


class RdnetError(Exception):
    """Base class for all validation and consistency errors."""


class NonIntegerDilation(RdnetError):
    """doppler_shift * b_d / d_max is not a strictly positive integer."""


class ReplicaOverflow(RdnetError):
    """n_tx * dilation exceeds b_d, so Tx replicas would alias onto each other."""


class InvalidConfig(RdnetError):
    """A config field violates a basic consistency rule."""


class InvalidScene(RdnetError):
    """A scene or target violates its invariants."""


class ShapeMismatch(RdnetError):
    """Array shape incompatible with the config or the consuming operation."""


class ConfigMismatch(RdnetError):
    """Tensor does not belong to the given config."""


class CellOutOfRange(RdnetError):
    """A selected (range, Doppler) cell lies outside the tensor."""


class WindowTooLarge(RdnetError):
    """CFAR guard+train window does not fit in the map."""


class SpecInconsistent(RdnetError):
    """Model spec cannot be realized for the given radar config."""


class ProbabilityOutOfRange(RdnetError):
    """Classification map contains values outside [0, 1]."""


class OutOfFieldOfView(RdnetError):
    """Target cannot be encoded on the ground-truth grids."""


class BothZero(RdnetError):
    """f1 is undefined when ap and ar are both zero."""


class FormatError(RdnetError):
    """A file does not conform to its on-disk format."""


class NumericalFailure(RdnetError):
    """Non-finite values encountered where finite ones are required."""
