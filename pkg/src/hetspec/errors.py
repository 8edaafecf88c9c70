"""Exception types shared across the package."""


class HetspecError(Exception):
    """Base class for every error raised by hetspec."""


class SchemeValidationError(HetspecError, ValueError):
    """A scheme, stage, or configuration violates a hard constraint."""


class OverlappingComponents(SchemeValidationError):
    """Two classical components closer than twice the detection bandwidth."""

    def __init__(self, i: int, j: int, spacing_hz: float, bandwidth_hz: float):
        self.indices = (i, j)
        super().__init__(
            f"components {i} and {j} are {spacing_hz:g} Hz apart; their "
            f"detection bands (half-width {bandwidth_hz:g} Hz) overlap"
        )


class NonPositivePower(SchemeValidationError):
    """A component with |amplitude|^2 == 0; weak lines must be dropped upstream."""

    def __init__(self, i: int):
        self.index = i
        super().__init__(f"component {i} has zero power")


class BandwidthTooLarge(SchemeValidationError):
    """Detection bandwidth not small against the optical reference (B < f0/1e3)."""


class PartialOverlap(HetspecError):
    """Two matrix entries whose detection bands overlap without coinciding.

    The solver refuses this configuration rather than approximating the
    intersection.
    """

    def __init__(self, cell_a, cell_b, freq_a_hz, freq_b_hz):
        self.cells = (cell_a, cell_b)
        self.freqs_hz = (freq_a_hz, freq_b_hz)
        super().__init__(
            f"matrix entries {cell_a} at {freq_a_hz:g} Hz and {cell_b} at "
            f"{freq_b_hz:g} Hz overlap partially (neither coincident nor "
            f"separated by 2B)"
        )


class UnmatchedSqueezer(HetspecError):
    """Squeezer reference coincides with no frequency-matrix entry."""


class SqueezerNotCentered(HetspecError):
    """Attached squeezer reference misses the group frequency by more than the tolerance."""


class MismatchedReference(HetspecError, ValueError):
    """Transfer sets with different reference frequencies cannot be composed."""


class ZeroAmplitude(HetspecError, ValueError):
    """Phase optimization needs two nonzero amplitudes."""


class AliasedScheme(HetspecError, ValueError):
    """Oracle sample rate too low for the beat notes the scheme produces."""


class TooShort(HetspecError, ValueError):
    """Time series shorter than two PSD segments."""


class GridMismatch(HetspecError, ValueError):
    """Spectra cannot be compared: incompatible grids or units."""


class SchemeShapeError(HetspecError):
    """Scheme does not have the shape an operation requires."""
