"""Exception hierarchy shared by all modules."""


class OcaError(Exception):
    """Base class for every error raised by this package."""


class ConfigInvalid(OcaError, ValueError):
    """A scenario configuration failed validation.

    ``path`` names the offending field, e.g. ``"chopper.f_chop"``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


# atomic dynamics
class StepTooLarge(OcaError, ValueError):
    pass


class InvariantViolation(OcaError, RuntimeError):
    pass


class ZeroDecayRate(OcaError, ValueError):
    pass


class DegenerateRates(OcaError, ValueError):
    # Kept for API completeness; analytic_off_phase switches to the limit
    # formula instead of raising.
    pass


# field model
class LinearizationInvalid(OcaError, ValueError):
    pass


class SignMismatch(OcaError, ValueError):
    pass


class InsufficientData(OcaError, ValueError):
    pass


class DegenerateAbscissa(OcaError, ValueError):
    pass


class FlatSpectrum(OcaError, ValueError):
    pass


# signal chain / lock-in
class BadLength(OcaError, ValueError):
    pass


class NyquistViolation(OcaError, ValueError):
    pass


class GridMismatch(OcaError, ValueError):
    pass


class BadFrequencyOrder(OcaError, ValueError):
    pass


class RecordTooShort(OcaError, ValueError):
    pass


class ReferenceMismatch(OcaError, ValueError):
    pass


# spectral analysis
class SegmentTooLong(OcaError, ValueError):
    pass


class BadOverlap(OcaError, ValueError):
    pass


class UnachievableRbw(OcaError, ValueError):
    pass


class SignalOutOfRange(OcaError, ValueError):
    pass


class FrequencyMismatch(OcaError, ValueError):
    pass


class PeakNotFound(UserWarning):
    """Issued (not raised) when the tone is less than 3 dB above the floor."""
