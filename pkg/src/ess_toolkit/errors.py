"""Exception types shared across the toolkit."""


class EssToolkitError(Exception):
    """Base class for validation and usage errors raised by this package."""


class NegativeProbabilityError(EssToolkitError):
    """A probability was negative."""


class MassNotOneError(EssToolkitError):
    """Probabilities do not sum to 1 within tolerance."""


class DuplicateLabelError(EssToolkitError):
    """The same label appears more than once in a distribution."""


class UnknownLabelError(EssToolkitError):
    """A label is not part of the distribution it was used with."""


class OutOfRangeError(EssToolkitError):
    """A numeric argument is outside its admissible range."""


class EmptySampleError(EssToolkitError):
    """An operation that needs at least one sample received none."""
