"""Exception types shared across the toolkit."""


class ShelfGuideError(Exception):
    """Base class for all toolkit errors."""


class EmptyDataset(ShelfGuideError):
    """Demonstration dataset contained no rows."""


class MalformedRow(ShelfGuideError):
    """A demonstration row could not be parsed or references an unknown command."""


class UnknownCommand(ShelfGuideError):
    """Command id outside the model's vocabulary."""


class NonConvergence(ShelfGuideError):
    """Value iteration did not reach tolerance within the sweep budget."""


class ZeroVector(ShelfGuideError):
    """Cosine similarity of a zero-norm vector is undefined."""


class InsufficientSamples(ShelfGuideError):
    """Not enough depth samples to separate foreground from background."""


class EmptyInput(ShelfGuideError):
    """Operation requires at least one instance."""


class SessionFinished(ShelfGuideError):
    """A guidance session was stepped after emitting its done event."""
