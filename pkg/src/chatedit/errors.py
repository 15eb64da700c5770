"""Exception types shared across the package.

Every error a caller is expected to handle has its own class; parsing and
resolution failures are ordinary control flow for the dispatcher and must
never surface as crashes.
"""

from __future__ import annotations


class ChatEditError(Exception):
    """Base class for all package errors."""


# --- registry ---------------------------------------------------------------

class RegistryError(ChatEditError):
    pass


class DuplicateName(RegistryError):
    pass


class InvalidHierarchy(RegistryError):
    pass


class UnknownExecutor(RegistryError):
    pass


class NotFound(RegistryError):
    """A name emitted by the model has no match in the queried scope."""


# --- prompt / parsing -------------------------------------------------------

class NotAGroup(ChatEditError):
    pass


class FormatError(ChatEditError):
    """Model reply does not conform to the output grammar."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


# --- gateway ----------------------------------------------------------------

class BackendError(ChatEditError):
    """Transport-level failure talking to a model backend."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


class ScriptExhausted(BackendError):
    """A strict fixture has no entry matching the current request."""

    def __init__(self, detail: str = ""):
        super().__init__("script-exhausted", detail)


# --- dispatch ---------------------------------------------------------------

class InvocationFailure(ChatEditError):
    """Function selection failed after retry exhaustion.

    Carries the stage that failed and the tokens already consumed so callers
    can keep usage accounting exact even on the failure path.
    """

    def __init__(self, stage: str, cause: Exception, tokens_spent: int = 0):
        super().__init__(f"invocation failed at {stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.tokens_spent = tokens_spent


class ExecutorError(ChatEditError):
    """An executor raised while applying a plan step."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"step {step_index} failed: {cause}")
        self.step_index = step_index
        self.cause = cause


# --- imaging ----------------------------------------------------------------

class ImagingError(ChatEditError):
    pass


class ChannelMismatch(ImagingError):
    pass


class MaskDimensionMismatch(ImagingError):
    pass


class DimensionMismatch(ImagingError):
    pass


class ShapeMismatch(ImagingError):
    pass


class FullMask(ImagingError):
    """Inpainting over a full mask has no known pixels to diffuse from."""


# --- removal pipeline -------------------------------------------------------

class RemovalError(ChatEditError):
    def __init__(self, stage: str, cause: Exception | str):
        super().__init__(f"removal stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


class EmptyCandidates(ImagingError):
    pass


class NoOverlap(ImagingError):
    """Every candidate mask has zero overlap with the coarse mask."""


# --- session ----------------------------------------------------------------

class SessionError(ChatEditError):
    pass


class NothingToUndo(SessionError):
    pass


class DecodeError(SessionError):
    pass


class SizeLimit(SessionError):
    pass


# --- eval harness -----------------------------------------------------------

class DatasetFormatError(ChatEditError):
    pass


class EvalPropertyViolation(ChatEditError):
    """A structural property the harness asserts over its own report failed."""
