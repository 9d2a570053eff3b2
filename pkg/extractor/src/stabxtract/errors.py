"""Error taxonomy: everything here is fatal, with enough context to act on."""


class ExtractError(Exception):
    """Base class for extraction failures."""


class JobError(ExtractError):
    """Job file missing, malformed, or inconsistent."""


class StructureError(ExtractError):
    """Structure input unreadable or unusable."""


class ChainMismatchError(ExtractError):
    """A requested sequence does not match the structure's chain length."""


class ModelError(ExtractError):
    """Backend cannot be resolved or loaded."""
