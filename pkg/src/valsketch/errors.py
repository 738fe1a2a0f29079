"""Exception types shared across the package."""


class MalformedBundleError(ValueError):
    """Bundle contains item ids outside the ground set."""


class CapabilityError(RuntimeError):
    """An oracle was asked for a capability it does not support."""


class ScaleError(ValueError):
    """Problem size exceeds what an exhaustive routine is allowed to handle."""


class SerializationError(ValueError):
    """Corrupted or schema-incompatible serialized payload."""
