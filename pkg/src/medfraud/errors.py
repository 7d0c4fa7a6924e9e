"""Exception and warning types shared across modules."""


class DataWarning(UserWarning):
    """Degenerate data handled by a documented fallback."""


class UsageError(RuntimeError):
    """An operation was called out of order (e.g. before fitting)."""


class FingerprintMismatchError(ValueError):
    """Model and feature matrix were produced by different fitted transforms."""


class ModelFileError(ValueError):
    """Base class for unreadable model documents."""


class VersionMismatchError(ModelFileError):
    pass


class CorruptModelError(ModelFileError):
    pass
