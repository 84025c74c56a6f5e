"""Exception hierarchy shared by every ecstore module."""


class ECStoreError(Exception):
    """Base class for all expected ecstore failures."""


class ConfigError(ECStoreError, ValueError):
    pass


class FormatError(ECStoreError, ValueError):
    """A chunk header, chunk filename or catalogue document is malformed."""


class InsufficientSharesError(ECStoreError):
    pass


class AlreadyExistsError(ECStoreError):
    pass


class NotFoundError(ECStoreError, KeyError):
    def __str__(self):
        # KeyError repr-quotes its argument; keep messages readable.
        return str(self.args[0]) if self.args else ""


class CorruptionError(ECStoreError):
    pass


class NoAlternativeError(ECStoreError):
    pass


class TransferFailed(ECStoreError):
    """A single endpoint operation failed (simulated outage or IO error)."""


class UploadFailed(ECStoreError):
    def __init__(self, message, failed_chunks=(), report=None):
        super().__init__(message)
        self.failed_chunks = sorted(failed_chunks)
        self.report = report


class DownloadFailed(ECStoreError):
    def __init__(self, message, failed_chunks=(), report=None):
        super().__init__(message)
        self.failed_chunks = sorted(failed_chunks)
        self.report = report


class ModelError(ECStoreError, ValueError):
    pass
