"""Exception types shared across modules."""


class DataError(Exception):
    """Malformed or inconsistent input data (CLI exit code 2)."""


class PartialFailureError(Exception):
    """Too many per-pair jobs failed in a batch run (CLI exit code 3)."""
