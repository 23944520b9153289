"""Exception hierarchy shared by every module."""


class CoarseError(Exception):
    """Base class for all library errors."""


class KindMismatchError(CoarseError, TypeError):
    """A pseudometric was applied to a point of the wrong ground set."""


class BudgetExceededError(CoarseError):
    """An enumeration would exceed the configured pair-evaluation budget."""

    def __init__(self, requested: int, used: int, limit: int, what: str = ""):
        self.requested = requested
        self.used = used
        self.limit = limit
        self.what = what
        msg = f"enumeration budget exceeded: {used} used + {requested} requested > {limit}"
        if what:
            msg += f" ({what})"
        super().__init__(msg)


class WindowRequiredError(CoarseError, ValueError):
    """Composition membership was queried without a middle-point window."""


class CertificateError(CoarseError, ValueError):
    """A certificate failed verification where a verified one was required."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class SpecError(CoarseError, ValueError):
    """A spec document failed to parse or validate.

    ``location`` is a JSON path or a ``line:col`` string.
    """

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
