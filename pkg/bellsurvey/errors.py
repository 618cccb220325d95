"""
Exceptions raised by the Bell survey package
"""


class BellSurveyError(Exception):
    """Base class for all package errors"""


class ValidationError(BellSurveyError, ValueError):
    """Malformed input: wrong shapes, non-normalized states, bad observables"""


class CapacityError(BellSurveyError):
    """Requested dimension exceeds the configured cap"""


class PreconditionError(BellSurveyError):
    """Bound query outside the region where the theorem applies"""


class ReportIOError(BellSurveyError, OSError):
    """Reading or writing a report/state file failed"""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")
