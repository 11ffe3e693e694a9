"""Error categories for cvdyn.

Library code raises these; only app.main turns them into exit codes.
"""
from typing import Optional


class CvdynError(Exception):
    exit_code = 1


class InvalidArgument(CvdynError, ValueError):
    exit_code = 2


class ConfigError(InvalidArgument):
    """Scenario file problem; the message starts with the offending field."""
    exit_code = 2


class InvalidScenario(CvdynError, ValueError):
    exit_code = 2


class InvalidState(CvdynError, ValueError):
    """Covariance matrix violates the uncertainty principle."""
    exit_code = 3


class NumericError(CvdynError, ArithmeticError):
    exit_code = 3

    def __init__(self, message: str, time_s: Optional[float] = None):
        if time_s is not None:
            message = f"{message} (t = {time_s:.6g} s)"
        super().__init__(message)
        self.time_s = time_s


class ValidationFailure(CvdynError):
    exit_code = 4

    def __init__(self, failed: list[str]):
        super().__init__("validation failed: " + ", ".join(failed))
        self.failed = list(failed)
