"""Run settings resolved from command-line flags and the environment.

Threads and verbosity: explicit flag, then the CVDYN_THREADS or CVDYN_VERBOSE
environment variable, then the built-in default. Samples and seed: explicit
flag, then the scenario file, then the built-in default. Environment values
arrive as strings and go through the same tolerant coercion helpers.
"""
import os
from typing import Mapping, Optional

ENV_THREADS = "CVDYN_THREADS"
ENV_VERBOSE = "CVDYN_VERBOSE"

DEFAULT_SAMPLES = 1000
DEFAULT_SEED = 0


def _to_bool(value, default: bool) -> bool:
    if value is None:
        return default
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def _to_int(value, default: int) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        return default


class AppSettings:
    def __init__(self, environ: Optional[Mapping[str, str]] = None):
        self._env = os.environ if environ is None else environ

    def threads(self, flag: Optional[int] = None) -> int:
        """Worker threads; 0 means auto."""
        if flag is not None:
            return max(0, _to_int(flag, 0))
        return max(0, _to_int(self._env.get(ENV_THREADS), 0))

    def samples(self, flag: Optional[int] = None, configured=None) -> int:
        if flag is not None:
            return _to_int(flag, DEFAULT_SAMPLES)
        return _to_int(configured, DEFAULT_SAMPLES)

    def seed(self, flag: Optional[int] = None, configured=None) -> int:
        if flag is not None:
            return _to_int(flag, DEFAULT_SEED)
        return _to_int(configured, DEFAULT_SEED)

    def verbose(self, flag: bool = False) -> bool:
        return flag or _to_bool(self._env.get(ENV_VERBOSE), False)
