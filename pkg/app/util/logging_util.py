"""Logging configuration for cvdyn.

Everything under the "cvdyn" logger goes to <out>/logs/cvdyn.log at DEBUG;
the console gets INFO, or DEBUG with --verbose.
"""
import logging
import os
from logging.handlers import RotatingFileHandler

LOG_FILE = "cvdyn.log"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def _same_file(handler: logging.Handler, log_file: str) -> bool:
    return (isinstance(handler, RotatingFileHandler)
            and os.path.abspath(handler.baseFilename) == os.path.abspath(log_file))


def setup_logging(log_dir: str, verbose: bool = False) -> logging.Logger:
    """Attach the file and console handlers; safe to call once per command run.

    A second call with another output directory moves the file handler there
    and updates the console level instead of stacking duplicate handlers.
    """
    os.makedirs(log_dir, exist_ok=True)
    log_file = os.path.join(log_dir, LOG_FILE)

    logger = logging.getLogger("cvdyn")
    logger.setLevel(logging.DEBUG)
    console_level = logging.DEBUG if verbose else logging.INFO
    fmt = logging.Formatter(LOG_FORMAT)

    keep_file = False
    for handler in list(logger.handlers):
        if isinstance(handler, RotatingFileHandler):
            if _same_file(handler, log_file):
                keep_file = True
                continue
            logger.removeHandler(handler)
            handler.close()
        elif isinstance(handler, logging.StreamHandler):
            handler.setLevel(console_level)

    if not keep_file:
        fh = RotatingFileHandler(log_file, maxBytes=5 * 1024 * 1024, backupCount=3, encoding="utf-8")
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(fmt)
        logger.addHandler(fh)

    if not any(type(h) is logging.StreamHandler for h in logger.handlers):
        ch = logging.StreamHandler()
        ch.setLevel(console_level)
        ch.setFormatter(fmt)
        logger.addHandler(ch)
    return logger
