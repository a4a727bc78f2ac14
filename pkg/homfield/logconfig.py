"""
logconfig: root logger setup through tornado's logging options
"""

import logging

import tornado.log
import tornado.options

from . import errors

LEVELS = ("debug", "info", "warning", "error", "none")

_configured = False

def setup_logging(level="warning", logfile=None):
    """ Configure the root logger once; later calls only change the level.
    level "none" silences homfield logging.
    """
    global _configured
    level = (level or "warning").lower()
    if level not in LEVELS:
        raise errors.UsageError("Invalid log level '%s'; use one of %s" % (level, "/".join(LEVELS)))
    logger = logging.getLogger()
    if level == "none":
        logger.setLevel(logging.CRITICAL + 1)
        return logger
    if _configured:
        logger.setLevel(getattr(logging, level.upper()))
        return logger

    options = tornado.options.options
    options.logging = level
    if logfile:
        options.log_file_prefix = logfile
        options.log_to_stderr = False
    tornado.log.enable_pretty_logging(options=options, logger=logger)
    _configured = True
    return logger
