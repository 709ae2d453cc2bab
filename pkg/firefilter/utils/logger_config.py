import logging
import sys
from typing import TextIO

PACKAGE = "firefilter"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logger(name: str = PACKAGE, level: int = logging.INFO, stream: TextIO = sys.stderr) -> logging.Logger:
    """Sends firefilter records at ``level`` and other libraries' warnings to one handler on ``stream``.

    Standard output is left to the CSV and JSON that ``score`` and ``calibrate`` print.
    """
    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(logging.WARNING)

    logging.getLogger(PACKAGE).setLevel(level)
    # module loggers inherit the package level and reach the handler through the root
    for logger_name in list(logging.root.manager.loggerDict):
        if logger_name.startswith(f"{PACKAGE}."):
            module_logger = logging.getLogger(logger_name)
            module_logger.handlers.clear()
            module_logger.setLevel(logging.NOTSET)
            module_logger.propagate = True

    return logging.getLogger(name)
