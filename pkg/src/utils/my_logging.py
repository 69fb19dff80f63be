"""
Dual logging setup: a console handler on stdout/stderr and an optional log file, with colourised levels
The root logger is configured so modules can log with the plain logging.info(...) calls
"""
import logging
import sys
from typing import Optional

DEFAULT_LINE_TEMPLATE = "%(color_on)s[%(created)d] [%(threadName)s] [%(levelname)-8s] %(message)s%(color_off)s"


class LogFormatter(logging.Formatter):
    COLOR_CODES = {
        logging.CRITICAL: "\033[1;35m",  # bright/bold magenta
        logging.ERROR: "\033[1;31m",  # bright/bold red
        logging.WARNING: "\033[1;33m",  # bright/bold yellow
        logging.INFO: "\033[0;37m",  # white / light grey
        logging.DEBUG: "\033[0;36m",  # cyan
    }

    RESET_CODE = "\033[0m"

    def __init__(self, color, *args, **kwargs):
        super(LogFormatter, self).__init__(*args, **kwargs)
        self.color = color

    def format(self, record, *args, **kwargs):
        if self.color and record.levelno in self.COLOR_CODES:
            record.color_on = self.COLOR_CODES[record.levelno]
            record.color_off = self.RESET_CODE
        else:
            record.color_on = ""
            record.color_off = ""
        return super(LogFormatter, self).format(record, *args, **kwargs)


def setup_logging(console_log_output: str = "stderr", console_log_level: str = "info", console_log_color: bool = True,
                  logfile_file: Optional[str] = None, logfile_log_level: str = "debug",
                  logfile_log_color: bool = False, log_line_template: str = DEFAULT_LINE_TEMPLATE) -> bool:
    """
    stdout carries event output in the CLI, so the console handler defaults to stderr
    Handlers installed by an earlier call are replaced
    :return: False if any part of the setup failed
    """
    logger = logging.getLogger()
    # Root at debug so that the handler levels decide
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        if isinstance(handler.formatter, LogFormatter):
            logger.removeHandler(handler)
            handler.close()

    console_log_output = console_log_output.lower()
    if console_log_output == "stdout":
        stream = sys.stdout
    elif console_log_output == "stderr":
        stream = sys.stderr
    else:
        print("Failed to set console output: invalid output: '%s'" % console_log_output, file=sys.stderr)
        return False
    console_handler = logging.StreamHandler(stream)
    try:
        console_handler.setLevel(console_log_level.upper())
    except ValueError:
        print("Failed to set console log level: invalid level: '%s'" % console_log_level, file=sys.stderr)
        return False
    console_handler.setFormatter(LogFormatter(fmt=log_line_template, color=console_log_color))
    logger.addHandler(console_handler)

    if logfile_file is None:
        return True
    try:
        logfile_handler = logging.FileHandler(logfile_file)
    except OSError as exception:
        print("Failed to set up log file: %s" % str(exception), file=sys.stderr)
        return False
    try:
        logfile_handler.setLevel(logfile_log_level.upper())
    except ValueError:
        print("Failed to set log file log level: invalid level: '%s'" % logfile_log_level, file=sys.stderr)
        return False
    logfile_handler.setFormatter(LogFormatter(fmt=log_line_template, color=logfile_log_color))
    logger.addHandler(logfile_handler)
    return True
