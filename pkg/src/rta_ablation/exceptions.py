# -*- coding: utf-8 -*-

# Imports #####################################################################

from typing import Optional

# Classes #####################################################################


class RtaAblationError(Exception):
    """Base class for every error raised by the rta_ablation package"""


class ConfigurationError(RtaAblationError, ValueError):
    """An experiment, filter or training configuration that cannot be run"""


class ConfigParseError(ConfigurationError):
    """
    A study config file that failed validation

    Parameters
    ----------
    message : str
        What is wrong with the file
    path : str
        The config file path
    line : int, optional
        1-based line number of the offending entry
    """

    def __init__(self, message: str, path: str = "<config>", line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {message}")


class InvariantViolation(RtaAblationError, RuntimeError):
    """A non-finite state or action reached a dynamics kernel"""


class TrainingAborted(RtaAblationError, RuntimeError):
    """
    A learner produced a non-finite loss

    Parameters
    ----------
    message : str
        Description of the failure
    diagnostics : dict, optional
        The loss values and update counters at the time of the failure
    """

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)
