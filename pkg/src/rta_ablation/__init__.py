# -*- coding: utf-8 -*-

from .exceptions import *
from .envs import *
from .safety import *
from .qp import *
from .rta import *
from .networks import *
from .agents import *
from .trainconfig import *
from .metrics import *
from .checkpoints import *
from .harness import *
from .config import *
from .utilities import *
from .study import *
from .tables import *
from .audit import *

__all__ = [
    "main_run_study",
    "parse_config",
    "make_env",
    "make_filter",
    "make_agent",
    "train",
    "render_tables",
    "export_curves",
    "filters_audit",
]
