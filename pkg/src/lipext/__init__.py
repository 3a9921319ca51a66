"""Constructive Lipschitz extension operators on finite metric spaces."""
from ._config import TOL
from .constructions import *  # noqa: F401,F403
from .constructions import __all__ as _constructions
from .extension import *  # noqa: F401,F403
from .extension import __all__ as _extension
from .free_space import *  # noqa: F401,F403
from .free_space import __all__ as _free_space
from .lipfn import *  # noqa: F401,F403
from .lipfn import __all__ as _lipfn
from .metric import *  # noqa: F401,F403
from .metric import __all__ as _metric
from .report import NoPriorRun, Row, RunReport, RunStore

__version__ = "0.1.0"

__all__ = ["TOL", "NoPriorRun", "Row", "RunReport", "RunStore",
           *_constructions, *_extension, *_free_space, *_lipfn, *_metric]
