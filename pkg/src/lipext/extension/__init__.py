"""Linear extension operators."""
from .base import *  # noqa: F401,F403
from .base import __all__ as _base
from .certify import *  # noqa: F401,F403
from .certify import __all__ as _certify
from .glue import *  # noqa: F401,F403
from .glue import __all__ as _glue
from .l1 import *  # noqa: F401,F403
from .l1 import __all__ as _l1
from .nets import *  # noqa: F401,F403
from .nets import __all__ as _nets

__all__ = [*_base, *_certify, *_glue, *_l1, *_nets]
