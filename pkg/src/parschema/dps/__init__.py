"""Data processing specifications, partial recursive constructions and Petri nets."""
from .engine import *  # noqa: F401,F403
from .engine import __all__ as _engine_all

__all__ = list(_engine_all)
from .pr import *  # noqa: F401,F403
from .pr import __all__ as _pr_all

__all__ += list(_pr_all)
from .petri import *  # noqa: F401,F403
from .petri import __all__ as _petri_all

__all__ += list(_petri_all)
