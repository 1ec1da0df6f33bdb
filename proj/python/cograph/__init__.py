from ._cograph import *  # noqa: F401,F403
from ._cograph import __doc__  # noqa: F401
