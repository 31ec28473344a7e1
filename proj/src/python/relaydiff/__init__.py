from ._relaydiff import *  # noqa: F401,F403
