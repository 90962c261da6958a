# Use Numba if available and not disabled. Otherwise fall back to plain numpy.
#
# Set BUDGREED_DISABLE_NUMBA=1 to force the numpy path (the flag is read once,
# at import time).

import logging
import os

logger = logging.getLogger(__name__)

_disabled = os.environ.get("BUDGREED_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

HAVE_NUMBA = False
if not _disabled:
    try:
        import numba

        njit = numba.njit
        prange = numba.prange
        HAVE_NUMBA = True
    except ImportError:
        logger.warning("numba not importable, falling back to numpy kernels")

if not HAVE_NUMBA:

    def njit(pyfunc=None, **kwargs):
        """Null decorator standing in for numba.njit."""
        def wrap(func):
            return func
        return wrap if pyfunc is None else wrap(pyfunc)

    prange = range


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
