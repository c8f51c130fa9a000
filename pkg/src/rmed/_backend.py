"""Select the compiled simulation kernel when it was built, else fall back to Python.

Set ``RMED_PURE_PYTHON=1`` to force the fallback.
"""
import os

core = None
if not os.environ.get("RMED_PURE_PYTHON"):
    try:
        from . import _core as core
    except ImportError:
        core = None

HAVE_CORE = core is not None
