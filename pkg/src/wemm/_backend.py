"""Select the compiled core when it is importable, else the numpy fallback.

Set ``WEMM_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pure

COMPILED = False
core = _pure

if not os.environ.get("WEMM_PURE_PYTHON"):
    try:
        from . import _core as core  # noqa: F811

        COMPILED = True
    except ImportError:
        core = _pure

RIDGE, AAR, AROWR, RLS = _pure.RIDGE, _pure.AAR, _pure.AROWR, _pure.RLS
