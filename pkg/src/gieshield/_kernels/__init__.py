"""Kernel selection: compiled core when importable, numpy fallback otherwise.

Set GIESHIELD_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import fallback

BACKEND = "python"
rk4_interaction = fallback.rk4_interaction
shield_decoherence = fallback.shield_decoherence

if not os.environ.get("GIESHIELD_PURE_PYTHON"):
    try:
        from . import _core
    except ImportError:  # extension not built
        _core = None
    if _core is not None:
        rk4_interaction = _core.rk4_interaction
        shield_decoherence = _core.shield_decoherence
        BACKEND = "cython"

__all__ = ["BACKEND", "rk4_interaction", "shield_decoherence", "fallback"]
