"""Selects the band-sum implementation: compiled extension when built,
numpy fallback otherwise.

Setting the environment variable ``SILT_NO_EXT=1`` forces the fallback
even when the extension is importable (it also skips building the
extension at install time; see ``setup.py``).  Both implementations
expose the same ``band_exp_sum`` signature and agree to floating-point
summation accuracy, so every public interface works identically either
way; ``backend_name()`` reports which one is active.
"""

from __future__ import annotations

import os

__all__ = ["band_exp_sum", "backend_name"]

_BACKEND = "python"
if os.environ.get("SILT_NO_EXT") != "1":
    try:
        from silt._pairsum import band_exp_sum as _impl

        _BACKEND = "compiled"
    except ImportError:
        pass
if _BACKEND == "python":
    from silt._fallback import band_exp_sum as _impl

band_exp_sum = _impl


def backend_name() -> str:
    """Name of the active band-sum backend: 'compiled' or 'python'."""
    return _BACKEND
