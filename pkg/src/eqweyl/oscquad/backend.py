"""Kernel backend selection.

The compiled extension is used when importable; set EQWEYL_PURE_PYTHON=1 to force
the NumPy fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

COMPILED_AVAILABLE = _compiled is not None
DEFAULT = "compiled" if COMPILED_AVAILABLE and not os.environ.get("EQWEYL_PURE_PYTHON") else "python"


def resolve(name: str = "auto") -> str:
    if name == "auto":
        return DEFAULT
    if name == "compiled" and not COMPILED_AVAILABLE:
        raise RuntimeError("compiled kernels are not built")
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown backend {name!r}")
    return name


def poly_bump_lines(base, axis, a, b, phase, amp, omega, ppw, min_panels, xr, wr, backend="auto"):
    """Line integrals of exp(i omega phase) * bump amplitude (amplitude scale not applied)."""
    args = (
        np.ascontiguousarray(base, dtype=np.float64),
        int(axis),
        float(a),
        float(b),
        np.ascontiguousarray(phase.coefs, dtype=np.float64),
        np.ascontiguousarray(phase.exps, dtype=np.int64),
        np.ascontiguousarray(amp.centers, dtype=np.float64),
        np.ascontiguousarray(amp.inner, dtype=np.float64),
        np.ascontiguousarray(amp.outer, dtype=np.float64),
        float(omega),
        float(ppw),
        int(min_panels),
        np.ascontiguousarray(xr, dtype=np.float64),
        np.ascontiguousarray(wr, dtype=np.float64),
    )
    if resolve(backend) == "compiled":
        vals, nodes = _compiled.poly_bump_lines(*args)
        return np.asarray(vals), int(nodes)
    return _fallback.poly_bump_lines(*args)
