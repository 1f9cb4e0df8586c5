"""NumPy implementation of the line kernels (used when the compiled module is absent)."""
from __future__ import annotations

import numpy as np

FREQ_SAMPLES = 33
FREQ_SAFETY = 1.2


def _bump(x, c, r0, r1):
    t = np.clip((np.abs(x - c) - r0) / (r1 - r0), 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    s = 1.0 - t
    b = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return 1.0 - a / (a + b)


def line_coefficients(base, axis, coefs, exps):
    """Univariate coefficients c[line, power] of the phase along each line."""
    L, d = base.shape
    deg = int(exps[:, axis].max()) if len(coefs) else 0
    out = np.zeros((L, deg + 1))
    others = [j for j in range(d) if j != axis]
    for c, e in zip(coefs, exps):
        term = np.full(L, c)
        for j in others:
            if e[j]:
                term = term * base[:, j] ** e[j]
        out[:, e[axis]] += term
    return out


def _horner(cs, x):
    v = np.zeros_like(x)
    for c in cs[::-1]:
        v = v * x + c
    return v


def poly_bump_lines(base, axis, a, b, coefs, exps, centers, inner, outer, omega,
                    ppw, min_panels, xr, wr):
    """Integrals over [a, b] along `axis` of exp(i omega p) * prod of bumps, one per base row.

    Returns (values, total node count).
    """
    base = np.ascontiguousarray(base, dtype=float)
    L, d = base.shape
    out = np.zeros(L, dtype=complex)
    nodes = 0
    lo = max(a, centers[axis] - outer[axis])
    hi = min(b, centers[axis] + outer[axis])
    if hi <= lo or L == 0:
        return out, 0
    fixed = np.ones(L)
    for j in range(d):
        if j != axis:
            fixed *= _bump(base[:, j], centers[j], inner[j], outer[j])
    C = line_coefficients(base, axis, coefs, exps)
    deg = C.shape[1] - 1
    dC = C[:, 1:] * np.arange(1, deg + 1) if deg > 0 else np.zeros((L, 1))
    xs = np.linspace(lo, hi, FREQ_SAMPLES)
    order = len(xr)
    for i in range(L):
        if fixed[i] == 0.0:
            continue
        fmax = np.max(np.abs(_horner(dC[i], xs))) * FREQ_SAFETY
        cycles = omega * fmax * (hi - lo) / (2 * np.pi)
        panels = max(min_panels, int(np.ceil(ppw * cycles)))
        h = (hi - lo) / panels
        mids = lo + h * (np.arange(panels) + 0.5)
        x = (mids[:, None] + 0.5 * h * xr[None, :]).ravel()
        w = np.tile(0.5 * h * wr, panels)
        ph = omega * _horner(C[i], x)
        amp = w * _bump(x, centers[axis], inner[axis], outer[axis])
        re = np.sum(amp * np.cos(ph))
        im = np.sum(amp * np.sin(ph))
        out[i] = fixed[i] * complex(re, im)
        nodes += panels * order
    return out, nodes
