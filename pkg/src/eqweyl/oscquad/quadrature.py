"""Brute-force oscillatory quadrature of I = int exp(i w psi(x)) a(x) dx.

w = mu in the large-parameter convention and w = 1/mu in the small-parameter one.

Strategy:
  * axes on which the phase does not depend ("passive") factor out exactly when the
    amplitude is a tensor product; otherwise they are integrated like any other axis;
  * the most oscillatory axis is integrated along lines with composite panels sized
    from the local phase derivative (panels per wavelength), the next one or two
    axes by adaptive Gauss-Legendre bisection;
  * beyond three remaining axes, the two most oscillatory axes keep the scheme above
    and the rest use a randomly shifted rank-1 (Korobov) lattice rule; the amplitude
    vanishes to all orders on the box boundary, so the lattice rule converges far
    faster than plain Monte Carlo there.
The whole computation runs at ppw and 2 ppw panels per wavelength; the difference
plus the adaptive estimates is the reported error.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import qmc

from ..functions import (
    BumpAmplitude,
    PolynomialPhase,
    amplitude_support,
    gauss_legendre,
    phase_gradient,
    plateau_bump,
    tanh_sinh_panels,
)
from . import backend as _backend

RULES = ("gauss_legendre_panels", "tanh_sinh")


class QuadratureError(RuntimeError):
    """Node budget exceeded, non-finite values, or error estimate above tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class _Budget(Exception):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    mu: float
    box: np.ndarray | None = None
    rule: str = "gauss_legendre_panels"
    panels_per_wavelength: int = 6
    convention: str = "large"
    order: int = 6
    min_panels: int = 16
    tolerance: float = 1e-7
    max_nodes: int = 10**9
    qmc_points: int = 256
    outer_order: int = 8
    outer_panels: int = 8
    seed: int = 0
    backend: str = "auto"
    richardson: bool = True

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}")
        if self.panels_per_wavelength < 6:
            raise ValueError("panels_per_wavelength must be at least 6")
        if self.convention not in ("large", "small"):
            raise ValueError("convention must be 'large' (exp(i mu psi)) or 'small' (exp(i psi/mu))")
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    @property
    def omega(self):
        return self.mu if self.convention == "large" else 1.0 / self.mu


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    nodes: int
    coarse: complex
    fine: complex
    tolerance: float
    backend: str
    method: str
    active_axes: tuple
    passive_axes: tuple
    passive_factor: float
    notes: tuple = field(default=())

    def as_json(self):
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "error": self.error,
            "nodes": self.nodes,
            "tolerance": self.tolerance,
            "method": self.method,
            "backend": self.backend,
        }


# ---------------------------------------------------------------- line integrals


class _Lines:
    """Integrals along one axis for a batch of base points, polynomial/bump or generic."""

    def __init__(self, phase, amp, box, omega, ppw, spec, counter):
        self.phase, self.amp, self.box, self.omega = phase, amp, box, omega
        self.ppw, self.spec, self.counter = ppw, spec, counter
        self.fast = isinstance(phase, PolynomialPhase) and isinstance(amp, BumpAmplitude)
        if spec.rule == "gauss_legendre_panels":
            self.xr, self.wr = gauss_legendre(spec.order)
        else:
            xr, wr = tanh_sinh_panels(-1.0, 1.0, 1, spec.order)
            self.xr, self.wr = xr, wr
        self.backend = _backend.resolve(spec.backend) if self.fast else "python"

    def __call__(self, base, axis):
        a, b = self.box[axis]
        if self.fast:
            vals, n = _backend.poly_bump_lines(
                base, axis, a, b, self.phase, self.amp, self.omega, self.ppw, self.spec.min_panels,
                self.xr, self.wr, self.backend,
            )
            self.counter.add(n)
            return vals * self.amp.scale
        return self._generic(base, axis, a, b)

    def _generic(self, base, axis, a, b):
        L = base.shape[0]
        out = np.zeros(L, dtype=complex)
        if L == 0:
            return out
        xs = np.linspace(a, b, 33)
        P = np.repeat(base[:, None, :], len(xs), axis=1)
        P[:, :, axis] = xs
        dpsi = np.abs(phase_gradient(self.phase, P)[..., axis]).max(axis=1) * 1.2
        cycles = self.omega * dpsi * (b - a) / (2 * np.pi)
        panels = np.maximum(self.spec.min_panels, np.ceil(self.ppw * cycles)).astype(np.int64)
        for npan in np.unique(panels):
            idx = np.nonzero(panels == npan)[0]
            h = (b - a) / npan
            mids = a + h * (np.arange(npan) + 0.5)
            x = (mids[:, None] + 0.5 * h * self.xr[None, :]).ravel()
            w = np.tile(0.5 * h * self.wr, npan)
            chunk = max(1, int(2_000_000 // max(len(x), 1)))
            for s in range(0, len(idx), chunk):
                sel = idx[s:s + chunk]
                X = np.repeat(base[sel][:, None, :], len(x), axis=1)
                X[:, :, axis] = x
                f = np.asarray(self.amp(X), dtype=float) * np.exp(1j * self.omega * np.asarray(self.phase(X)))
                out[sel] = f @ w
                self.counter.add(len(sel) * len(x))
        return out


class _Counter:
    def __init__(self, limit):
        self.n = 0
        self.limit = limit

    def add(self, k):
        self.n += int(k)
        if self.n > self.limit:
            raise _Budget()


def _pairwise_sum(vals):
    vals = list(vals)
    if not vals:
        return 0j
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _adaptive(F, a, b, tol, order, init_panels, max_depth=30):
    """Adaptive GL bisection of a vectorized complex function; returns (value, error estimate)."""
    x, w = gauss_legendre(order)

    def estimate(panels):
        if not panels:
            return []
        lo = np.array([p[0] for p in panels])
        hi = np.array([p[1] for p in panels])
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        vals = F(nodes).reshape(len(panels), order)
        return list((vals @ w) * half)

    edges = np.linspace(a, b, init_panels + 1)
    pending = [(edges[i], edges[i + 1], 0) for i in range(init_panels)]
    values = estimate([(p[0], p[1]) for p in pending])
    accepted = []
    err = 0.0
    width = b - a
    while pending:
        kids = []
        for (lo, hi, depth) in pending:
            m = 0.5 * (lo + hi)
            kids += [(lo, m), (m, hi)]
        kv = estimate(kids)
        nxt, nvals = [], []
        for i, (lo, hi, depth) in enumerate(pending):
            left, right = kv[2 * i], kv[2 * i + 1]
            diff = abs(values[i] - (left + right))
            local = tol * (hi - lo) / width
            if diff <= local or depth >= max_depth:
                accepted.append((lo, left + right))
                err += diff
            else:
                m = 0.5 * (lo + hi)
                nxt += [(lo, m, depth + 1), (m, hi, depth + 1)]
                nvals += [left, right]
        pending, values = nxt, nvals
    accepted.sort(key=lambda t: t[0])
    return _pairwise_sum(v for _, v in accepted), err


# ------------------------------------------------------------------- main driver


def _classify(phase, box, omega, seed):
    d = box.shape[0]
    sob = qmc.Sobol(d, scramble=True, seed=seed).random(256)
    P = box[:, 0] + sob * (box[:, 1] - box[:, 0])
    G = np.abs(phase_gradient(phase, P))
    mean = G.mean(axis=0)
    mx = G.max(axis=0)
    width = box[:, 1] - box[:, 0]
    passive = []
    for k in range(d):
        if isinstance(phase, PolynomialPhase):
            if not phase.depends_on(k):
                passive.append(k)
        elif omega * mx[k] * width[k] < 1e-6:
            passive.append(k)
    return mean, passive


class _Restricted:
    """Phase/amplitude on a subset of axes, other coordinates frozen."""

    def __init__(self, func, axes, full_point):
        self.func = func
        self.axes = list(axes)
        self.full = np.asarray(full_point, dtype=float)

    def _embed(self, X):
        X = np.asarray(X, dtype=float)
        Y = np.broadcast_to(self.full, X.shape[:-1] + self.full.shape).copy()
        Y[..., self.axes] = X
        return Y

    def __call__(self, X):
        return self.func(self._embed(X))

    def gradient(self, X):
        return phase_gradient(self.func, self._embed(X))[..., self.axes]


def _bump_factor_integral(amp: BumpAmplitude, k, lo, hi):
    c, r0, r1 = amp.centers[k], amp.inner[k], amp.outer[k]
    if lo <= c - r1 and hi >= c + r1:
        return float(r0 + r1)
    a, b = max(lo, c - r1), min(hi, c + r1)
    if b <= a:
        return 0.0
    val, _ = _adaptive(lambda x: plateau_bump(x, c, r0, r1).astype(complex), a, b, 1e-15, 16, 8)
    return float(val.real)


def integrate(phase, amplitude, spec: QuadratureSpec) -> QuadratureResult:
    """Direct quadrature of the oscillatory integral; see the module docstring."""
    support = amplitude_support(amplitude)
    box = support.copy() if spec.box is None else np.asarray(spec.box, dtype=float).copy()
    box[:, 0] = np.maximum(box[:, 0], support[:, 0])
    box[:, 1] = np.minimum(box[:, 1], support[:, 1])
    d = box.shape[0]
    omega = spec.omega
    if isinstance(amplitude, BumpAmplitude) and amplitude.scale == 0.0 or np.any(box[:, 1] <= box[:, 0]):
        return QuadratureResult(0j, 0.0, 0, 0j, 0j, spec.tolerance, "none", "zero", (), tuple(range(d)), 0.0)

    mean, passive = _classify(phase, box, omega, spec.seed)
    active = [k for k in range(d) if k not in passive]
    factor = 1.0
    sub_phase, sub_amp, sub_box = phase, amplitude, box
    notes = []
    separable = isinstance(amplitude, BumpAmplitude)
    if separable and passive:
        for k in passive:
            factor *= _bump_factor_integral(amplitude, k, *box[k])
        mid = box.mean(axis=1)
        if isinstance(phase, PolynomialPhase):
            sub_phase = phase.restrict(active)
        else:
            sub_phase = _Restricted(phase, active, mid)
        sub_amp = amplitude.restrict(active)
        sub_box = box[active]
        notes.append(f"factored passive axes {passive}")
    else:
        if passive:
            notes.append(f"phase-independent axes {passive} kept (amplitude not separable)")
        active = list(range(d))
        passive = []

    if isinstance(amplitude, BumpAmplitude):
        scale = amplitude.l1_norm()
    else:
        sob = qmc.Sobol(d, scramble=True, seed=spec.seed).random(1024)
        scale = float(np.mean(np.abs(amplitude(box[:, 0] + sob * (box[:, 1] - box[:, 0]))))) * float(
            np.prod(box[:, 1] - box[:, 0]))
    tol_abs = spec.tolerance * max(scale, 1e-300)

    if factor == 0.0:
        return QuadratureResult(0j, 0.0, 0, 0j, 0j, float(tol_abs), "none", "zero", tuple(active), tuple(passive), 0.0,
                                tuple(notes))
    if len(active) == 0:
        raise QuadratureError("phase independent of every axis; integral is not oscillatory")
    order_axes = [int(k) for k in np.argsort(-mean[active], kind="stable")]  # most oscillatory first

    counter = _Counter(spec.max_nodes)
    levels = []
    level_errs = []
    backend_used = "python"
    try:
        ppws = (spec.panels_per_wavelength, 2 * spec.panels_per_wavelength) if spec.richardson else (
            spec.panels_per_wavelength,)
        for ppw in ppws:
            lines = _Lines(sub_phase, sub_amp, sub_box, omega, ppw, spec, counter)
            backend_used = lines.backend
            val, aerr = _iterate(lines, sub_box, order_axes, tol_abs, spec)
            if not np.isfinite(val):
                raise QuadratureError("non-finite integrand values")
            levels.append(val * factor)
            level_errs.append(aerr * abs(factor))
    except _Budget:
        raise QuadratureError(f"node budget of {spec.max_nodes:.3g} exceeded") from None

    fine = levels[-1]
    coarse = levels[0]
    err = abs(fine - coarse) + level_errs[-1]
    method = "iterated" if len(order_axes) <= 3 else "iterated+qmc"
    res = QuadratureResult(complex(fine), float(err), counter.n, complex(coarse), complex(fine), float(tol_abs),
                           backend_used, method, tuple(int(a) for a in active),
                           tuple(int(p) for p in passive), float(factor), tuple(notes))
    if err > tol_abs and len(order_axes) <= 3:
        raise QuadratureError(f"estimated error {err:.3g} above tolerance {tol_abs:.3g}", res)
    if len(order_axes) > 3 and err > max(tol_abs, 1e-3 * abs(fine)):
        raise QuadratureError(f"estimated error {err:.3g} above tolerance", res)
    return res


def _iterate(lines: _Lines, box, order_axes, tol, spec):
    """Integrate over the active axes; order_axes lists axes from most to least oscillatory."""
    k = len(order_axes)
    inner = order_axes[0]
    d = box.shape[0]

    if k == 1:
        base = np.zeros((1, d))
        return complex(lines(base, inner)[0]), 0.0

    if k == 2:
        outer = order_axes[1]

        def F(ys, fixed=None):
            base = np.zeros((len(ys), d)) if fixed is None else np.repeat(fixed[None, :], len(ys), axis=0)
            base[:, outer] = ys
            return lines(base, inner)

        return _adaptive(F, box[outer, 0], box[outer, 1], tol, spec.outer_order, spec.outer_panels)

    if k == 3:
        mid_ax, out_ax = order_axes[1], order_axes[2]
        errs = [0.0]
        width = box[out_ax, 1] - box[out_ax, 0]

        def G(zs):
            vals = np.empty(len(zs), dtype=complex)
            for i, z in enumerate(zs):
                def F(ys, z=z):
                    base = np.zeros((len(ys), d))
                    base[:, mid_ax] = ys
                    base[:, out_ax] = z
                    return lines(base, inner)

                v, e = _adaptive(F, box[mid_ax, 0], box[mid_ax, 1], tol / width, spec.outer_order, spec.outer_panels)
                vals[i] = v
                errs[0] = max(errs[0], e * width)
            return vals

        val, e = _adaptive(G, box[out_ax, 0], box[out_ax, 1], tol, spec.outer_order, spec.outer_panels)
        return val, e + errs[0]

    # more than three axes: tensor scheme on the two most oscillatory, lattice rule on the rest
    outer = order_axes[1]
    rest = order_axes[2:]
    m = len(rest)
    reps = 4
    lattice = korobov_lattice(max(2, spec.qmc_points // reps), m)
    per = lattice.shape[0]
    shifts = np.random.default_rng(spec.seed).uniform(0, 1, (reps, m))
    vol = float(np.prod(box[rest, 1] - box[rest, 0]))
    means = []
    for r in range(reps):
        pts = np.mod(lattice + shifts[r], 1.0)
        R = box[rest, 0] + pts * (box[rest, 1] - box[rest, 0])
        acc = []
        for p in R:
            fixed = np.zeros(d)
            fixed[rest] = p

            def F(ys, fixed=fixed):
                base = np.repeat(fixed[None, :], len(ys), axis=0)
                base[:, outer] = ys
                return lines(base, inner)

            v, _ = _adaptive(F, box[outer, 0], box[outer, 1], tol / vol, spec.outer_order, spec.outer_panels)
            acc.append(v)
        means.append(_pairwise_sum(acc) / per * vol)
    means = np.array(means)
    val = complex(_pairwise_sum(list(means)) / reps)
    se = float(np.std(means, ddof=1) / np.sqrt(reps))
    return val, se


def _largest_prime_at_most(n):
    for k in range(max(n, 2), 1, -1):
        if all(k % d for d in range(2, int(k**0.5) + 1)):
            return k
    return 2


def korobov_lattice(n, dim):
    """Rank-1 lattice {k z / N mod 1}, N the largest prime <= n, z = (1, a, a^2, ...) mod N.

    The multiplier a minimizes the P_2 worst-case error for periodic integrands of
    smoothness 2 (exhaustive search; N is at most a few thousand here).
    """
    N = _largest_prime_at_most(int(n))
    k = np.arange(N)
    if dim == 1:
        return (k / N)[:, None]
    best, best_a = np.inf, 1
    for a in range(1, N):
        z = np.array([pow(a, j, N) for j in range(dim)])
        x = np.mod(np.outer(k, z), N) / N
        P = np.mean(np.prod(1 + 2 * np.pi**2 * (x * x - x + 1 / 6), axis=1)) - 1
        if P < best:
            best, best_a = P, a
    z = np.array([pow(best_a, j, N) for j in range(dim)])
    return np.mod(np.outer(k, z), N) / N


def with_mu(spec: QuadratureSpec, mu: float) -> QuadratureSpec:
    return replace(spec, mu=mu)
