"""Phase and amplitude primitives shared by the quadrature and asymptotics code.

Amplitudes are built from the plateau bump

    b(x) = 1 - s((|x - c| - r0) / (r1 - r0)),   s(t) = f(t) / (f(t) + f(1 - t)),

with f(t) = exp(-1/t) for t > 0.  b is C-infinity, equal to 1 on |x - c| <= r0 and
to 0 on |x - c| >= r1, and integrates to r0 + r1 over the real line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np


def _f(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a = _f(t)
    b = _f(1.0 - t)
    return a / (a + b)


def plateau_bump(x, center=0.0, inner=0.5, outer=1.0):
    x = np.asarray(x, dtype=float)
    return 1.0 - smooth_step((np.abs(x - center) - inner) / (outer - inner))


@lru_cache(maxsize=64)
def gauss_legendre(order: int):
    """Nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_panels(a: float, b: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights on [a, b] with equal panels."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def tanh_sinh_panels(a: float, b: float, panels: int, order: int):
    """Composite tanh-sinh rule; `order` nodes per panel (odd counts include the midpoint)."""
    m = max(order, 3)
    h = 6.0 / (m - 1)
    k = np.arange(m) - (m - 1) / 2.0
    t = k * h
    u = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(u)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    w = w * (2.0 / w.sum())  # exact on constants
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


# --------------------------------------------------------------------------- phases


@dataclass(frozen=True)
class PolynomialPhase:
    """Real polynomial psi(x) = sum_m c_m x^{e_m} in `dim` variables."""

    coefs: np.ndarray
    exps: np.ndarray
    name: str = "poly"

    def __post_init__(self):
        c = np.ascontiguousarray(self.coefs, dtype=float).reshape(-1)
        e = np.ascontiguousarray(self.exps, dtype=np.int64)
        if e.ndim != 2 or e.shape[0] != c.shape[0]:
            raise ValueError("exps must have shape (terms, dim)")
        if (e < 0).any():
            raise ValueError("negative exponents")
        object.__setattr__(self, "coefs", c)
        object.__setattr__(self, "exps", e)

    @classmethod
    def from_terms(cls, terms: dict, dim: int | None = None, name: str = "poly"):
        keys = list(terms)
        dim = dim if dim is not None else len(keys[0])
        exps = np.array([tuple(k) for k in keys], dtype=np.int64).reshape(len(keys), dim)
        coefs = np.array([terms[k] for k in keys], dtype=float)
        return cls(coefs, exps, name)

    @property
    def dim(self) -> int:
        return self.exps.shape[1]

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self.coefs) else 0

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[:-1])
        for c, e in zip(self.coefs, self.exps):
            out = out + c * np.prod(X ** e, axis=-1)
        return out

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape)
        for c, e in zip(self.coefs, self.exps):
            for k in range(self.dim):
                if e[k] == 0:
                    continue
                ek = e.copy()
                ek[k] -= 1
                out[..., k] += c * e[k] * np.prod(X ** ek, axis=-1)
        return out

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        d = self.dim
        out = np.zeros(X.shape + (d,))
        for c, e in zip(self.coefs, self.exps):
            for i in range(d):
                for j in range(d):
                    ee = e.copy()
                    f = ee[i]
                    ee[i] -= 1
                    if f == 0:
                        continue
                    g = ee[j]
                    ee[j] -= 1
                    if g == 0:
                        continue
                    out[..., i, j] += c * f * g * np.prod(X ** ee, axis=-1)
        return out

    def depends_on(self, axis: int) -> bool:
        return bool(np.any((self.exps[:, axis] > 0) & (self.coefs != 0)))

    def __neg__(self):
        return PolynomialPhase(-self.coefs, self.exps, "-" + self.name)

    def restrict(self, axes: Sequence[int]) -> "PolynomialPhase":
        """Drop variables the phase does not depend on."""
        axes = list(axes)
        dropped = [k for k in range(self.dim) if k not in axes]
        if any(self.depends_on(k) for k in dropped):
            raise ValueError("phase depends on a dropped axis")
        return PolynomialPhase(self.coefs, self.exps[:, axes], self.name)

    def compose_monomial(self, E: np.ndarray) -> "PolynomialPhase":
        """Pull back through the monomial map x_i = prod_j y_j^{E_ij}."""
        E = np.asarray(E, dtype=np.int64)
        return PolynomialPhase(self.coefs, self.exps @ E, self.name)

    def divide_monomial(self, power: np.ndarray) -> "PolynomialPhase":
        power = np.asarray(power, dtype=np.int64)
        live = self.coefs != 0
        if np.any(self.exps[live] < power):
            raise ValueError("monomial does not divide the polynomial")
        return PolynomialPhase(self.coefs, self.exps - power, self.name)

    def as_dict(self):
        return {tuple(int(v) for v in e): float(c) for c, e in zip(self.coefs, self.exps)}


# ----------------------------------------------------------------------- amplitudes


@dataclass(frozen=True)
class BumpAmplitude:
    """Tensor product of plateau bumps, scaled by `scale`."""

    centers: np.ndarray
    inner: np.ndarray
    outer: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        c = np.ascontiguousarray(self.centers, dtype=float).reshape(-1)
        r0 = np.broadcast_to(np.asarray(self.inner, dtype=float), c.shape).copy()
        r1 = np.broadcast_to(np.asarray(self.outer, dtype=float), c.shape).copy()
        if np.any(r0 < 0) or np.any(r1 <= r0):
            raise ValueError("need 0 <= inner < outer")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "inner", r0)
        object.__setattr__(self, "outer", r1)

    @classmethod
    def uniform(cls, dim, inner=0.5, outer=1.0, center=0.0, scale=1.0):
        return cls(np.full(dim, center, dtype=float), inner, outer, scale)

    @property
    def dim(self):
        return self.centers.shape[0]

    @property
    def support(self):
        return np.stack([self.centers - self.outer, self.centers + self.outer], axis=1)

    def factor(self, axis, x):
        return plateau_bump(x, self.centers[axis], self.inner[axis], self.outer[axis])

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        out = np.full(X.shape[:-1], self.scale)
        for k in range(self.dim):
            out = out * self.factor(k, X[..., k])
        return out

    def restrict(self, axes):
        axes = list(axes)
        return BumpAmplitude(self.centers[axes], self.inner[axes], self.outer[axes], self.scale)

    def axis_integral(self, axis):
        # exact: the smooth step satisfies s(t) + s(1 - t) = 1
        return float(self.inner[axis] + self.outer[axis])

    def l1_norm(self):
        return abs(self.scale) * float(np.prod(self.inner + self.outer))


@dataclass(frozen=True)
class CallableAmplitude:
    """Generic amplitude: a vectorized callable plus its support box."""

    func: Callable
    support: np.ndarray
    separable: bool = False
    factors: tuple = field(default=())

    def __call__(self, X):
        return np.asarray(self.func(np.asarray(X, dtype=float)), dtype=float)

    @property
    def dim(self):
        return np.asarray(self.support).shape[0]


@dataclass(frozen=True)
class CallablePhase:
    """Generic real phase with optional analytic derivatives (finite differences otherwise)."""

    func: Callable
    dim: int
    grad: Callable | None = None
    hess: Callable | None = None
    name: str = "phase"
    step: float = 1e-6

    def __call__(self, X):
        return np.asarray(self.func(np.asarray(X, dtype=float)), dtype=float)

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(X), dtype=float)
        return fd_gradient(self.func, X, self.step)

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        if self.hess is not None:
            return np.asarray(self.hess(X), dtype=float)
        return fd_hessian(self.func, X, 1e-4)

    def __neg__(self):
        f, g, h = self.func, self.grad, self.hess
        return CallablePhase(
            lambda X: -f(X),
            self.dim,
            None if g is None else (lambda X: -g(X)),
            None if h is None else (lambda X: -h(X)),
            "-" + self.name,
            self.step,
        )


def fd_gradient(func, X, step=1e-6):
    X = np.asarray(X, dtype=float)
    d = X.shape[-1]
    out = np.empty(X.shape)
    for k in range(d):
        e = np.zeros(d)
        e[k] = step
        out[..., k] = (func(X + e) - func(X - e)) / (2 * step)
    return out


def fd_hessian(func, X, step=1e-4):
    X = np.asarray(X, dtype=float)
    d = X.shape[-1]
    out = np.empty(X.shape + (d,))
    f0 = func(X)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = step
        out[..., i, i] = (func(X + ei) - 2 * f0 + func(X - ei)) / step**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = step
            v = (
                func(X + ei + ej) - func(X + ei - ej) - func(X - ei + ej) + func(X - ei - ej)
            ) / (4 * step**2)
            out[..., i, j] = v
            out[..., j, i] = v
    return out


def phase_gradient(phase, X):
    if hasattr(phase, "gradient"):
        return phase.gradient(X)
    return fd_gradient(phase, X)


def phase_hessian(phase, X):
    if hasattr(phase, "hessian"):
        return phase.hessian(X)
    return fd_hessian(phase, X)


def amplitude_support(amplitude):
    return np.asarray(amplitude.support, dtype=float)
