"""Stationary phase on clean critical manifolds.

Large-parameter convention throughout:

    I(mu) = int exp(i mu psi) a  ~  (2 pi / mu)^{(N - p)/2} exp(i mu psi_0) Q_0,
    Q_0 = exp(i pi sigma / 4) int_C a / |det psi''|_{N C}|^{1/2} d sigma_C,

with N the ambient dimension and p = dim C.  The small-parameter form exp(i psi / s)
is the same statement with mu = 1/s.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .actions import LensAction, Sphere2Action, TorusAction, get_action
from .functions import (
    BumpAmplitude,
    CallableAmplitude,
    CallablePhase,
    PolynomialPhase,
    amplitude_support,
    fd_gradient,
    gauss_legendre,
    phase_gradient,
    phase_hessian,
    plateau_bump,
)
from .symplectic import EquivariantPhase

GRAD_TOL = 1e-8
EIG_TOL = 1e-10
MERGE_RADIUS = 1e-6


class CleanlinessViolation(ValueError):
    """Degenerate transversal Hessian, varying signature, or a non-critical 'critical' point."""

    def __init__(self, message, point=None):
        super().__init__(message if point is None else f"{message} at {np.round(np.asarray(point), 12).tolist()}")
        self.point = None if point is None else np.asarray(point, dtype=float)


@dataclass(frozen=True)
class CriticalManifold:
    """C as the image of a parameter box; `edges[k]` optionally fixes the panel edges of axis k."""

    dim: int
    box: np.ndarray
    param: Callable
    tangent: Callable | None = None
    edges: tuple | None = None
    step: float = 1e-6

    def frame(self, S):
        if self.tangent is not None:
            return self.tangent(S)
        S = np.asarray(S, dtype=float)
        cols = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = self.step
            cols.append((self.param(S + e) - self.param(S - e)) / (2 * self.step))
        return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class PhaseProblem:
    dim: int
    phase: object
    amplitude: object
    critical_manifold: CriticalManifold | None = None
    gradient_kind: str = "analytic"
    name: str = "problem"

    def __post_init__(self):
        box = amplitude_support(self.amplitude)
        if box.shape != (self.dim, 2) or not np.all(np.isfinite(box)):
            raise ValueError("amplitude support must be a finite box of the problem dimension")

    @property
    def box(self):
        return amplitude_support(self.amplitude)

    def gradient(self, X):
        return phase_gradient(self.phase, X)

    def hessian(self, X):
        return phase_hessian(self.phase, X)


@dataclass(frozen=True)
class TransversalHessian:
    det: float
    signature: int
    inverse_norm: float
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class StatPhaseResult:
    Q0: complex
    signature: int
    transversal_det_samples: np.ndarray
    order: Fraction
    psi0: float
    samples: int
    inverse_norm_max: float
    critical_points: np.ndarray | None = None
    error_model: str = ""

    def leading(self, mu, convention="large"):
        """Leading term of I(mu)."""
        w = mu if convention == "large" else 1.0 / mu
        return (2 * np.pi / w) ** float(self.order) * np.exp(1j * w * self.psi0) * self.Q0

    def as_json(self):
        return {
            "q0_re": float(self.Q0.real),
            "q0_im": float(self.Q0.imag),
            "signature": int(self.signature),
            "order": str(self.order),
            "psi0": float(self.psi0),
            "samples": int(self.samples),
            "inverse_norm_max": float(self.inverse_norm_max),
            "error_model": self.error_model,
        }


# --------------------------------------------------------------- transversal Hessian


def _normal_basis(T, N):
    """Orthonormal basis of the orthogonal complement of the columns of T (batched)."""
    if T is None or T.shape[-1] == 0:
        return np.broadcast_to(np.eye(N), (T.shape[:-2] if T is not None else ()) + (N, N))
    U, s, _ = np.linalg.svd(T, full_matrices=True)
    p = T.shape[-1]
    if np.any(s[..., -1] <= 1e-12 * np.maximum(s[..., 0], 1e-300)):
        raise ValueError("tangent frame is rank deficient")
    return U[..., :, p:]


def _restricted(H, T, N):
    B = _normal_basis(T, N)
    Hn = np.swapaxes(B, -1, -2) @ H @ B
    Hn = 0.5 * (Hn + np.swapaxes(Hn, -1, -2))
    return np.linalg.eigvalsh(Hn)


def transversal_hessian(problem: PhaseProblem, point, frame=None) -> TransversalHessian:
    """Hessian restricted to the orthogonal complement of `frame` (columns spanning T_m C)."""
    x = np.asarray(point, dtype=float)
    g = problem.gradient(x)
    if np.linalg.norm(g) >= GRAD_TOL:
        raise CleanlinessViolation(f"gradient norm {np.linalg.norm(g):.3g} is not below {GRAD_TOL}", x)
    N = problem.dim
    T = np.zeros((N, 0)) if frame is None else np.asarray(frame, dtype=float).reshape(N, -1)
    if T.shape[1] and np.linalg.matrix_rank(T, tol=1e-10) < T.shape[1]:
        raise ValueError("tangent frame is rank deficient")
    H = problem.hessian(x)
    ev = _restricted(H, T, N)
    if ev.size == 0:
        return TransversalHessian(1.0, 0, 0.0, ev)
    if np.min(np.abs(ev)) < EIG_TOL:
        raise CleanlinessViolation(f"degenerate transversal Hessian (eigenvalue {ev[np.argmin(np.abs(ev))]:.3g})", x)
    return TransversalHessian(float(np.prod(ev)), int(np.sum(ev > 0) - np.sum(ev < 0)),
                              float(1.0 / np.min(np.abs(ev))), ev)


# ------------------------------------------------------------------- Q0 integral


def _tensor_nodes(box, points, edges=None):
    xs, ws = gauss_legendre(points)
    axes_x, axes_w = [], []
    for k, (a, b) in enumerate(box):
        e = np.asarray(edges[k], dtype=float) if edges is not None and edges[k] is not None else np.array([a, b])
        h = np.diff(e)
        mid = 0.5 * (e[:-1] + e[1:])
        axes_x.append((mid[:, None] + 0.5 * h[:, None] * xs[None, :]).ravel())
        axes_w.append((0.5 * h[:, None] * ws[None, :]).ravel())
    if not axes_x:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*axes_x, indexing="ij")
    wgrids = np.meshgrid(*axes_w, indexing="ij")
    S = np.stack([g.ravel() for g in grids], axis=-1)
    W = np.prod(np.stack([w.ravel() for w in wgrids], axis=-1), axis=-1)
    return S, W


def _pairwise(v):
    v = np.asarray(v)
    while v.shape[0] > 1:
        if v.shape[0] % 2:
            v = np.concatenate([v, np.zeros((1,) + v.shape[1:], dtype=v.dtype)])
        v = v[0::2] + v[1::2]
    return v[0] if v.shape[0] else 0.0


def _manifold_q0(problem: PhaseProblem, points, chunk=4096):
    cm = problem.critical_manifold
    S, W = _tensor_nodes(np.asarray(cm.box, dtype=float), points, cm.edges)
    N, p = problem.dim, cm.dim
    total = []
    dets, sigs, psis, inv = [], [], [], 0.0
    for s in range(0, len(S), chunk):
        Sc, Wc = S[s:s + chunk], W[s:s + chunk]
        P = cm.param(Sc)
        T = cm.frame(Sc)
        G = problem.gradient(P)
        gn = np.linalg.norm(G, axis=-1)
        if np.any(gn >= GRAD_TOL):
            i = int(np.argmax(gn))
            raise CleanlinessViolation(f"parametrized point is not critical (|grad| = {gn[i]:.3g})", P[i])
        area = np.sqrt(np.abs(np.linalg.det(np.swapaxes(T, -1, -2) @ T)))
        ev = _restricted(problem.hessian(P), T, N)
        small = np.min(np.abs(ev), axis=-1)
        if np.any(small < EIG_TOL):
            i = int(np.argmin(small))
            raise CleanlinessViolation("degenerate transversal Hessian", P[i])
        inv = max(inv, float(np.max(1.0 / small)))
        det = np.prod(ev, axis=-1)
        dets.append(det)
        sigs.append(np.sum(ev > 0, axis=-1) - np.sum(ev < 0, axis=-1))
        psis.append(np.asarray(problem.phase(P), dtype=float))
        a = np.asarray(problem.amplitude(P), dtype=float)
        total.append(Wc * a * area / np.sqrt(np.abs(det)))
    sig = np.concatenate(sigs)
    if np.any(sig != sig[0]):
        i = int(np.nonzero(sig != sig[0])[0][0])
        raise CleanlinessViolation("signature varies along the critical manifold", cm.param(S[i:i + 1])[0])
    psi = np.concatenate(psis)
    if np.ptp(psi) > 1e-8 * max(1.0, np.max(np.abs(psi))):
        raise CleanlinessViolation("phase is not constant on the critical manifold")
    val = float(_pairwise(np.concatenate(total)))
    sigma = int(sig[0])
    return StatPhaseResult(
        complex(np.exp(1j * np.pi * sigma / 4) * val), sigma, np.concatenate(dets), Fraction(N - p, 2),
        float(psi[0]), len(S), inv, None,
        f"leading order only; Gauss-Legendre {points} points per parameter axis",
    )


def find_critical_points(problem: PhaseProblem, grid=16, iterations=80, max_starts=65536):
    """Multistart damped Newton on the gradient from a grid^dim lattice in the support box."""
    box = problem.box
    N = problem.dim
    if grid**N <= max_starts:
        axes = [np.linspace(a, b, grid + 2)[1:-1] for a, b in box]
        X = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    else:
        X = box[:, 0] + qmc.Sobol(N, scramble=False).random(max_starts) * (box[:, 1] - box[:, 0])
    g = problem.gradient(X)
    gn = np.linalg.norm(g, axis=-1)
    for _ in range(iterations):
        H = problem.hessian(X) + 1e-14 * np.eye(N)
        try:
            step = np.linalg.solve(H, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = (np.linalg.pinv(H) @ g[..., None])[..., 0]
        alpha = np.ones(len(X))
        for _ in range(12):
            Y = X - alpha[:, None] * step
            gy = problem.gradient(Y)
            gny = np.linalg.norm(gy, axis=-1)
            bad = ~(gny < gn) & (gn > 0)
            if not np.any(bad):
                break
            alpha = np.where(bad, alpha / 2, alpha)
        better = gny < gn
        X = np.where(better[:, None], Y, X)
        g = np.where(better[:, None], gy, g)
        gn = np.where(better, gny, gn)
        if np.all(gn < 1e-13):
            break
    inside = np.all((X >= box[:, 0]) & (X <= box[:, 1]), axis=-1)
    X = X[(gn < GRAD_TOL) & inside]
    order = np.lexsort(X.T[::-1]) if len(X) else np.array([], dtype=int)
    found = []
    for x in X[order]:
        if not any(np.linalg.norm(x - y) < MERGE_RADIUS for y in found):
            found.append(x)
    return np.array(found).reshape(-1, N)


def q0(problem: PhaseProblem, points: int = 32, grid: int = 16) -> StatPhaseResult:
    """Leading stationary-phase coefficient Q0 (see the module docstring for the convention)."""
    if problem.critical_manifold is not None:
        if problem.critical_manifold.dim == 0:
            raise ValueError("use critical_manifold=None for isolated critical points")
        return _manifold_q0(problem, points)
    pts = find_critical_points(problem, grid)
    N = problem.dim
    if len(pts) == 0:
        return StatPhaseResult(0j, 0, np.zeros(0), Fraction(N, 2), 0.0, 0, 0.0, pts,
                               "no critical point in the support: I(mu) = O(mu^-inf)")
    infos = [transversal_hessian(problem, x) for x in pts]
    amps = np.asarray(problem.amplitude(pts), dtype=float)
    live = amps != 0
    sigs = {t.signature for t, l in zip(infos, live) if l}
    if len(sigs) > 1:
        raise CleanlinessViolation(f"signature varies between critical points {sorted(sigs)}")
    psis = np.asarray(problem.phase(pts), dtype=float)[live]
    if psis.size and np.ptp(psis) > 1e-8 * max(1.0, np.max(np.abs(psis))):
        raise CleanlinessViolation("critical values differ; split the amplitude per critical point")
    sigma = sigs.pop() if sigs else infos[0].signature
    val = sum(a / np.sqrt(abs(t.det)) for a, t in zip(amps, infos))
    return StatPhaseResult(
        complex(np.exp(1j * np.pi * sigma / 4) * val), sigma, np.array([t.det for t in infos]), Fraction(N, 2),
        float(psis[0]) if psis.size else 0.0, len(pts), max(t.inverse_norm for t in infos), pts,
        "leading order only; isolated critical points by multistart Newton",
    )


# ----------------------------------------------------------- equivariant phases


def polynomial_equivariant_phase(phi: EquivariantPhase) -> PolynomialPhase:
    """Exact polynomial form of a torus equivariant phase: -sum_k g_k xi_k."""
    spec = phi.spec
    if not isinstance(spec, TorusAction):
        raise TypeError("only torus actions have a polynomial equivariant phase")
    n, d = spec.dim_M, spec.dim_G
    terms = {}
    for k in range(d):
        e = [0] * (2 * n + d)
        e[n + k] = 1
        e[2 * n + k] = 1
        terms[tuple(e)] = -1.0
    return PolynomialPhase.from_terms(terms, 2 * n + d, name=f"{spec.key}-phase")


def singular_distance(spec, S):
    """Distance (in the critical-manifold parameter) to the singular stratum, or None if empty."""
    if isinstance(spec, Sphere2Action):
        return S[..., 0]
    if isinstance(spec, LensAction):
        return np.minimum(S[..., 0], np.pi / 2 - S[..., 0])
    return None


def _graded_edges(lo, hi, eps, both_ends=False, panels=4):
    """Panel edges refined geometrically toward lo (and hi) so that the cutoff ramp [eps, 2 eps] is resolved."""
    width = hi - lo
    inner = [eps * 2.0**j for j in range(0, 64) if eps * 2.0**j < (width / 2 if both_ends else width)]
    left = [lo] + [lo + t for t in inner]
    if both_ends:
        mid = np.linspace(left[-1], hi - inner[-1], panels + 1)[1:-1].tolist() if inner else []
        right = [hi - t for t in inner[::-1]] + [hi]
        e = left + mid + right
    else:
        e = left + np.linspace(left[-1], hi, panels + 1)[1:].tolist()
    return np.unique(np.array(e))


def equivariant_problem(phi: EquivariantPhase, amplitude, eps=None) -> PhaseProblem:
    """PhaseProblem for Phi(x, xi, g) with the regular critical set parametrized by (x, eta), xi = F(x) eta.

    F is an orthonormal frame of the annihilator of the orbit directions; g sits at the identity.
    With eps given, the amplitude is multiplied by 1 - u_eps, u_eps = 1 within eps of the
    singular stratum and 0 beyond 2 eps.
    """
    spec = phi.spec
    n, d = spec.dim_M, spec.dim_G
    N = 2 * n + d
    box = amplitude_support(amplitude)
    if box.shape[0] != N:
        raise ValueError(f"amplitude must live on (x, xi, g), dimension {N}")
    if np.any(box[2 * n:, 0] > 0) or np.any(box[2 * n:, 1] < 0):
        raise ValueError("amplitude support must contain g = identity")
    ch = spec.chart(phi.chart)
    R = float(np.sqrt(np.sum(np.max(np.abs(box[n:2 * n]), axis=1) ** 2)))

    if isinstance(spec, TorusAction):
        lo = np.maximum(box[:n, 0], ch.lower)
        hi = np.minimum(box[:n, 1], ch.upper)
        xbox = np.stack([lo, hi], axis=1)
        ebox = box[n + d:2 * n]

        def to_x(S):
            return S[..., :n]

        def frame(x):
            return spec.annihilator_frame(x, phi.chart)
    elif isinstance(spec, Sphere2Action):
        corners = np.array(np.meshgrid(*box[:2])).reshape(2, -1).T
        rmax = float(np.max(np.linalg.norm(corners, axis=1)))
        xbox = np.array([[0.0, min(rmax, ch.radius)], [0.0, 2 * np.pi]])
        ebox = np.array([[-R, R]])

        def to_x(S):
            return np.stack([S[..., 0] * np.cos(S[..., 1]), S[..., 0] * np.sin(S[..., 1])], axis=-1)

        def frame(x):
            r = np.linalg.norm(x, axis=-1, keepdims=True)
            return (x / np.where(r > 0, r, 1.0))[..., :, None]
    elif isinstance(spec, LensAction):
        lo = np.maximum(box[:n, 0], ch.lower)
        hi = np.minimum(box[:n, 1], ch.upper)
        xbox = np.stack([lo, hi], axis=1)
        ebox = np.array([[-R, R]] * (n - d))

        def to_x(S):
            return S[..., :n]

        def frame(x):
            F = spec.annihilator_frame(x, phi.chart)
            Q, _ = np.linalg.qr(F)
            return Q
    else:
        raise TypeError("not a catalog action")

    pbox = np.concatenate([xbox, ebox])
    p = 2 * n - d

    def param(S):
        S = np.asarray(S, dtype=float)
        x = to_x(S)
        xi = np.einsum("...ij,...j->...i", frame(x), S[..., xbox.shape[0]:])
        g = np.zeros(S.shape[:-1] + (d,))
        return np.concatenate([x, xi, g], axis=-1)

    edges = None
    if isinstance(spec, TorusAction) and isinstance(amplitude, BumpAmplitude):
        axes = list(range(n)) + list(range(n + d, 2 * n))
        edges = tuple(_bump_edges(amplitude, k, *pbox[i]) for i, k in enumerate(axes))
    amp = amplitude
    if eps is not None:
        dist0 = singular_distance(spec, np.zeros((1, p)))
        if dist0 is not None:
            both = isinstance(spec, LensAction)
            edges = (_graded_edges(pbox[0, 0], pbox[0, 1], eps, both),) + (None,) * (p - 1)
            inv = _inverse_param(spec, phi.chart)

            def cut(X, amplitude=amplitude):
                s = inv(X)
                return np.asarray(amplitude(X)) * (1.0 - plateau_bump(singular_distance(spec, s), 0.0, eps, 2 * eps))

            amp = CallableAmplitude(cut, box)

    tangent = None
    if isinstance(spec, TorusAction):
        T0 = np.zeros((N, p))
        T0[:n, :n] = np.eye(n)
        T0[n:2 * n, n:] = spec.annihilator_frame(np.zeros(n), phi.chart)

        def tangent(S):
            return np.broadcast_to(T0, np.shape(S)[:-1] + T0.shape)

    cm = CriticalManifold(p, pbox, param, tangent, edges)
    fphase = CallablePhase(phi.packed, N, phi.packed_gradient, None, f"{spec.key}-phase", phi.step)
    return PhaseProblem(N, fphase, amp, cm, "analytic" if phi.analytic else "finite-difference", spec.key)


def _bump_edges(amp: BumpAmplitude, k, lo, hi):
    c, r0, r1 = amp.centers[k], amp.inner[k], amp.outer[k]
    pts = [lo, hi] + [t for t in (c - r1, c - r0, c + r0, c + r1) if lo < t < hi]
    return np.unique(np.array(pts))


def _inverse_param(spec, chart):
    n = spec.dim_M
    if isinstance(spec, Sphere2Action):
        return lambda X: np.linalg.norm(X[..., :2], axis=-1, keepdims=True)
    return lambda X: X[..., :n]


@dataclass(frozen=True)
class L0Result:
    value: complex
    eps: np.ndarray
    sequence: np.ndarray
    cauchy: bool
    singular_stratum: bool
    result: StatPhaseResult = field(repr=False, default=None)

    def as_json(self):
        return {
            "l0_re": float(self.value.real),
            "l0_im": float(self.value.imag),
            "eps": [float(e) for e in self.eps],
            "sequence_re": [float(v.real) for v in self.sequence],
            "sequence_im": [float(v.imag) for v in self.sequence],
            "cauchy": bool(self.cauchy),
            "singular_stratum": bool(self.singular_stratum),
        }


def l0_equivariant(phi: EquivariantPhase, amplitude, points: int = 32, eps0: float = 0.1,
                   halvings: int = 6) -> L0Result:
    """Regular-part integral L0 = int_{Reg C} a / |det Phi''|_N|^{1/2}, with eps-cutoffs near Sing C.

    For actions with a singular stratum the values for eps0, eps0/2, ... are returned;
    `cauchy` is False when successive differences stop decreasing.
    """
    spec = phi.spec
    has_sing = singular_distance(spec, np.zeros((1, 2 * spec.dim_M - spec.dim_G))) is not None
    if not has_sing:
        r = q0(equivariant_problem(phi, amplitude), points)
        return L0Result(r.Q0, np.zeros(0), np.array([r.Q0]), True, False, r)
    eps = eps0 * 0.5 ** np.arange(halvings)
    seq, last = [], None
    for e in eps:
        last = q0(equivariant_problem(phi, amplitude, float(e)), points)
        seq.append(last.Q0)
    seq = np.array(seq)
    diffs = np.abs(np.diff(seq))
    scale = max(np.max(np.abs(seq)), 1e-300)
    cauchy = bool(np.all((diffs[1:] <= diffs[:-1] * 1.05) | (diffs[1:] < 1e-12 * scale))) if len(diffs) > 1 else True
    return L0Result(complex(seq[-1]), eps, seq, cauchy, True, last)


def torus_product_amplitude(spec: TorusAction, inner=0.5, outer=1.0, x_center=np.pi):
    """b(x) c(xi) d(g): plateau bumps centered at x = (pi, ..., pi), xi = 0, g = 0."""
    n, d = spec.dim_M, spec.dim_G
    centers = np.concatenate([np.full(n, x_center), np.zeros(n + d)])
    return BumpAmplitude(centers, inner, outer)


def torus_l0_closed_form(spec: TorusAction, amp: BumpAmplitude):
    """d(0) * prod_x int b * prod_{annihilated} c(0, .) for the product bump (|det| = 1 per circle factor)."""
    n, d = spec.dim_M, spec.dim_G
    val = amp.scale
    for k in range(n):
        val *= amp.axis_integral(k)
    for k in range(n, n + d):
        val *= float(amp.factor(k, np.array(0.0)))
    for k in range(n + d, 2 * n):
        val *= amp.axis_integral(k)
    for k in range(2 * n, 2 * n + d):
        val *= float(amp.factor(k, np.array(0.0)))
    return val


# ---------------------------------------------------------------- built-ins

BUILTINS = ("fresnel", "fresnel2d", "saddle", "xy2", "torus-L0")


def builtin_problem(name: str, inner=0.5, outer=1.0, scale=1.0, action="torus2-rot1"):
    """Named model problems; 'xy2' is deliberately not clean."""
    if name == "fresnel":
        return PhaseProblem(1, PolynomialPhase.from_terms({(2,): 0.5}, name="x^2/2"),
                            BumpAmplitude.uniform(1, inner, outer, scale=scale), None, "analytic", name)
    if name == "fresnel2d":
        ph = PolynomialPhase.from_terms({(2, 0): 0.5}, name="x^2/2")
        cm = CriticalManifold(1, np.array([[-outer, outer]]),
                              lambda S: np.concatenate([np.zeros(S.shape[:-1] + (1,)), S], axis=-1),
                              lambda S: np.broadcast_to(np.array([[0.0], [1.0]]), S.shape[:-1] + (2, 1)),
                              (np.array([-outer, -inner, inner, outer]),))
        return PhaseProblem(2, ph, BumpAmplitude.uniform(2, inner, outer, scale=scale), cm, "analytic", name)
    if name == "saddle":
        return PhaseProblem(2, PolynomialPhase.from_terms({(2, 0): 1.0, (0, 2): -1.0}, name="x^2-y^2"),
                            BumpAmplitude.uniform(2, inner, outer, scale=scale), None, "analytic", name)
    if name == "xy2":
        return PhaseProblem(2, PolynomialPhase.from_terms({(2, 2): 1.0}, name="(xy)^2"),
                            BumpAmplitude.uniform(2, inner, outer, scale=scale), None, "analytic", name)
    if name == "torus-L0":
        spec = get_action(action)
        if not isinstance(spec, TorusAction):
            raise ValueError("torus-L0 needs a torus action")
        phi = EquivariantPhase(spec)
        amp = torus_product_amplitude(spec, inner, outer)
        amp = BumpAmplitude(amp.centers, amp.inner, amp.outer, scale)
        prob = equivariant_problem(phi, amp)
        return PhaseProblem(prob.dim, polynomial_equivariant_phase(phi), amp, prob.critical_manifold, "analytic", name)
    raise ValueError(f"unknown built-in phase {name!r}; choose from {', '.join(BUILTINS)}")


def load_problem(path):
    """INI file: [phase] builtin = <name>, action = <key>; [amplitude] inner, outer, scale."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    return problem_from_config(cp)


def problem_from_config(cp: configparser.ConfigParser):
    if not cp.has_section("phase"):
        raise ValueError("config needs a [phase] section")
    name = cp.get("phase", "builtin")
    action = cp.get("phase", "action", fallback="torus2-rot1")
    amp = cp["amplitude"] if cp.has_section("amplitude") else {}
    return builtin_problem(name, float(amp.get("inner", 0.5)), float(amp.get("outer", 1.0)),
                           float(amp.get("scale", 1.0)), action)


def gradient_consistency(problem: PhaseProblem, count=200, seed=0, step=1e-6):
    """Max relative gap between the analytic gradient and central differences on random points."""
    rng = np.random.default_rng(seed)
    box = problem.box
    X = rng.uniform(box[:, 0], box[:, 1], size=(count, problem.dim))
    ga = problem.gradient(X)
    gf = fd_gradient(problem.phase, X, step)
    return float(np.max(np.linalg.norm(ga - gf, axis=-1) / np.maximum(np.linalg.norm(gf, axis=-1), 1.0)))
