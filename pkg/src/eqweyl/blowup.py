"""Monoidal transformations in coordinate charts, weak transforms, quadratic substitutions,
and leading asymptotics of singular oscillatory integrals through a blow-up atlas.

Every chart map here is monomial, x_i = prod_j y_j^{E_ij}, so composition is integer
matrix multiplication and the Jacobian is det(E) * y^{colsum(E) - 1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .functions import (
    BumpAmplitude,
    CallableAmplitude,
    CallablePhase,
    PolynomialPhase,
    phase_gradient,
    phase_hessian,
    smooth_step,
)
from .oscquad.fit import AsymptoticFit
from .statphase import CleanlinessViolation, PhaseProblem, builtin_problem, q0

DIVIDED_STEP = 1e-4
GRAD_TOL = 1e-8


class OrderError(ValueError):
    """The phase does not vanish on the center to the declared order."""


class NotResolved(RuntimeError):
    """A chart of the atlas still carries a non-clean weak phase."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)




@dataclass(frozen=True)
class BlowupChart:
    """Chart rho of the blow-up of R^dim along {x_c = 0, c in center}: x_c = y_c y_rho (c != rho)."""

    dim: int
    center: tuple
    rho: int

    def __post_init__(self):
        c = tuple(sorted(int(a) for a in self.center))
        if len(c) < 1 or len(set(c)) != len(c) or c[0] < 0 or c[-1] >= self.dim:
            raise ValueError("center must be a non-empty set of coordinate axes")
        if self.rho not in c:
            raise ValueError("chart index must be one of the center axes")
        object.__setattr__(self, "center", c)

    @property
    def codim(self):
        return len(self.center)

    @property
    def jacobian_exponent(self):
        return self.codim - 1

    @property
    def matrix(self):
        E = np.eye(self.dim, dtype=np.int64)
        for c in self.center:
            if c != self.rho:
                E[c, self.rho] = 1
        return E

    def map(self, Y):
        Y = np.asarray(Y, dtype=float)
        X = Y.copy()
        for c in self.center:
            if c != self.rho:
                X[..., c] = Y[..., c] * Y[..., self.rho]
        return X

    def inverse(self, X):
        X = np.asarray(X, dtype=float)
        Y = X.copy()
        for c in self.center:
            if c != self.rho:
                Y[..., c] = X[..., c] / X[..., self.rho]
        return Y

    def jacobian(self, Y):
        return np.abs(np.asarray(Y, dtype=float)[..., self.rho]) ** self.jacobian_exponent

    def on_exceptional(self, Y, tol=0.0):
        return np.abs(np.asarray(Y)[..., self.rho]) <= tol

    def roundtrip_error(self, Y):
        Y = np.asarray(Y, dtype=float)
        ok = ~self.on_exceptional(Y)
        return float(np.max(np.abs(self.inverse(self.map(Y[ok])) - Y[ok]), initial=0.0))


def chain_matrix(charts):
    E = np.eye(charts[0].dim, dtype=np.int64) if charts else None
    for ch in charts:
        E = E @ ch.matrix
    return E


class _WeakCallable:
    """Phi^wk = Phi^tot / y^L with a removable-singularity extension on the divisor."""

    def __init__(self, total, power, step=DIVIDED_STEP):
        self.total = total
        self.power = np.asarray(power, dtype=np.int64)
        self.step = step

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float)
        out = np.asarray(self.total(Y), dtype=float).copy()
        den = np.prod(np.where(self.power > 0, Y, 1.0) ** self.power, axis=-1)
        zero = den == 0
        out[~zero] = out[~zero] / den[~zero]
        if np.any(zero):
            out[zero] = self._extend(Y[zero])
        return out

    def _extend(self, Y):
        # order-m central divided difference in each divisor variable that vanishes
        vals = np.empty(Y.shape[:-1])
        for idx in np.ndindex(*Y.shape[:-1]):
            y = Y[idx]
            axes = [j for j in range(len(y)) if self.power[j] > 0 and y[j] == 0]
            f = self.total
            fixed = [j for j in range(len(y)) if self.power[j] > 0 and y[j] != 0]
            scale = np.prod([y[j] ** self.power[j] for j in fixed]) if fixed else 1.0
            vals[idx] = _divided(f, y, axes, self.power, self.step) / scale
        return vals


def _divided(f, y, axes, power, h):
    """prod_j (1/m_j!) d^{m_j}/dy_j^{m_j} f at y, by central differences (O(h^2))."""
    if not axes:
        return float(f(y[None, :])[0])
    j, rest = axes[0], axes[1:]
    m = int(power[j])
    acc = 0.0
    for k in range(m + 1):
        yk = y.copy()
        yk[j] = (m / 2 - k) * h
        acc += (-1) ** k * math.comb(m, k) * _divided(f, yk, rest, power, h)
    return acc / (h**m * math.factorial(m))


@dataclass
class TransformedPhase:
    base: PhaseProblem
    charts: tuple
    exponents: np.ndarray          # l_j: power of y_j in the exceptional factor
    total: object
    weak: object
    jacobian_powers: np.ndarray    # |det D Z| = prod |y_j|^{J_j}
    parameter_axes: tuple = ()     # the sigma variables (exceptional coordinates)
    name: str = "transformed"

    @property
    def dim(self):
        return self.base.dim

    @property
    def matrix(self):
        return chain_matrix(self.charts) if self.charts else np.eye(self.dim, dtype=np.int64)

    def map(self, Y):
        X = np.asarray(Y, dtype=float)
        for ch in reversed(self.charts):
            X = ch.map(X)
        return X

    def exceptional_factor(self, Y):
        Y = np.asarray(Y, dtype=float)
        return np.prod(np.where(self.exponents > 0, Y, 1.0) ** self.exponents, axis=-1)

    def jacobian(self, Y):
        Y = np.asarray(Y, dtype=float)
        return np.prod(np.abs(np.where(self.jacobian_powers > 0, Y, 1.0)) ** self.jacobian_powers, axis=-1)

    def factorization_error(self, Y):
        """max relative |Phi(Z(y)) - y^L Phi^wk(y)| over samples off the divisor."""
        Y = np.asarray(Y, dtype=float)
        off = self.exceptional_factor(Y) != 0
        Y = Y[off]
        lhs = np.asarray(self.base.phase(self.map(Y)), dtype=float)
        rhs = self.exceptional_factor(Y) * np.asarray(self.weak(Y), dtype=float)
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        scale = np.where(scale > 0, scale, 1.0)
        return float(np.max(np.abs(lhs - rhs) / scale, initial=0.0))


def vanishing_order(phase, center, dim):
    """Exact order of vanishing on the coordinate center for polynomial phases."""
    if not isinstance(phase, PolynomialPhase):
        raise TypeError("exact order only for polynomial phases")
    live = phase.coefs != 0
    if not np.any(live):
        return np.inf
    return int(np.min(phase.exps[live][:, list(center)].sum(axis=1)))


def _sampled_order_check(phase, center, dim, m, seed=0, box=None):
    """|psi| <= C dist^m: the quotient must not blow up as points approach the center."""
    rng = np.random.default_rng(seed)
    lo = -np.ones(dim) if box is None else box[:, 0]
    hi = np.ones(dim) if box is None else box[:, 1]
    P = rng.uniform(lo, hi, size=(64, dim))
    D = rng.normal(size=(64, len(center)))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    ratios = []
    for r in (1e-1, 1e-2, 1e-3):
        Q = P.copy()
        Q[:, list(center)] = r * D
        ratios.append(np.max(np.abs(phase(Q))) / r**m)
    if not np.isfinite(ratios[-1]) or ratios[-1] > 10 * max(ratios[0], 1e-300) and ratios[-1] > 1e-8:
        raise OrderError(f"phase does not vanish to order {m} on the center (quotients {np.round(ratios, 6)})")


def blow_up(problem: PhaseProblem, center, rho, order=None, prior: TransformedPhase | None = None) -> TransformedPhase:
    """One monoidal transformation with coordinate center, optionally on top of `prior`.

    order = None uses the exact vanishing order (polynomial phases) or requires an explicit value.
    """
    chart = BlowupChart(problem.dim, tuple(center), int(rho))
    base_total = problem.phase if prior is None else prior.weak
    if isinstance(base_total, PolynomialPhase):
        m_exact = vanishing_order(base_total, chart.center, problem.dim)
        m = m_exact if order is None else int(order)
        if m < 1 or m > m_exact:
            raise OrderError(f"phase vanishes to order {m_exact} on the center, declared {m}")
        E = chart.matrix
        total = base_total.compose_monomial(E)
        power = np.zeros(problem.dim, dtype=np.int64)
        power[chart.rho] = m
        weak = total.divide_monomial(power)
    else:
        if order is None:
            raise OrderError("declare the vanishing order for non-polynomial phases")
        m = int(order)
        if m < 1:
            raise OrderError("order must be at least 1")
        _sampled_order_check(base_total, chart.center, problem.dim, m, box=problem.box)
        power = np.zeros(problem.dim, dtype=np.int64)
        power[chart.rho] = m

        def tot(Y, f=base_total):
            return f(chart.map(Y))

        total = CallablePhase(tot, problem.dim, name="total")
        weak = CallablePhase(_WeakCallable(total, power), problem.dim, name="weak")
    # exceptional exponents and Jacobian accumulate through the chain: y' = map(y)
    if prior is None:
        exps = power
        jac = np.zeros(problem.dim, dtype=np.int64)
        jac[chart.rho] = chart.jacobian_exponent
        charts = (chart,)
        params = (chart.rho,)
    else:
        E = chart.matrix
        exps = prior.exponents @ E + power
        jac = prior.jacobian_powers @ E
        jac[chart.rho] += chart.jacobian_exponent
        charts = prior.charts + (chart,)
        params = tuple(sorted(set(prior.parameter_axes) | {chart.rho}))
    return TransformedPhase(problem, charts, np.asarray(exps, dtype=np.int64), total, weak,
                            np.asarray(jac, dtype=np.int64), params, f"{problem.name}/chart{rho}")


def identity_transform(problem: PhaseProblem) -> TransformedPhase:
    """Empty chain: the phase is its own weak transform (no exceptional divisor)."""
    z = np.zeros(problem.dim, dtype=np.int64)
    return TransformedPhase(problem, (), z, problem.phase, problem.phase, z.copy(), (), f"{problem.name}/identity")


# ------------------------------------------------------------ quadratic substitution


@dataclass(frozen=True)
class QuadraticSubstitution:
    """tau = delta(sigma): sigma -> sigma_1 (1, sigma_2, ..., sigma_N) -> sigma'_2 (sigma'_1, 1, ...) -> ..."""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")

    def step_matrix(self, j):
        E = np.eye(self.N, dtype=np.int64)
        E[:, j] = 1
        return E

    @property
    def matrix(self):
        """tau_i = prod_k sigma_k^{E_ik}."""
        E = np.eye(self.N, dtype=np.int64)
        for j in range(self.N):
            E = self.step_matrix(j) @ E
        return E

    def __call__(self, S):
        S = np.asarray(S, dtype=float)
        T = S.copy()
        for j in range(self.N):
            lead = T[..., j].copy()
            T = T * lead[..., None]
            T[..., j] = lead
        return T

    @property
    def jacobian_exponents(self):
        return self.matrix.sum(axis=0) - 1

    @property
    def jacobian_constant(self):
        return int(round(np.linalg.det(self.matrix)))

    def jacobian(self, S):
        S = np.asarray(S, dtype=float)
        return self.jacobian_constant * np.prod(S ** self.jacobian_exponents, axis=-1)

    def product_exponents(self):
        """tau_1 ... tau_N = sigma^{colsum of E}."""
        return self.matrix.sum(axis=0)

    def pullback_monomial_integral(self, a):
        """int over delta([0,1]^N) of tau^a d tau, via the change of variables (exact)."""
        a = np.asarray(a, dtype=np.int64)
        e = a @ self.matrix + self.jacobian_exponents
        return Fraction(abs(self.jacobian_constant), int(np.prod(e + 1)))


# ------------------------------------------------------------ cleanliness scan


@dataclass(frozen=True)
class CleanlinessModel:
    """A weak phase with its predicted critical set (w.r.t. the fiber variables)."""

    name: str
    transformed: TransformedPhase
    fiber_axes: tuple
    box: np.ndarray
    sample_critical: object        # (rng, count, on_divisor) -> points
    tangent: object                # points -> (count, fiber, p) frame of Crit within the fiber space
    distance: object               # points -> distance to the predicted set
    codim: int


@dataclass(frozen=True)
class CleanlinessReport:
    model: str
    codim: int
    samples: int
    divisor_samples: int
    min_singular_value: float
    max_gradient_on_set: float
    min_gradient_off_set: float
    violations: tuple
    divisor_dets: np.ndarray = field(repr=False, default=None)

    @property
    def clean(self):
        return not self.violations

    def as_json(self):
        return {
            "model": self.model,
            "codim": self.codim,
            "samples": self.samples,
            "divisor_samples": self.divisor_samples,
            "min_singular_value": self.min_singular_value,
            "max_gradient_on_set": self.max_gradient_on_set,
            "min_gradient_off_set": self.min_gradient_off_set,
            "violations": [list(v) for v in self.violations],
            "clean": self.clean,
        }


def _fiber_derivatives(phase, P, fiber):
    G = phase_gradient(phase, P)[..., list(fiber)]
    H = phase_hessian(phase, P)[..., list(fiber), :][..., list(fiber)]
    return G, H


def weak_phase_cleanliness(model: CleanlinessModel, samples=1000, seed=0, divisor_fraction=0.25,
                           off_samples=1000, off_distance=0.05, margin=0.1) -> CleanlinessReport:
    """Sample Crit(Phi^wk_sigma) including divisor points and check (a) gradient, (b) transversal rank."""
    rng = np.random.default_rng(seed)
    weak = model.transformed.weak
    n_div = int(round(samples * divisor_fraction)) if model.transformed.parameter_axes else 0
    P = np.concatenate([model.sample_critical(rng, samples - n_div, False),
                        model.sample_critical(rng, n_div, True)]) if n_div else model.sample_critical(rng, samples, False)
    fiber = model.fiber_axes
    violations = []
    G, H = _fiber_derivatives(weak, P, fiber)
    gn = np.linalg.norm(G, axis=-1)
    for i in np.nonzero(gn >= GRAD_TOL)[0][:20]:
        violations.append(("gradient", float(gn[i]), [float(v) for v in P[i]]))
    T = model.tangent(P)
    if T.shape[-1]:
        U, _, _ = np.linalg.svd(T, full_matrices=True)
        B = U[..., :, T.shape[-1]:]
    else:
        B = np.broadcast_to(np.eye(len(fiber)), P.shape[:-1] + (len(fiber), len(fiber)))
    Hn = np.swapaxes(B, -1, -2) @ H @ B
    sv = np.linalg.svd(Hn, compute_uv=False)
    if Hn.shape[-1] != model.codim:
        violations.append(("codimension", float(Hn.shape[-1]), []))
    smin = sv[..., -1]
    for i in np.nonzero(smin < margin)[0][:20]:
        violations.append(("transversal", float(smin[i]), [float(v) for v in P[i]]))
    dets = np.linalg.det(Hn[-n_div:]) if n_div else np.zeros(0)
    # (a) converse: Newton in the fiber variables (sigma frozen) from random starts must
    # only land on the predicted set
    box = model.box
    Q0 = rng.uniform(box[:, 0], box[:, 1], size=(off_samples, box.shape[0]))
    far0 = model.distance(Q0) > off_distance
    gf = np.linalg.norm(phase_gradient(weak, Q0[far0])[..., list(fiber)], axis=-1)
    Q, gq = _fiber_newton(weak, Q0, fiber)
    inside = np.all((Q >= box[:, 0]) & (Q <= box[:, 1]), axis=-1)
    stray = inside & (gq < GRAD_TOL) & (model.distance(Q) > off_distance)
    for i in np.nonzero(stray)[0][:20]:
        violations.append(("unexpected-critical", float(gq[i]), [float(v) for v in Q[i]]))
    return CleanlinessReport(model.name, model.codim, len(P), n_div, float(np.min(smin)), float(np.max(gn)),
                             float(np.min(gf)) if len(gf) else float("inf"), tuple(violations), dets)


def _fiber_newton(phase, X, fiber, iterations=40):
    """Damped Newton on the fiber gradient; returns end points and their gradient norms."""
    X = np.array(X, dtype=float)
    fib = list(fiber)
    g = phase_gradient(phase, X)[..., fib]
    gn = np.linalg.norm(g, axis=-1)
    for _ in range(iterations):
        H = phase_hessian(phase, X)[..., fib, :][..., fib] + 1e-14 * np.eye(len(fib))
        step = (np.linalg.pinv(H) @ g[..., None])[..., 0]
        alpha = np.ones(len(X))
        for _ in range(10):
            Y = X.copy()
            Y[:, fib] -= alpha[:, None] * step
            gy = phase_gradient(phase, Y)[..., fib]
            gny = np.linalg.norm(gy, axis=-1)
            bad = ~(gny < gn) & (gn > 0)
            if not np.any(bad):
                break
            alpha = np.where(bad, alpha / 2, alpha)
        better = gny < gn
        X = np.where(better[:, None], Y, X)
        g = np.where(better[:, None], gy, g)
        gn = np.where(better, gny, gn)
    return X, gn


def _axis_sampler(box, fixed):
    """Uniform samples in box with some axes pinned by callables of the sample."""

    def sample(rng, count, on_divisor, divisor_axes=()):
        P = rng.uniform(box[:, 0], box[:, 1], size=(count, box.shape[0]))
        if on_divisor:
            P[:, list(divisor_axes)] = 0.0
        for axis, f in fixed:
            P[:, axis] = f(P)
        return P

    return sample


def cleanliness_model(name: str, chart: int = 0) -> CleanlinessModel:
    """Built-in models: 'xy2', 'xy2_perturbed', 'torus', 's2_pole'."""
    if name in ("xy2", "xy2_perturbed"):
        terms = {(2, 2): 1.0}
        if name == "xy2_perturbed":
            terms[(5, 0)] = 1.0
        prob = PhaseProblem(2, PolynomialPhase.from_terms(terms, name=name), BumpAmplitude.uniform(2), None,
                            "analytic", name)
        tp = blow_up(prob, (0, 1), chart)
        fiber = (1 - chart,)
        box = np.array([[-1.0, 1.0], [-1.5, 1.5]]) if chart == 0 else np.array([[-1.5, 1.5], [-1.0, 1.0]])
        base = _axis_sampler(box, [(fiber[0], lambda P: np.zeros(len(P)))])

        def sample(rng, count, on_divisor):
            return base(rng, count, on_divisor, (chart,))

        return CleanlinessModel(
            f"{name}/chart{chart}", tp, fiber, box, sample,
            lambda P: np.zeros(P.shape[:-1] + (1, 0)),
            lambda P: np.abs(P[..., fiber[0]]), 1,
        )
    if name == "torus":
        from .actions import get_action
        from .statphase import polynomial_equivariant_phase, torus_product_amplitude
        from .symplectic import EquivariantPhase

        spec = get_action("torus2-rot1")
        phi = EquivariantPhase(spec)
        amp = torus_product_amplitude(spec)
        prob = PhaseProblem(5, polynomial_equivariant_phase(phi), amp, None, "analytic", "torus2-rot1")
        # the critical set sits on theta = 0, the isotropy divisor: theta plays the role of sigma
        tp = replace(identity_transform(prob), parameter_axes=(4,))
        box = np.array(amp.support)
        base = _axis_sampler(box, [(2, lambda P: np.zeros(len(P))), (4, lambda P: np.zeros(len(P)))])
        T0 = np.zeros((5, 3))
        T0[0, 0] = T0[1, 1] = T0[3, 2] = 1.0
        return CleanlinessModel(
            "torus2-rot1", tp, tuple(range(5)), box, lambda rng, c, d: base(rng, c, d),
            lambda P: np.broadcast_to(T0, P.shape[:-1] + T0.shape),
            lambda P: np.hypot(P[..., 2], P[..., 4]), 2,
        )
    if name == "s2_pole":
        return _s2_pole_model()
    raise ValueError(f"unknown cleanliness model {name!r}")


def _s2_pole_phase():
    """Rotation of the plane about the pole, blown up at the pole in the chart u = tau (1, w).

    Variables (tau, w, xi1, xi2, theta); Phi = tau * <(1, w) - R_theta (1, w), xi>.
    """

    def weak(Y):
        Y = np.asarray(Y, dtype=float)
        w, x1, x2, th = Y[..., 1], Y[..., 2], Y[..., 3], Y[..., 4]
        c, s = np.cos(th), np.sin(th)
        v1 = 1.0 - (c - s * w)
        v2 = w - (s + c * w)
        return v1 * x1 + v2 * x2

    def total(Y):
        return np.asarray(Y)[..., 0] * weak(Y)

    return total, weak


def _s2_pole_model():
    total, weak = _s2_pole_phase()
    box = np.array([[-1.0, 1.0], [-1.5, 1.5], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]])
    prob = PhaseProblem(5, CallablePhase(lambda X: _rotation_phase(X), 5, name="s2-rot@pole"),
                        BumpAmplitude(np.zeros(5), 0.5, 1.0), None, "finite-difference", "s2_pole")
    chart = BlowupChart(5, (0, 1), 0)
    exps = np.array([1, 0, 0, 0, 0], dtype=np.int64)
    tp = TransformedPhase(prob, (chart,), exps, CallablePhase(total, 5, name="total"),
                          CallablePhase(weak, 5, name="weak"), np.array([1, 0, 0, 0, 0], dtype=np.int64), (0,),
                          "s2_pole/chart0")

    def sample(rng, count, on_divisor):
        P = rng.uniform(box[:, 0], box[:, 1], size=(count, 5))
        if on_divisor:
            P[:, 0] = 0.0
        P[:, 4] = 0.0
        P[:, 3] = P[:, 1] * P[:, 2]      # xi annihilates the orbit direction J(1, w) = (-w, 1)
        keep = np.abs(P[:, 3]) <= 1.0
        while not np.all(keep):
            bad = ~keep
            P[bad, 2] = rng.uniform(-1, 1, bad.sum()) / np.maximum(1.0, np.abs(P[bad, 1]))
            P[bad, 3] = P[bad, 1] * P[bad, 2]
            keep = np.abs(P[:, 3]) <= 1.0
        return P

    def tangent(P):
        # fiber coordinates (w, xi1, xi2, theta); Crit = {theta = 0, xi2 = w xi1}
        w, x1 = P[..., 1], P[..., 2]
        T = np.zeros(P.shape[:-1] + (4, 2))
        T[..., 0, 0] = 1.0
        T[..., 2, 0] = x1
        T[..., 1, 1] = 1.0
        T[..., 2, 1] = w
        return T

    def distance(P):
        return np.hypot(P[..., 4], (P[..., 3] - P[..., 1] * P[..., 2]) / np.sqrt(1 + P[..., 1] ** 2))

    return CleanlinessModel("s2_pole", tp, (1, 2, 3, 4), box, sample, tangent, distance, 2)


def _rotation_phase(X):
    """<u - R_theta u, xi> on (u1, u2, xi1, xi2, theta)."""
    X = np.asarray(X, dtype=float)
    u1, u2, x1, x2, th = (X[..., k] for k in range(5))
    c, s = np.cos(th), np.sin(th)
    return (u1 - (c * u1 - s * u2)) * x1 + (u2 - (s * u1 + c * u2)) * x2


# -------------------------------------------------------------- singular asymptotics


def angular_partition(r, overlap=0.2):
    """chi_rho on R^r minus 0, homogeneous of degree 0, summing to 1; chi_rho vanishes near {x_rho = 0}."""
    a = 1.0 / np.sqrt(r) - overlap - 0.05

    def weights(D):
        D = np.asarray(D, dtype=float)
        ratio = np.abs(D) / np.linalg.norm(D, axis=-1, keepdims=True)
        return smooth_step((ratio - a) / overlap)

    def chi(rho, D):
        W = weights(D)
        return W[..., rho] / np.sum(W, axis=-1)

    def reach():
        """Largest |y_c| (c != rho) inside the support of chi_rho in chart rho."""
        return float(np.sqrt(1 - a * a) / a)

    return chi, reach


@dataclass
class Atlas:
    """Charts of one blow-up with an angular partition of unity on the center variables."""

    problem: PhaseProblem
    charts: tuple            # TransformedPhase per chart (empty: phase used as is)
    center: tuple
    overlap: float = 0.2

    def __post_init__(self):
        self.chi, self.reach = angular_partition(len(self.center), self.overlap)

    def chart_amplitude(self, k, Y):
        """a(Z(y)) chi_rho(Z(y)) |det DZ(y)| in chart k."""
        tp = self.charts[k]
        rho = tp.charts[-1].rho
        Y = np.asarray(Y, dtype=float)
        D = np.stack([np.ones(Y.shape[:-1]) if c == rho else Y[..., c] for c in self.center], axis=-1)
        chi = self.chi(self.center.index(rho), D)
        return np.asarray(self.problem.amplitude(tp.map(Y))) * chi * tp.jacobian(Y)

    def chart_box(self, k):
        tp = self.charts[k]
        rho = tp.charts[-1].rho
        box = np.array(self.problem.box, dtype=float)
        R = self.reach()
        for c in self.center:
            if c != rho:
                box[c] = [-R, R]
        return box


def blowup_atlas(problem: PhaseProblem, center=(0, 1)) -> Atlas:
    return Atlas(problem, tuple(blow_up(problem, center, r) for r in center), tuple(center))


class _Frozen:
    """Phase on the fiber axes with the parameter axes frozen."""

    def __init__(self, phase, full, fiber):
        self.phase, self.full, self.fiber = phase, np.asarray(full, dtype=float), list(fiber)

    def _embed(self, Y):
        Y = np.asarray(Y, dtype=float)
        X = np.broadcast_to(self.full, Y.shape[:-1] + self.full.shape).copy()
        X[..., self.fiber] = Y
        return X

    def __call__(self, Y):
        return self.phase(self._embed(Y))

    def gradient(self, Y):
        return phase_gradient(self.phase, self._embed(Y))[..., self.fiber]

    def hessian(self, Y):
        return phase_hessian(self.phase, self._embed(Y))[..., self.fiber, :][..., self.fiber]


@dataclass(frozen=True)
class SingularPrediction:
    terms: tuple
    coefficients: np.ndarray
    chart_terms: tuple
    convention: str
    notes: tuple = ()

    def as_fit(self):
        return AsymptoticFit(self.terms, self.coefficients, 0.0, 1.0, self.convention, "blowup", 0)

    def evaluate(self, mu):
        return self.as_fit().evaluate(mu)


def _fiber_q0(tp: TransformedPhase, amp_func, sigma_point, fiber, box, points=32):
    frozen = _Frozen(tp.weak, sigma_point, fiber)
    fbox = box[list(fiber)]

    def a(Y):
        X = frozen._embed(Y)
        return amp_func(X)

    prob = PhaseProblem(len(fiber), frozen, CallableAmplitude(a, fbox), None, "analytic", "fiber")
    try:
        return q0(prob, points)
    except CleanlinessViolation as exc:
        raise NotResolved(f"weak phase not clean on the fiber: {exc}", exc.point) from None


def singular_asymptotics(problem: PhaseProblem, atlas: Atlas | None = None, mu_grid=None,
                         convention: str = "small", points: int = 32) -> SingularPrediction:
    """Leading (alpha, k) and coefficient of I through a blow-up atlas (s-convention, s = mu or 1/mu).

    Each chart contributes int |sigma|^J (2 pi s / |sigma|^l)^{c/2} Q0(sigma) d sigma; with
    e = J - l c/2 the sigma-integral is regular (e > -1), logarithmic (e = -1, cut at
    |sigma| = s^{1/l}) or dominated by the divisor (e < -1, alpha = (J + 1)/l).
    """
    if convention not in ("small", "large"):
        raise ValueError("convention must be 'small' or 'large'")
    if atlas is None or not atlas.charts:
        if problem.critical_manifold is None:
            try:
                res = q0(problem, points)
            except CleanlinessViolation as exc:
                raise NotResolved(f"phase is not clean and no atlas was given: {exc}", exc.point) from None
        else:
            res = q0(problem, points)
        c = 2 * res.order
        alpha = Fraction(c, 2)
        coef = (2 * np.pi) ** float(alpha) * res.Q0
        if abs(res.psi0) > 1e-12:
            raise NotResolved("critical value must be 0 for a pure power expansion")
        return SingularPrediction(((alpha, 0),), np.array([coef]), (("clean", alpha, 0, coef),), convention)

    chart_terms = []
    for k, tp in enumerate(atlas.charts):
        params = tp.parameter_axes
        if len(params) != 1:
            raise NotImplementedError("coefficients are implemented for a single exceptional variable per chart")
        j = params[0]
        l, J = int(tp.exponents[j]), int(tp.jacobian_powers[j])
        fiber = [i for i in range(problem.dim) if i != j]
        box = atlas.chart_box(k)

        def amp(X, k=k):
            return _amp_no_jacobian(atlas, k, X)

        origin = np.zeros(problem.dim)
        r0 = _fiber_q0(tp, amp, origin, fiber, box, points)
        c = int(2 * r0.order)
        e = Fraction(J) - Fraction(l * c, 2)
        if e == -1:
            alpha, kk = Fraction(c, 2), 1
            # both sides of the divisor, log(1/|sigma|) from s^{1/l} to 1 gives (1/l) log(1/s)
            coef = 2 * (2 * np.pi) ** (c / 2) * r0.Q0 / l
        elif e > -1:
            alpha, kk = Fraction(c, 2), 0
            xs, ws = np.polynomial.legendre.leggauss(points)
            lo, hi = box[j]
            vals = []
            for side_lo, side_hi in ((lo, 0.0), (0.0, hi)):
                t = 0.5 * (side_hi - side_lo) * xs + 0.5 * (side_hi + side_lo)
                acc = 0j
                for ti, wi in zip(t, ws):
                    pt = origin.copy()
                    pt[j] = ti
                    rq = _fiber_q0(tp, amp, pt, fiber, box, points)
                    acc += wi * abs(ti) ** float(e) * rq.Q0
                vals.append(0.5 * (side_hi - side_lo) * acc)
            coef = (2 * np.pi) ** (c / 2) * sum(vals)
        else:
            alpha, kk = Fraction(J + 1, l), 0
            coef = complex("nan")
        chart_terms.append((tp.name, alpha, kk, complex(coef)))

    best = min(t[1] for t in chart_terms)
    lead = [t for t in chart_terms if t[1] == best]
    kmax = max(t[2] for t in lead)
    total = sum(t[3] for t in lead if t[2] == kmax)
    notes = ()
    if any(t[1] == best and t[2] < kmax for t in chart_terms):
        notes = ("lower log powers at the leading alpha are not part of the prediction",)
    return SingularPrediction(((best, kmax),), np.array([complex(total)]), tuple(chart_terms), convention, notes)


def _amp_no_jacobian(atlas: Atlas, k, X):
    tp = atlas.charts[k]
    rho = tp.charts[-1].rho
    X = np.asarray(X, dtype=float)
    D = np.stack([np.ones(X.shape[:-1]) if c == rho else X[..., c] for c in atlas.center], axis=-1)
    chi = atlas.chi(atlas.center.index(rho), D)
    return np.asarray(atlas.problem.amplitude(tp.map(X))) * chi


def chart_integrals(atlas: Atlas, mu, spec_kwargs=None):
    """I(mu) as the sum over charts of the pulled-back integrals (each split at the divisor)."""
    from .oscquad import QuadratureSpec, integrate

    kw = dict(convention="small", tolerance=1e-6)
    kw.update(spec_kwargs or {})
    parts = []
    for k, tp in enumerate(atlas.charts):
        box = atlas.chart_box(k)
        rho = tp.charts[-1].rho
        total = 0j
        err = 0.0
        for side in ((box[rho, 0], 0.0), (0.0, box[rho, 1])):
            b = box.copy()
            b[rho] = side
            amp = CallableAmplitude(lambda Y, k=k: atlas.chart_amplitude(k, Y), b)
            r = integrate(tp.total, amp, QuadratureSpec(mu=mu, box=b, **kw))
            total += r.value
            err += r.error
        parts.append((total, err))
    return parts


def xy2_problem(inner=0.5, outer=1.0, scale=1.0, perturbed=False):
    if not perturbed:
        return builtin_problem("xy2", inner, outer, scale)
    return PhaseProblem(2, PolynomialPhase.from_terms({(2, 2): 1.0, (5, 0): 1.0}, name="(xy)^2+x^5"),
                        BumpAmplitude.uniform(2, inner, outer, scale=scale), None, "analytic", "xy2_perturbed")


def sigma_monomial_check(N, a):
    """Both sides of the delta change of variables for tau^a (numeric pullback vs exact formula)."""
    qs = QuadraticSubstitution(N)
    xs, ws = np.polynomial.legendre.leggauss(24)
    xs = 0.5 * (xs + 1)
    ws = 0.5 * ws
    grids = np.meshgrid(*([xs] * N), indexing="ij")
    S = np.stack([g.ravel() for g in grids], axis=-1)
    W = np.prod(np.stack(np.meshgrid(*([ws] * N), indexing="ij"), axis=-1).reshape(-1, N), axis=-1)
    T = qs(S)
    val = float(np.sum(W * np.prod(T ** np.asarray(a), axis=-1) * np.abs(qs.jacobian(S))))
    return val, float(qs.pullback_monomial_integral(a))

