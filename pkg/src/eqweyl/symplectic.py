"""Momentum map, local equivariant phase, critical set and reduced volumes.

Sign conventions: the fundamental field is X~_x = d/dt exp(tX).x at t = 0 and the
momentum is J_X(x, xi) = <xi, X~_x>.  With the phase Phi(x, xi, g) = <x - g.x, xi>
in chart coordinates this gives d/dg Phi at the identity = -J.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .actions import ChartError, GroupActionSpec, LensAction, Sphere2Action, TorusAction
from .functions import gauss_legendre

CRIT_TOL = 1e-9


@dataclass(frozen=True)
class CotangentPoint:
    chart: int
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))
        if self.x.shape != self.xi.shape:
            raise ValueError("x and xi must have the same shape")


@dataclass(frozen=True)
class MomentumMapModel:
    spec: GroupActionSpec

    def fundamental_fields(self, X, x, chart=0):
        return self.spec.fundamental_field(X, x, chart)

    def components(self, x, xi, chart=0):
        """Momentum components <xi, X~_k> for the Lie algebra basis, shape (..., d)."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        basis = self.spec.lie_basis()
        return np.stack([np.sum(xi * self.fundamental_fields(B, x, chart), axis=-1) for B in basis], axis=-1)


def momentum(model: MomentumMapModel, pt: CotangentPoint, X) -> float:
    model.spec.chart(pt.chart).check(pt.x)
    Xt = model.fundamental_fields(np.asarray(X, dtype=float), pt.x, pt.chart)
    return np.sum(pt.xi * Xt, axis=-1)


@dataclass(frozen=True)
class EquivariantPhase:
    """Phi(x, xi, g) = <kappa(x) - kappa(g x), xi> on one chart."""

    spec: GroupActionSpec
    chart: int = 0
    gradient_mode: str = "auto"
    step: float = 1e-6

    @property
    def n(self):
        return self.spec.dim_M

    @property
    def d(self):
        return self.spec.dim_G

    @property
    def dim(self):
        return 2 * self.n + self.d

    @property
    def analytic(self):
        if self.gradient_mode == "auto":
            return isinstance(self.spec, TorusAction)
        return self.gradient_mode == "analytic"

    def __call__(self, x, xi, g):
        gx = self.spec.action_unchecked(g, x, self.chart)
        return np.sum((np.asarray(x) - gx) * np.asarray(xi), axis=-1)

    def split(self, Z):
        Z = np.asarray(Z, dtype=float)
        n = self.n
        return Z[..., :n], Z[..., n:2 * n], Z[..., 2 * n:]

    def packed(self, Z):
        return self(*self.split(Z))

    def gradient(self, x, xi, g):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        g = np.asarray(g, dtype=float)
        gx = self.spec.action_unchecked(g, x, self.chart)
        d_xi = x - gx  # exact by construction
        if self.analytic:
            Dg = self.spec.action_jacobian(g, x, self.chart)
            d_x = xi - np.einsum("...ji,...j->...i", Dg, xi)
            fields = [self.spec.fundamental_field(B, gx, self.chart) for B in self.spec.lie_basis()]
            d_g = np.stack([-np.sum(xi * F, axis=-1) for F in fields], axis=-1)
        else:
            h = self.step
            d_x = np.empty(np.broadcast_shapes(x.shape, xi.shape))
            for k in range(self.n):
                e = np.zeros(self.n)
                e[k] = h
                d_x[..., k] = (self(x + e, xi, g) - self(x - e, xi, g)) / (2 * h)
            d_g = np.empty(d_x.shape[:-1] + (self.d,))
            for k in range(self.d):
                e = np.zeros(self.d)
                e[k] = h
                d_g[..., k] = (self(x, xi, g + e) - self(x, xi, g - e)) / (2 * h)
        d_xi = np.broadcast_to(d_xi, d_x.shape)
        return np.concatenate([d_x, d_xi, d_g], axis=-1)

    def packed_gradient(self, Z):
        return self.gradient(*self.split(Z))

    def packed_hessian(self, Z, step=1e-4):
        from .functions import fd_hessian

        return fd_hessian(self.packed, Z, step)


def phase_gradient(phi: EquivariantPhase, pt: CotangentPoint, g) -> np.ndarray:
    """(d_x Phi, d_xi Phi, d_g Phi); raises ChartError if g x leaves the chart."""
    if pt.chart != phi.chart:
        raise ChartError("point and phase live on different charts")
    phi.spec.action(g, pt.x, phi.chart)  # domain check
    return phi.gradient(pt.x, pt.xi, g)


def critical_set_check(phi: EquivariantPhase, pt: CotangentPoint, g) -> bool:
    spec = phi.spec
    g = np.asarray(g, dtype=float)
    gx = spec.action_unchecked(g, pt.x, phi.chart)
    if np.linalg.norm(gx - pt.x) >= CRIT_TOL:
        return False
    Dg = spec.action_jacobian(g, pt.x, phi.chart)
    pulled = Dg.T @ pt.xi
    if np.linalg.norm(pulled - pt.xi) >= CRIT_TOL:
        return False
    J = MomentumMapModel(spec).components(pt.x, pt.xi, phi.chart)
    return bool(np.all(np.abs(J) < CRIT_TOL))


def cotangent_stabilizer_order(spec: GroupActionSpec, x, xi, chart=0, grid=27720, tol=1e-9):
    """Number of grid angles fixing (x, xi); circle actions only."""
    theta = 2 * np.pi * np.arange(grid) / grid
    m = spec.to_model(x, chart)
    moved = spec.model_distance(spec.act_model(theta[:, None], m[None, :]), m[None, :]) < tol
    Dg = spec.action_jacobian(theta[moved][:, None], np.asarray(x)[None, :], chart)
    pulled = np.einsum("kji,j->ki", Dg, np.asarray(xi, dtype=float))
    ok = np.linalg.norm(pulled - xi, axis=-1) < tol
    return int(np.sum(ok))


# ------------------------------------------------------------------ reduced volume


@dataclass(frozen=True)
class VolumePiece:
    """Part of a cover of M: a parameter box mapped into one chart."""

    chart: int
    lower: tuple
    upper: tuple
    kind: str = "box"  # "box" (identity) or "polar" (r, phi) -> r (cos, sin)

    def volume(self):
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def to_chart(self, u):
        if self.kind == "box":
            return u, np.ones(u.shape[:-1])
        r, ph = u[..., 0], u[..., 1]
        return np.stack([r * np.cos(ph), r * np.sin(ph)], axis=-1), r


def default_cover(spec: GroupActionSpec, variant: int = 0):
    tp = 2 * np.pi
    if isinstance(spec, TorusAction):
        n = spec.dim_M
        if variant == 0:
            return (VolumePiece(0, (0.0,) * n, (tp,) * n),)
        return (
            VolumePiece(0, (0.0,) * n, (np.pi,) + (tp,) * (n - 1)),
            VolumePiece(1, (-np.pi,) * n, (0.0,) + (np.pi,) * (n - 1)),
        )
    if isinstance(spec, Sphere2Action):
        r0 = 1.0 if variant == 0 else 2.0
        return (VolumePiece(0, (0.0, 0.0), (r0, tp), "polar"), VolumePiece(1, (0.0, 0.0), (1.0 / r0, tp), "polar"))
    if isinstance(spec, LensAction):
        ch = spec.chart(variant % 2)
        return (VolumePiece(ch.index, tuple(ch.lower), tuple(ch.upper)),)
    raise TypeError("not a catalog action")


@dataclass(frozen=True)
class ReducedVolumeEstimate:
    value: float
    standard_error: float
    sample_count: int
    method: str = "monte_carlo"
    measure: str = "fibered"
    skipped_singular: int = 0
    converged: bool = True
    half_value: float = float("nan")
    half_standard_error: float = float("nan")
    notes: tuple = field(default=())

    def as_json(self, action):
        return {
            "action": action,
            "samples": int(self.sample_count),
            "value": float(self.value),
            "stderr": float(self.standard_error),
            "skipped_singular": int(self.skipped_singular),
            "method": self.method,
            "measure": self.measure,
            "converged": bool(self.converged),
        }


def _orthonormal_cobasis(F, ginv):
    """Columns of F orthonormalized w.r.t. the cometric g^{-1} (symmetric square root)."""
    G = np.swapaxes(F, -1, -2) @ ginv @ F
    w, V = np.linalg.eigh(G)
    inv_sqrt = V @ (V.swapaxes(-1, -2) / np.sqrt(w)[..., :, None])
    return F @ inv_sqrt


def _sphere_point(angles, k):
    """Hyperspherical coordinates on S^{k-1} (k >= 2) with their density."""
    m = angles.shape[-1]
    out = np.ones(angles.shape[:-1] + (k,))
    dens = np.ones(angles.shape[:-1])
    s = np.ones(angles.shape[:-1])
    for i in range(m - 1):
        out[..., i] = s * np.cos(angles[..., i])
        dens = dens * np.sin(angles[..., i]) ** (k - 2 - i)
        s = s * np.sin(angles[..., i])
    out[..., m - 1] = s * np.cos(angles[..., m - 1])
    out[..., m] = s * np.sin(angles[..., m - 1])
    return out, dens


def _fiber_box(k):
    if k == 1:
        return np.zeros(0), np.zeros(0)
    lo = np.zeros(k - 1)
    hi = np.r_[np.full(k - 2, np.pi), 2 * np.pi]
    return lo, hi


class _Density:
    """Integrand of the reduced volume on one cover piece."""

    def __init__(self, spec: GroupActionSpec, piece: VolumePiece, measure: str, orbit_nodes: int = 64):
        self.spec = spec
        self.piece = piece
        self.measure = measure
        self.kappa = spec.orbit_type_info().kappa
        self.k = spec.dim_M - self.kappa
        self.order = spec.orbit_type_info().principal_isotropy.order or 1
        self.orbit_nodes = orbit_nodes
        self.flo, self.fhi = _fiber_box(self.k)

    @property
    def param_dim(self):
        return len(self.piece.lower) + len(self.flo)

    def param_box(self):
        return np.r_[self.piece.lower, self.flo], np.r_[self.piece.upper, self.fhi]

    def fiber_sum(self):
        return 2 if self.k == 1 else 1

    def cotangent(self, P, sign=1.0):
        """Map parameters to (x, xi) with |xi|_g = 1, xi in Ann."""
        nb = len(self.piece.lower)
        x, jac = self.piece.to_chart(P[..., :nb])
        ginv = np.linalg.inv(self.spec.metric(x, self.piece.chart))
        B = _orthonormal_cobasis(self.spec.annihilator_frame(x, self.piece.chart), ginv)
        if self.k == 1:
            xi = sign * B[..., 0]
            fd = np.ones(x.shape[:-1])
        else:
            w, fd = _sphere_point(P[..., nb:], self.k)
            xi = np.einsum("...ij,...j->...i", B, w)
        return x, xi, jac, fd

    def _group_nodes(self):
        x, w = gauss_legendre(self.orbit_nodes if self.kappa == 1 else 16)
        T = 2 * np.pi / self.order
        t = 0.5 * T * (x + 1)
        wt = 0.5 * T * w
        if self.kappa == 1:
            return t[:, None], wt
        # 2-torus orbits (principal isotropy trivial in the catalog)
        tt = np.stack(np.meshgrid(t, t, indexing="ij"), -1).reshape(-1, 2)
        return tt, np.outer(wt, wt).ravel()

    def base_orbit_volume(self, x):
        spec, ch = self.spec, self.piece.chart
        nodes, wts = self._group_nodes()
        gx = spec.action_unchecked(nodes[:, None, :], x[None], ch)
        G = spec.metric(gx, ch)
        F = np.stack([spec.fundamental_field(B, gx, ch) for B in spec.lie_basis()], axis=-1)
        gram = np.swapaxes(F, -1, -2) @ G @ F
        speed = np.sqrt(np.abs(np.linalg.det(gram)))
        return np.einsum("k,k...->...", wts, speed)

    # Sasaki metric pieces --------------------------------------------------------
    def _christoffel(self, x, h=1e-5):
        spec, ch = self.spec, self.piece.chart
        n = spec.dim_M
        dg = np.empty(x.shape[:-1] + (n, n, n))  # dg[..., i, j, k] = d_i g_jk
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            dg[..., i, :, :] = (spec.metric(x + e, ch) - spec.metric(x - e, ch)) / (2 * h)
        ginv = np.linalg.inv(spec.metric(x, ch))
        # Gamma^l_{ij} = 1/2 g^{lk} (d_i g_jk + d_j g_ik - d_k g_ij)
        t = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
        return 0.5 * np.einsum("...lk,...ijk->...lij", ginv, t)

    def sasaki_inner(self, x, xi, dx, dxi):
        """Sasaki squared norms / Gram entries for tangent vectors (dx, dxi) stacked on axis -2."""
        spec, ch = self.spec, self.piece.chart
        G = spec.metric(x, ch)
        ginv = np.linalg.inv(G)
        Gam = self._christoffel(x)
        # covariant derivative of a covector: (D xi)_k = dxi_k - Gamma^j_{ik} dx^i xi_j
        Dxi = dxi - np.einsum("...jik,...ai,...j->...ak", Gam, dx, xi)
        return np.einsum("...ai,...ij,...bj->...ab", dx, G, dx) + np.einsum(
            "...ai,...ij,...bj->...ab", Dxi, ginv, Dxi
        )

    def sasaki_orbit_volume(self, x, xi, h=1e-5):
        if self.kappa != 1:
            raise NotImplementedError("Sasaki orbit volumes implemented for circle orbits")
        spec, ch = self.spec, self.piece.chart
        nodes, wts = self._group_nodes()

        def lift(t):
            gx = spec.action_unchecked(t[:, None, :], x[None], ch)
            D = spec.action_jacobian(t[:, None, :], x[None], ch)
            gxi = np.linalg.solve(np.swapaxes(D, -1, -2), np.broadcast_to(xi[None], gx.shape)[..., None])[..., 0]
            return gx, gxi

        x0, xi0 = lift(nodes)
        xp, xip = lift(nodes + h)
        xm, xim = lift(nodes - h)
        dx = ((xp - xm) / (2 * h))[..., None, :]
        dxi = ((xip - xim) / (2 * h))[..., None, :]
        speed = np.sqrt(self.sasaki_inner(x0, xi0, dx, dxi)[..., 0, 0])
        return np.einsum("k,k...->...", wts, speed)

    def sasaki_area(self, P, sign, h=1e-6):
        m = P.shape[-1]
        dxs, dxis = [], []
        for a in range(m):
            e = np.zeros(m)
            e[a] = h
            xp, xip, _, _ = self.cotangent(P + e, sign)
            xm, xim, _, _ = self.cotangent(P - e, sign)
            dxs.append((xp - xm) / (2 * h))
            dxis.append((xip - xim) / (2 * h))
        x, xi, _, _ = self.cotangent(P, sign)
        gram = self.sasaki_inner(x, xi, np.stack(dxs, -2), np.stack(dxis, -2))
        return np.sqrt(np.abs(np.linalg.det(gram))), x, xi

    def __call__(self, P):
        """Integrand values and the number of skipped (near-singular) points."""
        total = np.zeros(P.shape[:-1])
        skipped = np.zeros(P.shape[:-1], dtype=bool)
        signs = (1.0, -1.0) if self.k == 1 else (1.0,)
        for sign in signs:
            if self.measure == "fibered":
                x, xi, jac, fd = self.cotangent(P, sign)
                dens = np.sqrt(np.linalg.det(self.spec.metric(x, self.piece.chart))) * np.abs(jac) * fd
                vol = self.base_orbit_volume(x)
            elif self.measure == "sasaki":
                dens, x, xi = self.sasaki_area(P, sign)
                vol = self.sasaki_orbit_volume(x, xi)
            else:
                raise ValueError("measure must be 'fibered' or 'sasaki'")
            bad = vol < 1e-6
            skipped |= bad
            total = total + np.where(bad, 0.0, dens / np.where(bad, 1.0, vol))
        return total, int(np.sum(skipped))


def _pairwise(values):
    """Fixed-topology pairwise reduction over a list of arrays/floats."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def reduced_volume(model, samples: int = 100_000, seed: int = 0, measure: str = "fibered",
                   method: str = "monte_carlo", cover=None, threads: int = 1,
                   block: int = 1 << 13) -> ReducedVolumeEstimate:
    """vol[(Omega cap S*M)/G] = int dsigma / vol(orbit), principal stratum only.

    measure="fibered": dsigma is the Riemannian volume of M times the round measure
    on the unit sphere of Ann(T_x Gx); orbit volumes are base orbit lengths.
    measure="sasaki": dsigma and orbit volumes from the Sasaki metric on T*M.
    """
    spec = model.spec if isinstance(model, MomentumMapModel) else model
    if samples < 1000:
        raise ValueError("at least 10^3 samples required")
    kappa = spec.orbit_type_info().kappa
    if spec.dim_M - kappa < 1:
        raise ValueError("reduced volume needs n - kappa >= 1")
    cover = default_cover(spec) if cover is None else cover
    dens = [_Density(spec, piece, measure) for piece in cover]
    vols = [np.prod(np.subtract(*d.param_box()[::-1])) for d in dens]
    share = np.array(vols) / np.sum(vols)
    counts = np.maximum(np.round(share * samples).astype(int), 2)

    if method == "grid":
        return _grid_volume(spec, dens, counts, measure)
    if method != "monte_carlo":
        raise ValueError("method must be 'monte_carlo' or 'grid'")

    jobs = []
    for pi, (d, cnt) in enumerate(zip(dens, counts)):
        nblocks = -(-cnt // block)
        for b in range(nblocks):
            size = min(block, cnt - b * block)
            jobs.append((pi, b, size))

    def run(job):
        pi, b, size = job
        d = dens[pi]
        rng = np.random.default_rng([seed, pi, b])
        lo, hi = d.param_box()
        P = rng.uniform(lo, hi, size=(size, len(lo)))
        f, skipped = d(P)
        return np.array([f.sum(), (f * f).sum(), size, skipped], dtype=float)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    def combine(subset_fraction):
        value, var, skipped = 0.0, 0.0, 0
        for pi, d in enumerate(dens):
            idx = [i for i, j in enumerate(jobs) if j[0] == pi]
            keep = idx[: max(1, int(round(len(idx) * subset_fraction)))]
            s = _pairwise([results[i] for i in keep])
            N = s[2]
            mean = s[0] / N
            v = max(s[1] / N - mean**2, 0.0)
            value += vols[pi] * mean
            var += vols[pi] ** 2 * v / N
            skipped += int(s[3])
        return value, np.sqrt(var), skipped

    value, se, skipped = combine(1.0)
    n_blocks = min(sum(1 for j in jobs if j[0] == pi) for pi in range(len(dens)))
    half_v, half_se = float("nan"), float("nan")
    converged = True
    if n_blocks >= 2:
        half_v, half_se, _ = combine(0.5)
        if half_se > 0:
            converged = abs(half_v - value) <= 3 * half_se
        else:
            converged = abs(half_v - value) <= 1e-12 * abs(value)
    return ReducedVolumeEstimate(float(value), float(se), int(np.sum(counts)), "monte_carlo", measure, skipped,
                                 bool(converged), float(half_v), float(half_se))


def _grid_volume(spec, dens, counts, measure):
    value, skipped, total = 0.0, 0, 0
    for d, cnt in zip(dens, counts):
        lo, hi = d.param_box()
        m = len(lo)
        per = max(2, int(round(cnt ** (1.0 / m))))
        x, w = gauss_legendre(per)
        axes = [0.5 * (h - l) * (x + 1) + l for l, h in zip(lo, hi)]
        wts = [0.5 * (h - l) * w for l, h in zip(lo, hi)]
        P = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, m)
        W = np.prod(np.stack(np.meshgrid(*wts, indexing="ij"), -1).reshape(-1, m), axis=-1)
        f, sk = d(P)
        value += float(np.sum(W * f))
        skipped += sk
        total += len(P)
    return ReducedVolumeEstimate(value, 0.0, total, "grid", measure, skipped, True)


def unit_sphere_area(k: int) -> float:
    """|S^{k-1}|, the area of the unit sphere in R^k."""
    return float(2 * np.pi ** (k / 2) / special.gamma(k / 2))


def exact_reduced_volume(spec: GroupActionSpec) -> float:
    """Closed form |S^{n-kappa-1}| vol(M) / vol(principal orbit) for the unit-metric catalog."""
    info = spec.orbit_type_info()
    k = spec.dim_M - info.kappa
    c = spec.metric_scale
    if isinstance(spec, TorusAction):
        orbit = (2 * np.pi) ** spec.dim_G * c ** (spec.dim_G / 2)
    elif isinstance(spec, Sphere2Action):
        # int_M dvol / (2 pi |X~|) = 2 pi * int_0^pi sin / (2 pi sin) = pi, times |S^0| = 2
        return 2 * np.pi * np.sqrt(c)
    elif isinstance(spec, LensAction):
        orbit = 2 * np.pi / (info.principal_isotropy.order or 1) * np.sqrt(c)
    else:
        raise TypeError("not a catalog action")
    return unit_sphere_area(k) * spec.volume() / orbit
