"""Catalog of benchmark isometric group actions with known orbit geometry.

Families (string keys in parentheses):

* flat torus T^n = R^n / 2pi Z^n with the circle translating x1 ("torus{n}-rot1")
  or the 2-torus translating (x1, x2) ("torus{n}-rot12");
* round S^2 with rotation about the x3-axis ("s2-rot");
* round S^3 = SU(2) with the right Hopf circle ("s3-hopf");
* lens spaces Z_p \\ SU(2) with the right maximal-torus action ("lens-p{p}-right").

Group elements are angle arrays of shape (..., d).  Chart-level actions are the
smooth local lifts of the action (no wrapping): a point that leaves the chart
domain raises ChartError and the caller retries in another chart.  Model
coordinates (angles, unit vectors of R^3, unit quaternions as R^4) carry the
exact group law.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi
FD_STEP = 1e-5


class ConfigurationError(ValueError):
    """Unknown or unsupported catalog request."""


class ChartError(ValueError):
    """A point lies outside the domain of the requested chart."""


def wrap_angle(theta):
    """Map angles to (-pi, pi]."""
    t = np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi
    return np.where(t == -np.pi, np.pi, t)


# ----------------------------------------------------------------------------- types


@dataclass(frozen=True)
class ChartMap:
    index: int
    lower: np.ndarray
    upper: np.ndarray
    to_model: Callable
    from_model: Callable
    radius: float | None = None  # optional ball constraint |x| < radius

    def contains(self, x, margin=0.0):
        x = np.asarray(x, dtype=float)
        ok = np.all((x > self.lower + margin) & (x < self.upper - margin), axis=-1)
        if self.radius is not None:
            ok &= np.linalg.norm(x, axis=-1) < self.radius - margin
        return ok

    def check(self, x):
        if not np.all(self.contains(x)):
            raise ChartError(f"point outside chart {self.index}")

    def transition_jacobian(self, other: "ChartMap", x, step=FD_STEP):
        """D(other.from_model o self.to_model) at x by central differences."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        base = other.from_model(self.to_model(x))
        out = np.empty(x.shape + (n,))
        for k in range(n):
            e = np.zeros(n)
            e[k] = step
            fp = other.from_model(self.to_model(x + e))
            fm = other.from_model(self.to_model(x - e))
            out[..., :, k] = (_unwrap_near(fp, base, other) - _unwrap_near(fm, base, other)) / (2 * step)
        return out


def _unwrap_near(y, ref, chart):
    period = chart.upper - chart.lower
    return ref + np.where(np.isfinite(period), np.mod(y - ref + period / 2, period) - period / 2, y - ref)


@dataclass(frozen=True)
class IsotropyDescriptor:
    """Finite subgroup of the acting torus, given by generators as fractions of a full turn."""

    order: int = 1  # 0 encodes the whole circle
    generators: tuple = ()

    @property
    def trivial(self):
        return self.order == 1

    def elements(self):
        """All elements as tuples of Fractions (mod 1)."""
        if not self.generators:
            return [tuple()]
        dim = len(self.generators[0])
        elems = {tuple(Fraction(0) for _ in range(dim))}
        frontier = list(elems)
        while frontier:
            new = []
            for e in frontier:
                for g in self.generators:
                    h = tuple((a + b) % 1 for a, b in zip(e, g))
                    if h not in elems:
                        elems.add(h)
                        new.append(h)
            frontier = new
        return sorted(elems)

    def describe(self):
        if self.order == 0:
            return "SO(2)"
        return "trivial" if self.trivial else f"Z_{self.order}"


TRIVIAL = IsotropyDescriptor()


def cyclic(q: int, dim: int = 1) -> IsotropyDescriptor:
    if q == 1:
        return TRIVIAL
    gen = tuple([Fraction(1, q)] * dim) if dim == 1 else (Fraction(1, q),) + (Fraction(0),) * (dim - 1)
    return IsotropyDescriptor(q, (gen,))


@dataclass(frozen=True)
class OrbitTypeInfo:
    kappa: int
    principal_isotropy: IsotropyDescriptor
    isotropy_types: tuple
    Lambda: int
    sampled_chain: int | None = None

    def __post_init__(self):
        if self.Lambda > len(self.isotropy_types):
            raise ValueError("Lambda exceeds the number of isotropy types")


@dataclass(frozen=True)
class CharacterLabel:
    group_id: str
    weight: int | tuple
    d_chi: int = 1

    def __post_init__(self):
        if self.group_id == "Circle":
            object.__setattr__(self, "weight", int(self.weight))
        elif self.group_id == "Torus2":
            w = tuple(int(v) for v in np.atleast_1d(self.weight))
            if len(w) != 2:
                raise ValueError("Torus2 characters need two weights")
            object.__setattr__(self, "weight", w)
        else:
            raise ConfigurationError(f"unknown group {self.group_id!r}")
        if self.d_chi != 1:
            raise ValueError("characters of abelian groups are one-dimensional")

    @property
    def weight_vector(self):
        return np.atleast_1d(np.asarray(self.weight, dtype=np.int64))

    def label(self):
        if self.group_id == "Circle":
            return str(self.weight)
        return "{},{}".format(*self.weight)


def restriction_multiplicity(chi: CharacterLabel, H: IsotropyDescriptor) -> int:
    """Multiplicity of the trivial representation in chi restricted to H.

    Exact character average (1/|H|) sum_h chi(h) with chi(h) = exp(2 pi i <w, h>).
    """
    if H.trivial:
        return chi.d_chi
    w = chi.weight_vector
    elems = H.elements()
    # chi(h) = 1 iff <w, h> is an integer; the average of a nontrivial character is 0
    if all(sum(int(wi) * hi for wi, hi in zip(w, h)) % 1 == 0 for h in elems):
        return chi.d_chi
    return 0


# ------------------------------------------------------------------------ base class


@dataclass(frozen=True)
class GroupActionSpec:
    key: str
    manifold_id: str
    group_id: str
    dim_M: int
    dim_G: int
    metric_scale: float = 1.0
    charts: tuple = field(default=(), compare=False)

    # group law on angle parameters
    def identity(self):
        return np.zeros(self.dim_G)

    def group_mul(self, g, h):
        return wrap_angle(np.asarray(g) + np.asarray(h))

    def group_inv(self, g):
        return wrap_angle(-np.asarray(g))

    def haar_volume(self):
        return TWO_PI**self.dim_G

    def lie_basis(self):
        return np.eye(self.dim_G)

    def chart(self, index):
        try:
            return self.charts[index]
        except IndexError:
            raise ChartError(f"no chart {index}") from None

    # chart-level action (lifted); subclasses define _lift(g, x)
    def action(self, g, x, chart=0):
        x = np.asarray(x, dtype=float)
        ch = self.chart(chart)
        ch.check(x)
        y = self._lift(np.asarray(g, dtype=float), x, chart)
        ch.check(y)
        return y

    def action_unchecked(self, g, x, chart=0):
        return self._lift(np.asarray(g, dtype=float), np.asarray(x, dtype=float), chart)

    def action_jacobian(self, g, x, chart=0, step=None):
        if step is None and hasattr(self, "_lift_jacobian"):
            return self._lift_jacobian(np.asarray(g, dtype=float), np.asarray(x, dtype=float), chart)
        step = FD_STEP if step is None else step
        x = np.asarray(x, dtype=float)
        g = np.asarray(g, dtype=float)
        n = self.dim_M
        out = np.empty(np.broadcast_shapes(x.shape, g.shape[:-1] + (n,)) + (n,))
        for k in range(n):
            e = np.zeros(n)
            e[k] = step
            out[..., :, k] = (self._lift(g, x + e, chart) - self._lift(g, x - e, chart)) / (2 * step)
        return out

    def fundamental_field(self, X, x, chart=0, step=None):
        """X~_x = d/dt (exp(tX) . x) at t = 0, in chart coordinates."""
        X = np.asarray(X, dtype=float)
        x = np.asarray(x, dtype=float)
        if step is None and hasattr(self, "_field"):
            return self._field(X, x, chart)
        step = FD_STEP if step is None else step
        return (self._lift(step * X, x, chart) - self._lift(-step * X, x, chart)) / (2 * step)

    def metric(self, x, chart=0):
        raise NotImplementedError

    def to_model(self, x, chart=0):
        return self.chart(chart).to_model(np.asarray(x, dtype=float))

    def from_model(self, m, chart=0):
        return self.chart(chart).from_model(np.asarray(m, dtype=float))

    def orbit_type_info(self) -> OrbitTypeInfo:
        raise NotImplementedError

    @property
    def kappa(self):
        return self.orbit_type_info().kappa

    def character(self, weight) -> CharacterLabel:
        return CharacterLabel(self.group_id, weight)


def _box(lo, hi):
    return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)


# ---------------------------------------------------------------------------- torus


@dataclass(frozen=True)
class TorusAction(GroupActionSpec):
    """T^n with the circle (Circle) or 2-torus (Torus2) translating the first coordinates."""

    @classmethod
    def create(cls, n, group="Circle", metric_scale=1.0):
        if n < 1 or (group == "Torus2" and n < 2):
            raise ConfigurationError("torus dimension too small for the group")
        d = 1 if group == "Circle" else 2
        charts = (
            ChartMap(0, *_box([0.0] * n, [TWO_PI] * n),
                     lambda x: np.mod(x, TWO_PI), lambda m: np.mod(m, TWO_PI)),
            ChartMap(1, *_box([-np.pi] * n, [np.pi] * n),
                     lambda x: np.mod(x, TWO_PI), lambda m: wrap_angle(m)),
        )
        key = f"torus{n}-rot1" if group == "Circle" else f"torus{n}-rot12"
        return cls(key, f"Torus({n})", group, n, d, metric_scale, charts)

    def _shift(self, g):
        g = np.asarray(g, dtype=float)
        pad = np.zeros(g.shape[:-1] + (self.dim_M - self.dim_G,))
        return np.concatenate([g, pad], axis=-1)

    def _lift(self, g, x, chart):
        return x + self._shift(g)

    def _lift_jacobian(self, g, x, chart):
        shape = np.broadcast_shapes(x.shape, g.shape[:-1] + (self.dim_M,))
        return np.broadcast_to(np.eye(self.dim_M), shape + (self.dim_M,)).copy()

    def _field(self, X, x, chart):
        return np.broadcast_to(self._shift(X), np.broadcast_shapes(x.shape, X.shape[:-1] + (self.dim_M,))).copy()

    def act_model(self, g, m):
        return np.mod(np.asarray(m) + self._shift(g), TWO_PI)

    def model_distance(self, m1, m2):
        d = wrap_angle(np.asarray(m1) - np.asarray(m2))
        return np.linalg.norm(d, axis=-1)

    def metric(self, x, chart=0):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.metric_scale * np.eye(self.dim_M), x.shape + (self.dim_M,)).copy()

    def volume(self):
        return TWO_PI**self.dim_M * self.metric_scale ** (self.dim_M / 2)

    def random_points(self, rng, count, chart=0):
        ch = self.chart(chart)
        return rng.uniform(ch.lower, ch.upper, size=(count, self.dim_M))

    def orbit_type_info(self):
        return OrbitTypeInfo(self.dim_G, TRIVIAL, (TRIVIAL,), 1)

    def special_points(self):
        return np.zeros((0, self.dim_M))

    def annihilator_frame(self, x, chart=0):
        x = np.asarray(x, dtype=float)
        n, d = self.dim_M, self.dim_G
        frame = np.zeros((n, n - d))
        frame[d:, :] = np.eye(n - d)
        return np.broadcast_to(frame, x.shape[:-1] + (n, n - d)).copy()


# --------------------------------------------------------------------------- sphere 2


def _stereo_to_model(sign):
    # sign=+1: projection from the south pole (covers the north), sign=-1 the reverse
    def to_model(u):
        u = np.asarray(u, dtype=float)
        r2 = np.sum(u * u, axis=-1)
        den = 1.0 + r2
        return np.concatenate(
            [2 * u / den[..., None], (sign * (1.0 - r2) / den)[..., None]], axis=-1
        )

    def from_model(p):
        p = np.asarray(p, dtype=float)
        return p[..., :2] / (1.0 + sign * p[..., 2:3])

    return to_model, from_model


@dataclass(frozen=True)
class Sphere2Action(GroupActionSpec):
    """Round unit S^2 with the circle rotating about the x3-axis.

    Both stereographic charts turn the rotation into the planar rotation
    u -> R_theta u, and the metric is 4 / (1 + |u|^2)^2 times the identity.
    """

    chart_radius: float = 4.0

    @classmethod
    def create(cls, metric_scale=1.0, chart_radius=4.0):
        charts = []
        for idx, sign in enumerate((1.0, -1.0)):
            tm, fm = _stereo_to_model(sign)
            charts.append(ChartMap(idx, *_box([-np.inf] * 2, [np.inf] * 2), tm, fm, radius=chart_radius))
        return cls("s2-rot", "Sphere2", "Circle", 2, 1, metric_scale, tuple(charts), chart_radius)

    @staticmethod
    def _rot(theta):
        c, s = np.cos(theta), np.sin(theta)
        return c, s

    def _lift(self, g, x, chart):
        c, s = self._rot(g[..., 0])
        u1, u2 = x[..., 0], x[..., 1]
        return np.stack([c * u1 - s * u2, s * u1 + c * u2], axis=-1)

    def _lift_jacobian(self, g, x, chart):
        c, s = self._rot(g[..., 0])
        R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
        return np.broadcast_to(R, np.broadcast_shapes(x.shape, g.shape[:-1] + (2,)) + (2,)).copy()

    def _field(self, X, x, chart):
        return X[..., 0:1] * np.stack([-x[..., 1], x[..., 0]], axis=-1)

    def act_model(self, g, p):
        c, s = self._rot(np.asarray(g, dtype=float)[..., 0])
        p = np.asarray(p, dtype=float)
        u, v = c * p[..., 0] - s * p[..., 1], s * p[..., 0] + c * p[..., 1]
        return np.stack([u, v, np.broadcast_to(p[..., 2], u.shape)], axis=-1)

    def model_distance(self, p1, p2):
        return np.linalg.norm(np.asarray(p1) - np.asarray(p2), axis=-1)

    def metric(self, x, chart=0):
        x = np.asarray(x, dtype=float)
        f = self.metric_scale * 4.0 / (1.0 + np.sum(x * x, axis=-1)) ** 2
        return f[..., None, None] * np.eye(2)

    def select_chart(self, p):
        """Chart whose projection pole is farthest from p."""
        return np.where(np.asarray(p)[..., 2] >= 0, 0, 1)

    def volume(self):
        return 4 * np.pi * self.metric_scale

    def random_points(self, rng, count, chart=0):
        # uniform on the unit disk of the chart (the half sphere it represents best)
        r = np.sqrt(rng.uniform(0, 1, count))
        phi = rng.uniform(0, TWO_PI, count)
        return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)

    def orbit_type_info(self):
        return OrbitTypeInfo(1, TRIVIAL, (TRIVIAL, IsotropyDescriptor(0)), 2)

    def special_points(self):
        return np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])

    def annihilator_frame(self, x, chart=0):
        x = np.asarray(x, dtype=float)
        # covectors killing J x = (-x2, x1): the radial covector (x1, x2)
        return x[..., :, None]


# ---------------------------------------------------------------- sphere 3 and lens


def _hopf_to_model(x):
    x = np.asarray(x, dtype=float)
    eta, a, b = x[..., 0], x[..., 1], x[..., 2]
    ce, se = np.cos(eta), np.sin(eta)
    return np.stack([ce * np.cos(a), ce * np.sin(a), se * np.cos(b), se * np.sin(b)], axis=-1)


@dataclass(frozen=True)
class LensAction(GroupActionSpec):
    """Z_p \\ SU(2) (p = 1: S^3) with the right circle q -> q diag(e^{i t}, e^{-i t}).

    Points are unit quaternions q = (a, b) in C^2, written in Hopf coordinates
    a = cos(eta) e^{i alpha}, b = sin(eta) e^{i beta}.  The left generator of Z_p
    sends (alpha, beta) -> (alpha + 2 pi/p, beta - 2 pi/p); the right circle sends
    (alpha, beta) -> (alpha + t, beta + t).  Metric dEta^2 + cos^2 dAlpha^2 + sin^2 dBeta^2.
    """

    p: int = 1

    @classmethod
    def create(cls, p=1, metric_scale=1.0):
        if p < 1:
            raise ConfigurationError("lens order must be positive")
        period = TWO_PI / p

        def make(lo_a, lo_b):
            def from_model(m, lo_a=lo_a, lo_b=lo_b):
                m = np.asarray(m, dtype=float)
                eta = np.arctan2(np.hypot(m[..., 2], m[..., 3]), np.hypot(m[..., 0], m[..., 1]))
                a = np.arctan2(m[..., 1], m[..., 0])
                b = np.arctan2(m[..., 3], m[..., 2])
                j = np.floor((a - lo_a) / period)
                a = a - j * period
                b = np.mod(b + j * period - lo_b, TWO_PI) + lo_b
                return np.stack([eta, a, b], axis=-1)

            return from_model

        charts = (
            ChartMap(0, *_box([0.0, 0.0, 0.0], [np.pi / 2, period, TWO_PI]), _hopf_to_model, make(0.0, 0.0)),
            ChartMap(1, *_box([0.0, -period / 2, -np.pi], [np.pi / 2, period / 2, np.pi]), _hopf_to_model,
                     make(-period / 2, -np.pi)),
        )
        if p == 1:
            key, mid = "s3-hopf", "Sphere3"
        else:
            key, mid = f"lens-p{p}-right", f"LensSpace({p})"
        return cls(key, mid, "Circle", 3, 1, metric_scale, charts, p)

    def _lift(self, g, x, chart):
        t = g[..., 0]
        if self.p % 2 == 0:
            # right translation by pi is the left deck element -1, i.e. the identity on M:
            # use the representative of t modulo pi nearest the identity
            t = t - np.pi * np.round(t / np.pi)
        return np.stack(np.broadcast_arrays(x[..., 0], x[..., 1] + t, x[..., 2] + t), axis=-1)

    def _lift_jacobian(self, g, x, chart):
        shape = np.broadcast_shapes(x.shape, g.shape[:-1] + (3,))
        return np.broadcast_to(np.eye(3), shape + (3,)).copy()

    def _field(self, X, x, chart):
        v = np.array([0.0, 1.0, 1.0])
        return X[..., 0:1] * np.broadcast_to(v, x.shape)

    def act_model(self, g, m):
        t = np.asarray(g, dtype=float)[..., 0]
        m = np.asarray(m, dtype=float)
        a = m[..., 0] + 1j * m[..., 1]
        b = m[..., 2] + 1j * m[..., 3]
        z = np.exp(1j * t)
        a, b = a * z, b * z
        return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)

    def deck(self, m, j):
        """Left Z_p generator applied j times."""
        m = np.asarray(m, dtype=float)
        z = np.exp(2j * np.pi * j / self.p)
        a = (m[..., 0] + 1j * m[..., 1]) * z
        b = (m[..., 2] + 1j * m[..., 3]) / z
        return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)

    def model_distance(self, m1, m2):
        best = None
        for j in range(self.p):
            d = np.linalg.norm(np.asarray(m1) - self.deck(m2, j), axis=-1)
            best = d if best is None else np.minimum(best, d)
        return best

    def metric(self, x, chart=0):
        x = np.asarray(x, dtype=float)
        eta = x[..., 0]
        diag = np.stack([np.ones_like(eta), np.cos(eta) ** 2, np.sin(eta) ** 2], axis=-1)
        out = np.zeros(x.shape + (3,))
        for k in range(3):
            out[..., k, k] = self.metric_scale * diag[..., k]
        return out

    def volume(self):
        return 2 * np.pi**2 / self.p * self.metric_scale**1.5

    def random_points(self, rng, count, chart=0):
        ch = self.chart(chart)
        # uniform w.r.t. the Riemannian measure: eta has density sin(2 eta)
        eta = 0.5 * np.arccos(1 - 2 * rng.uniform(0, 1, count))
        a = rng.uniform(ch.lower[1], ch.upper[1], count)
        b = rng.uniform(ch.lower[2], ch.upper[2], count)
        return np.stack([eta, a, b], axis=-1)

    def principal_order(self):
        return 2 if self.p % 2 == 0 else 1

    def orbit_type_info(self):
        q = self.principal_order()
        H = cyclic(q)
        types = [H]
        if self.p > q:
            types.append(cyclic(self.p))
        key = (self.p, self.metric_scale)
        if key not in _CHAIN_CACHE:
            _CHAIN_CACHE[key] = sampled_chain_length(self)
        sampled = _CHAIN_CACHE[key]
        Lam = min(sampled, len(types))
        return OrbitTypeInfo(1, H, tuple(types), Lam, sampled)

    def special_points(self):
        # the two exceptional circles b = 0 and a = 0
        return np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])

    def annihilator_frame(self, x, chart=0):
        x = np.asarray(x, dtype=float)
        frame = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        # second column: cos^2 dalpha - ... is not needed; any basis of {xi_a + xi_b = 0}
        return np.broadcast_to(frame, x.shape[:-1] + (3, 2)).copy()


# ------------------------------------------------------------------ stabilizer oracle

_CHAIN_CACHE: dict = {}
_STAB_GRID = 2 * 2 * 2 * 3 * 3 * 5 * 7 * 11  # divisible by every order up to 12


def stabilizer_order(spec: GroupActionSpec, m, grid=_STAB_GRID, tol=1e-9):
    """Order of the circle stabilizer of the model point m, by scanning a fine angle grid.

    Returns 0 for a positive-dimensional stabilizer (fixed point of the circle).
    """
    if spec.group_id != "Circle":
        raise ConfigurationError("stabilizer scan implemented for circle actions")
    m = np.asarray(m, dtype=float)
    theta = TWO_PI * np.arange(grid) / grid
    d = spec.model_distance(spec.act_model(theta[:, None], m[None, :]), m[None, :])
    count = int(np.sum(d < tol))
    if count == grid:
        return 0
    return count


def sampled_chain_length(spec: GroupActionSpec, count=24, seed=0):
    """Longest chain of sampled isotropy orders (random points plus known special points)."""
    rng = np.random.default_rng(seed)
    pts = [spec.to_model(x) for x in spec.random_points(rng, count)]
    pts += list(spec.special_points())
    orders = sorted({stabilizer_order(spec, m, grid=_STAB_GRID) for m in pts})
    # a positive-dimensional stabilizer contains every finite one; finite cyclic
    # subgroups of the circle are ordered by divisibility
    chain = _longest_divisor_chain([o for o in orders if o > 0])
    return chain + (1 if 0 in orders else 0)


def _longest_divisor_chain(orders):
    best = {}
    for o in sorted(orders):
        best[o] = 1 + max((best[d] for d in best if o % d == 0 and d != o), default=0)
    return max(best.values(), default=0)


# -------------------------------------------------------------------------- catalog

_KEY = re.compile(r"^(?:torus(\d+)-rot(1|12)|s2-rot|s3-hopf|lens-p(\d+)-right)$")


def get_action(key: str, metric_scale: float = 1.0) -> GroupActionSpec:
    """Look up a catalog action by its string key."""
    mt = _KEY.match(key.strip()) if isinstance(key, str) else None
    if not mt:
        raise ConfigurationError(f"unknown action key {key!r}")
    if key.startswith("torus"):
        n = int(mt.group(1))
        group = "Circle" if mt.group(2) == "1" else "Torus2"
        return TorusAction.create(n, group, metric_scale)
    if key == "s2-rot":
        return Sphere2Action.create(metric_scale)
    if key == "s3-hopf":
        return LensAction.create(1, metric_scale)
    p = int(mt.group(3))
    if p < 2:
        raise ConfigurationError("lens order must be at least 2 (use s3-hopf for p = 1)")
    return LensAction.create(p, metric_scale)


CATALOG_KEYS = ("torus2-rot1", "torusN-rot1", "s2-rot", "s3-hopf", "lens-p{p}-right")


def orbit_type_info(spec: GroupActionSpec) -> OrbitTypeInfo:
    if not isinstance(spec, GroupActionSpec):
        raise ConfigurationError("not a catalog action")
    return spec.orbit_type_info()


def sample_group(spec: GroupActionSpec, count: int, seed: int = 0):
    """Deterministic quasi-uniform group elements, identity first.

    Additive recurrence with the generalized golden ratio, offset by a seeded shift.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    d = spec.dim_G
    # root of x^{d+1} = x + 1
    phi = 2.0
    for _ in range(64):
        phi = (1 + phi) ** (1.0 / (d + 1))
    alpha = np.array([phi ** -(k + 1) for k in range(d)]) % 1.0
    shift = np.random.default_rng(seed).uniform(0, 1, d)
    j = np.arange(1, count)[:, None]
    u = (shift + j * alpha) % 1.0
    out = np.vstack([np.zeros((1, d)), wrap_angle(TWO_PI * u)])
    return [row.copy() for row in out]


def check_isometry(spec: GroupActionSpec, g, x, chart=0, step=FD_STEP):
    """|| dg^T metric(g x) dg - metric(x) || with dg by central differences."""
    dg = spec.action_jacobian(g, x, chart, step=step)
    gx = spec.action_unchecked(g, x, chart)
    lhs = np.swapaxes(dg, -1, -2) @ spec.metric(gx, chart) @ dg
    return np.max(np.abs(lhs - spec.metric(x, chart)))

