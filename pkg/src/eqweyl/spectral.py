"""Exact Laplace spectra with isotypic multiplicities, reduced counting functions and
smoothed spectral sums.

All catalog eigenvalues are integers (|k|^2, l(l+1), k(k+2)), so tables store them
as int64 and counting is exact.  A table is a flat list of rows (t, weight, mult)
sorted by t and then by weight, plus the distinct eigenvalues with their total
multiplicities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .actions import CharacterLabel, GroupActionSpec, LensAction, Sphere2Action, TorusAction

DEFAULT_CAP = 2 * 10**7


class SpectrumTooLarge(MemoryError):
    """Predicted table size exceeds the configured cap."""


class IncompleteSpectrum(ValueError):
    """A query needs eigenvalues beyond the completeness bound of the table."""


@dataclass(frozen=True)
class SpectrumTable:
    key: str
    group_id: str
    lambda_max: float
    eigenvalues: np.ndarray  # distinct, sorted, int64
    total_mult: np.ndarray
    row_t: np.ndarray  # index into eigenvalues
    row_weight: np.ndarray  # (R,) or (R, 2)
    row_mult: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def n_rows(self):
        return len(self.row_mult)

    def _mask(self, chi: CharacterLabel):
        if chi.group_id != self.group_id:
            raise ValueError(f"character of {chi.group_id} on a {self.group_id} table")
        if self.row_weight.ndim == 1:
            return self.row_weight == chi.weight
        w = chi.weight
        return (self.row_weight[:, 0] == w[0]) & (self.row_weight[:, 1] == w[1])

    def isotypic(self, chi: CharacterLabel):
        """Eigenvalues t (ascending) with mult_chi(t) > 0 and those multiplicities."""
        m = self._mask(chi)
        return self.eigenvalues[self.row_t[m]], self.row_mult[m]

    def mult(self, t, chi: CharacterLabel) -> int:
        ts, ms = self.isotypic(chi)
        i = np.searchsorted(ts, t)
        return int(ms[i]) if i < len(ts) and ts[i] == t else 0

    def weights(self):
        if self.row_weight.ndim == 1:
            return sorted({int(w) for w in np.unique(self.row_weight)})
        return sorted({tuple(int(v) for v in w) for w in np.unique(self.row_weight, axis=0)})

    def entries(self):
        """Iterate (t, total multiplicity, {weight: mult}) in ascending t (small tables)."""
        bounds = np.searchsorted(self.row_t, np.arange(len(self.eigenvalues) + 1))
        for i, t in enumerate(self.eigenvalues):
            lo, hi = bounds[i], bounds[i + 1]
            ws = self.row_weight[lo:hi]
            keys = [int(w) if np.ndim(w) == 0 else tuple(int(v) for v in w) for w in ws]
            yield int(t), int(self.total_mult[i]), dict(zip(keys, (int(v) for v in self.row_mult[lo:hi])))

    def rows(self, weights=None):
        """(t, total_mult, weight, mult_weight) rows, optionally restricted to some weights."""
        keep = np.ones(self.n_rows, dtype=bool)
        if weights is not None:
            keep[:] = False
            for w in weights:
                keep |= self._mask(CharacterLabel(self.group_id, w))
        t = self.eigenvalues[self.row_t[keep]]
        tot = self.total_mult[self.row_t[keep]]
        return t, tot, self.row_weight[keep], self.row_mult[keep]


# ------------------------------------------------------------------------ builders


def _sum_of_squares_counts(j: int, L: int) -> np.ndarray:
    """r_j(m) = #{k in Z^j : |k|^2 = m} for 0 <= m <= L."""
    r = np.zeros(L + 1, dtype=np.int64)
    r[0] = 1
    K = int(math.isqrt(L))
    for _ in range(j):
        nxt = np.zeros_like(r)
        for a in range(-K, K + 1):
            s = a * a
            nxt[s:] += r[: L + 1 - s]
        r = nxt
    return r


def _ball_count(n, L):
    return float(np.pi ** (n / 2) / special.gamma(n / 2 + 1) * (L + 1) ** (n / 2) + 2 * (2 * np.sqrt(L + 1) + 1) ** (n - 1))


def _pack(key, group_id, lambda_max, t_rows, w_rows, m_rows):
    keep = m_rows > 0
    t_rows, w_rows, m_rows = t_rows[keep], w_rows[keep], m_rows[keep]
    if w_rows.ndim == 1:
        order = np.lexsort((w_rows, t_rows))
    else:
        order = np.lexsort((w_rows[:, 1], w_rows[:, 0], t_rows))
    t_rows, w_rows, m_rows = t_rows[order], w_rows[order], m_rows[order]
    eig, row_t = np.unique(t_rows, return_inverse=True)
    total = np.bincount(row_t, weights=m_rows).astype(np.int64)
    arrays = (eig.astype(np.int64), total, row_t.astype(np.int64), w_rows.astype(np.int64), m_rows.astype(np.int64))
    for a in arrays:
        a.setflags(write=False)
    return SpectrumTable(key, group_id, float(lambda_max), *arrays)


def _torus(spec: TorusAction, L: int, lambda_max, cap):
    n, d = spec.dim_M, spec.dim_G
    if _ball_count(n, L) > cap:
        raise SpectrumTooLarge(
            f"{spec.key} up to lambda = {lambda_max:g} needs about {_ball_count(n, L):.3g} lattice points (cap {cap:.3g})"
        )
    r = _sum_of_squares_counts(n - d, L)
    nz = np.nonzero(r)[0]
    K = int(math.isqrt(L))
    ts, ws, ms = [], [], []
    ks = np.arange(-K, K + 1)
    heads = np.stack(np.meshgrid(*([ks] * d), indexing="ij"), axis=-1).reshape(-1, d)
    for head in heads:
        s = int(np.dot(head, head))
        if s > L:
            continue
        m = nz[: np.searchsorted(nz, L - s, side="right")]
        ts.append(m + s)
        ws.append(np.broadcast_to(head, (len(m), d)))
        ms.append(r[m])
    t = np.concatenate(ts)
    w = np.concatenate(ws)
    w = w[:, 0] if d == 1 else w
    return _pack(spec.key, spec.group_id, lambda_max, t, w, np.concatenate(ms))


def _sphere2(spec: Sphere2Action, lambda_max, cap):
    L = int((np.sqrt(1 + 4 * lambda_max) - 1) // 2)
    while (L + 1) * (L + 2) <= lambda_max:
        L += 1
    while L * (L + 1) > lambda_max:
        L -= 1
    if (L + 1) ** 2 > cap:
        raise SpectrumTooLarge(f"s2-rot up to lambda = {lambda_max:g} needs {(L + 1) ** 2} rows (cap {cap:.3g})")
    sizes = 2 * np.arange(L + 1) + 1
    l = np.repeat(np.arange(L + 1), sizes)
    starts = np.repeat(np.r_[0, np.cumsum(sizes)[:-1]], sizes)
    m = np.arange(len(l)) - starts - l
    return _pack(spec.key, spec.group_id, lambda_max, l * (l + 1), m, np.ones_like(l))


def lens_invariant_count(k: int, p: int) -> int:
    """#{j in {-k, -k+2, ..., k} : j = 0 mod p}, the left Z_p-invariants of V_k."""
    j = np.arange(-k, k + 1, 2)
    return int(np.sum(j % p == 0))


def _lens(spec: LensAction, lambda_max, cap):
    K = int(math.isqrt(int(lambda_max) + 1)) - 1
    while (K + 1) * (K + 3) <= lambda_max:
        K += 1
    while K * (K + 2) > lambda_max:
        K -= 1
    rows = (K + 1) * (K + 2) // 2
    if rows > cap:
        raise SpectrumTooLarge(f"{spec.key} up to lambda = {lambda_max:g} needs {rows} rows (cap {cap:.3g})")
    p = spec.p
    ks = np.arange(K + 1)
    j_lo = -ks
    # invariant counts: j ranges over -k..k step 2; count multiples of p
    c = np.array([lens_invariant_count(int(k), p) for k in ks], dtype=np.int64)
    k_rows = np.repeat(ks, ks + 1)
    offs = np.arange(len(k_rows)) - np.repeat(np.r_[0, np.cumsum(ks + 1)[:-1]], ks + 1)
    w = np.repeat(j_lo, ks + 1) + 2 * offs
    return _pack(spec.key, spec.group_id, lambda_max, k_rows * (k_rows + 2), w, c[k_rows])


def build_spectrum(spec: GroupActionSpec, lambda_max: float, cap: float = DEFAULT_CAP) -> SpectrumTable:
    """Exact spectrum of the Laplacian with isotypic multiplicities up to lambda_max."""
    if not lambda_max >= 1:
        raise ValueError("lambda_max must be at least 1")
    if spec.metric_scale != 1.0:
        raise NotImplementedError("spectra are tabulated for the unit metrics")
    if not np.isfinite(lambda_max) or lambda_max > 9e15:
        raise SpectrumTooLarge(f"lambda_max = {lambda_max:g} is beyond exact integer range")
    if isinstance(spec, TorusAction):
        return _torus(spec, int(np.floor(lambda_max)), lambda_max, cap)
    if isinstance(spec, Sphere2Action):
        return _sphere2(spec, lambda_max, cap)
    if isinstance(spec, LensAction):
        return _lens(spec, lambda_max, cap)
    raise TypeError("not a catalog action")


# ------------------------------------------------------------------------- counting


@dataclass(frozen=True)
class CountingResult:
    lambdas: np.ndarray
    values: np.ndarray
    chi: CharacterLabel

    @property
    def mus(self):
        return np.sqrt(self.lambdas)


def count_reduced(table: SpectrumTable, chi: CharacterLabel, grid) -> CountingResult:
    """N_chi(lambda) = d_chi * sum_{t <= lambda} mult_chi(t) on the given grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size and grid.max() > table.lambda_max:
        raise IncompleteSpectrum(f"grid reaches {grid.max():g} > lambda_max = {table.lambda_max:g}")
    ts, ms = table.isotypic(chi)
    cum = np.r_[0, np.cumsum(ms)]
    idx = np.searchsorted(ts, grid, side="right")
    vals = chi.d_chi * cum[idx]
    return CountingResult(grid, vals.astype(np.int64), chi)


def count_total(table: SpectrumTable, grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.size and grid.max() > table.lambda_max:
        raise IncompleteSpectrum(f"grid reaches {grid.max():g} > lambda_max = {table.lambda_max:g}")
    cum = np.r_[0, np.cumsum(table.total_mult)]
    return cum[np.searchsorted(table.eigenvalues, grid, side="right")]


# ---------------------------------------------------------------- smoothed sums


@dataclass(frozen=True)
class SmoothedCountConfig:
    """Test function rho^ (even, nonnegative) with declared support radius.

    Normalization convention: rho^(s) = int rho(t) e^{-its} dt, hence
    int rho^ = 2 pi rho(0).  `integral` records int rho^.
    """

    rho_hat: Callable
    support_radius: float
    integral: float
    cdf: Callable | None = None
    name: str = "custom"

    def __post_init__(self):
        s = np.linspace(0, 4 * self.support_radius, 2001)
        v = np.asarray(self.rho_hat(s))
        if np.any(v < 0):
            raise ValueError("rho_hat must be nonnegative")
        if np.any(np.abs(v[s > self.support_radius]) >= 1e-12):
            raise ValueError("rho_hat is not negligible beyond its support radius")

    @property
    def rho0(self):
        return self.integral / (2 * np.pi)

    def tail_cdf(self, u):
        """int_{-inf}^{u} rho^(s) ds."""
        u = np.asarray(u, dtype=float)
        if self.cdf is not None:
            return self.cdf(u)
        R = self.support_radius
        out = np.empty_like(u)
        for i, v in np.ndenumerate(u):
            if v <= -R:
                out[i] = 0.0
            elif v >= R:
                out[i] = self.integral
            else:
                out[i] = integrate.quad(self.rho_hat, -R, v, limit=200)[0]
        return out


def gaussian_config(width: float = 1.0, cutoff: float = 12.0) -> SmoothedCountConfig:
    c = 1.0 / (np.sqrt(2 * np.pi) * width)

    def rho_hat(s):
        return c * np.exp(-0.5 * (np.asarray(s, dtype=float) / width) ** 2)

    return SmoothedCountConfig(
        rho_hat, cutoff * width, 1.0, lambda u: special.ndtr(np.asarray(u) / width), f"gaussian(w={width:g})"
    )


def plateau_config(inner: float, outer: float, height: float | None = None) -> SmoothedCountConfig:
    """Plateau bump rho^; by default scaled to unit integral."""
    from .functions import plateau_bump

    h = 1.0 / (inner + outer) if height is None else height

    def rho_hat(s):
        return h * plateau_bump(s, 0.0, inner, outer)

    return SmoothedCountConfig(rho_hat, outer, h * (inner + outer), None, f"plateau({inner:g},{outer:g})")


@dataclass(frozen=True)
class SmoothedValue:
    value: float
    truncation_bound: float
    terms: int


def smoothed_count(table: SpectrumTable, chi: CharacterLabel, config: SmoothedCountConfig, mu: float,
                   weighting: str = "distinct") -> SmoothedValue:
    """sum_j m_chi(mu_j) rho^(mu - mu_j), mu_j = sqrt(t_j), truncated at the support radius.

    weighting="distinct" sums d_chi mult_chi(t) over distinct eigenvalues;
    weighting="repeated" sums m^Q = d_chi mult_chi / dim E over eigenvalues listed
    with multiplicity (both agree for abelian groups).
    """
    R = config.support_radius
    if (mu + R) ** 2 > table.lambda_max:
        raise IncompleteSpectrum(f"mu + support = {mu + R:g} exceeds sqrt(lambda_max)")
    ts, ms = table.isotypic(chi)
    lo = np.searchsorted(ts, max(mu - R, 0.0) ** 2, side="left")
    hi = np.searchsorted(ts, (mu + R) ** 2, side="right")
    t = ts[lo:hi].astype(float)
    m = ms[lo:hi].astype(float) * chi.d_chi
    mu_j = np.sqrt(t)
    if weighting == "distinct":
        val = float(np.sum(m * config.rho_hat(mu - mu_j)))
    elif weighting == "repeated":
        idx = np.searchsorted(table.eigenvalues, ts[lo:hi])
        dimE = table.total_mult[idx]
        rep_mu = np.repeat(mu_j, dimE)
        rep_w = np.repeat(m / dimE, dimE)
        val = float(np.sum(rep_w * config.rho_hat(mu - rep_mu)))
    else:
        raise ValueError("weighting must be 'distinct' or 'repeated'")
    # everything omitted sits where rho^ < rho^(R); bound by the whole table weight
    bound = float(config.rho_hat(np.array([R]))[0]) * float(chi.d_chi * np.sum(ms)) * 2.0
    return SmoothedValue(val, bound, int(hi - lo))


def smoothed_counting_function(table, chi, config: SmoothedCountConfig, mu: float) -> float:
    """H(mu) = int N_chi(s^2) rho^(mu - s) ds = sum_j m_j * CDF(mu - mu_j)."""
    R = config.support_radius
    if (mu + R) ** 2 > table.lambda_max:
        raise IncompleteSpectrum(f"mu + support = {mu + R:g} exceeds sqrt(lambda_max)")
    ts, ms = table.isotypic(chi)
    lo = np.searchsorted(ts, max(mu - R, 0.0) ** 2, side="left")
    hi = np.searchsorted(ts, (mu + R) ** 2, side="right")
    below = float(np.sum(ms[:lo])) * config.integral
    mu_j = np.sqrt(ts[lo:hi].astype(float))
    window = float(np.sum(ms[lo:hi] * config.tail_cdf(mu - mu_j)))
    return chi.d_chi * (below + window)


def tauberian_remainder(table, chi, config, mus):
    """R(mu) = N_chi(mu^2) - H(mu) on a grid of mu."""
    mus = np.asarray(mus, dtype=float)
    N = count_reduced(table, chi, mus**2).values.astype(float)
    H = np.array([smoothed_counting_function(table, chi, config, m) for m in mus])
    return N - H
