"""Equivariant Weyl law: predicted leading coefficient, empirical growth and remainder diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .actions import CharacterLabel, GroupActionSpec, TorusAction, restriction_multiplicity
from .spectral import IncompleteSpectrum, SpectrumTable, build_spectrum, count_reduced, count_total
from .symplectic import ReducedVolumeEstimate, exact_reduced_volume, reduced_volume, unit_sphere_area


class UnsupportedError(ValueError):
    """Request outside the hypotheses of the equivariant Weyl law (n - kappa = 0)."""


def default_tolerance(spec: GroupActionSpec) -> float:
    return 0.02 if isinstance(spec, TorusAction) else 0.05


@dataclass(frozen=True)
class WeylPrediction:
    chi: CharacterLabel
    d_chi: int
    restriction_mult: int
    kappa: int
    n: int
    reduced_volume: ReducedVolumeEstimate
    leading_coefficient: float
    coefficient_stderr: float
    growth_exponent: float
    log_power_bound: int
    log_power_refined: int
    m_order: int = 2

    @property
    def remainder_exponent(self):
        return (self.n - self.kappa - 1) / self.m_order


def predict(spec: GroupActionSpec, chi: CharacterLabel, volume: ReducedVolumeEstimate) -> WeylPrediction:
    """C = d_chi [pi_chi|H : 1] vol / ((n - kappa) (2 pi)^{n - kappa}), exponent (n - kappa)/2."""
    info = spec.orbit_type_info()
    n, k = spec.dim_M, info.kappa
    if n - k < 1:
        raise UnsupportedError(f"{spec.key}: n - kappa = {n - k}; the law needs n - kappa >= 1")
    r = restriction_multiplicity(chi, info.principal_isotropy)
    factor = chi.d_chi * r / ((n - k) * (2 * np.pi) ** (n - k))
    Lam = info.Lambda
    return WeylPrediction(
        chi, chi.d_chi, r, k, n, volume, factor * volume.value, factor * volume.standard_error,
        (n - k) / 2, Lam, Lam - 1 if n - k >= 2 else Lam,
    )


def exact_volume_estimate(spec: GroupActionSpec) -> ReducedVolumeEstimate:
    return ReducedVolumeEstimate(exact_reduced_volume(spec), 0.0, 0, "grid", "closed-form")


@dataclass(frozen=True)
class RemainderDiagnostics:
    window_lambdas: np.ndarray
    window_sup: np.ndarray
    envelope_exponent: float
    envelope_log_power: float
    bound_exponent: float
    slack: float
    log_power_bounds: tuple

    @property
    def passed(self):
        return bool(self.envelope_exponent <= self.bound_exponent + self.slack)


@dataclass(frozen=True)
class WeylVerdict:
    action: str
    chi: CharacterLabel
    lambda_max: float
    prediction: WeylPrediction
    empirical_coefficient: float
    coefficient_grid: np.ndarray
    ratio_grid: np.ndarray
    exponent_fit: float
    tolerance: float
    diagnostics: RemainderDiagnostics
    coefficient_ok: bool
    notes: tuple = field(default=())

    @property
    def passed(self):
        return bool(self.coefficient_ok and self.diagnostics.passed)

    def as_json(self):
        p = self.prediction
        return {
            "action": self.action,
            "weight": self.chi.weight if self.chi.group_id == "Circle" else list(self.chi.weight),
            "lambda_max": self.lambda_max,
            "predicted": p.leading_coefficient,
            "empirical": self.empirical_coefficient,
            "stderr": p.coefficient_stderr,
            "growth_exponent": p.growth_exponent,
            "exponent_fit": self.exponent_fit,
            "tolerance": self.tolerance,
            "restriction_mult": p.restriction_mult,
            "reduced_volume": p.reduced_volume.value,
            "envelope_exponent": self.diagnostics.envelope_exponent,
            "envelope_bound": self.diagnostics.bound_exponent + self.diagnostics.slack,
            "envelope_log_power": self.diagnostics.envelope_log_power,
            "log_power_bounds": list(self.diagnostics.log_power_bounds),
            "coefficient_ok": self.coefficient_ok,
            "envelope_ok": self.diagnostics.passed,
            "pass": self.passed,
        }


def fit_exponent(lambdas, values):
    """Least-squares slope of log N against log lambda (positive values only)."""
    lambdas = np.asarray(lambdas, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = values > 0
    if ok.sum() < 2:
        return float("nan")
    A = np.vstack([np.log(lambdas[ok]), np.ones(ok.sum())]).T
    return float(np.linalg.lstsq(A, np.log(values[ok]), rcond=None)[0][0])


def residual_envelope(table: SpectrumTable, chi, coefficient, exponent, lambda_max, windows=20):
    """sup |N_chi(lambda) - C lambda^e| over dyadic windows (lambda_max 2^{-j-1}, lambda_max 2^{-j}]."""
    ts, ms = table.isotypic(chi)
    ts = ts.astype(float)
    cum = chi.d_chi * np.cumsum(ms)
    lam = []
    sup = []
    for j in range(windows):
        hi = lambda_max * 2.0**-j
        lo = hi / 2
        i0 = np.searchsorted(ts, lo, side="right")
        i1 = np.searchsorted(ts, hi, side="right")
        pred = coefficient * ts[i0:i1] ** exponent
        after = cum[i0:i1]
        before = after - chi.d_chi * ms[i0:i1]
        cands = [np.abs(after - pred), np.abs(before - pred)]
        # window ends
        n_lo = cum[i0 - 1] if i0 > 0 else 0
        n_hi = cum[i1 - 1] if i1 > 0 else 0
        cands.append(np.array([abs(n_lo - coefficient * lo**exponent), abs(n_hi - coefficient * hi**exponent)]))
        lam.append(hi)
        sup.append(float(max(np.max(c) if len(c) else 0.0 for c in cands)))
    return np.array(lam), np.array(sup)


def _envelope_fit(lam, sup):
    ok = (sup > 0) & (lam >= 2.0)  # below lambda = 2 the windows are empty and log log is undefined
    if ok.sum() < 3:
        return float("nan"), float("nan")
    x = np.log(lam[ok])
    y = np.log(sup[ok])
    e = np.linalg.lstsq(np.vstack([x, np.ones_like(x)]).T, y, rcond=None)[0][0]
    lg = np.log(x)
    coef = np.linalg.lstsq(np.vstack([x, lg, np.ones_like(x)]).T, y, rcond=None)[0]
    return float(e), float(coef[1])


def verify(spec: GroupActionSpec, chi: CharacterLabel, lambda_max: float, prediction: WeylPrediction | None = None,
           table: SpectrumTable | None = None, tolerance: float | None = None, slack: float = 0.1,
           volume_samples: int = 100_000, seed: int = 0, windows: int = 20, threads: int = 1) -> WeylVerdict:
    """Compare N_chi against the predicted law and diagnose the remainder envelope."""
    if windows < 20:
        raise ValueError("the envelope fit needs at least 20 dyadic points")
    if table is None:
        table = build_spectrum(spec, lambda_max)
    if table.lambda_max < lambda_max:
        raise IncompleteSpectrum(f"table complete to {table.lambda_max:g} < {lambda_max:g}")
    if prediction is None:
        vol = reduced_volume(spec, volume_samples, seed, threads=threads)
        prediction = predict(spec, chi, vol)
    tol = default_tolerance(spec) if tolerance is None else tolerance
    e = prediction.growth_exponent
    C = prediction.leading_coefficient

    dyadic = lambda_max * 2.0 ** -np.arange(windows)
    N_dy = count_reduced(table, chi, dyadic).values.astype(float)
    coef_grid = N_dy / dyadic**e
    N_max = coef_grid[0]
    if C > 0:
        ratio = coef_grid / C
        coefficient_ok = abs(N_max / C - 1) <= tol
    else:
        ratio = np.full_like(coef_grid, np.nan)
        coefficient_ok = abs(N_max) <= tol

    geo = np.geomspace(lambda_max * 1e-3, lambda_max, 24)
    expo = fit_exponent(geo, count_reduced(table, chi, geo).values)

    lam, sup = residual_envelope(table, chi, C, e, lambda_max, windows)
    env, logp = _envelope_fit(lam, sup)
    diag = RemainderDiagnostics(lam, sup, env, logp, prediction.remainder_exponent, slack,
                                (prediction.log_power_bound, prediction.log_power_refined))
    notes = ()
    if C == 0:
        notes = ("zero restriction multiplicity: leading coefficient vanishes",)
        if np.all(sup == 0):
            diag = RemainderDiagnostics(lam, sup, float("-inf"), float("nan"), prediction.remainder_exponent, slack,
                                        diag.log_power_bounds)
    return WeylVerdict(spec.key, chi, float(lambda_max), prediction, float(N_max), coef_grid, ratio, expo, tol, diag,
                       bool(coefficient_ok), notes)


@dataclass(frozen=True)
class FullLawReport:
    action: str
    lambda_max: float
    count: int
    predicted: float
    ratio: float
    tolerance: float
    insufficient_range: bool

    @property
    def passed(self):
        return (not self.insufficient_range) and abs(self.ratio - 1) <= self.tolerance

    def as_json(self):
        return {
            "action": self.action,
            "lambda_max": self.lambda_max,
            "count": self.count,
            "predicted": self.predicted,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "insufficient_range": self.insufficient_range,
            "pass": self.passed,
        }


def full_law_check(spec: GroupActionSpec, lambda_max: float, table: SpectrumTable | None = None,
                   tolerance: float | None = None, min_lambda: float = 100.0) -> FullLawReport:
    """N(lambda) against vol(S*M) / (n (2 pi)^n) lambda^{n/2}."""
    n = spec.dim_M
    tol = (0.01 if isinstance(spec, TorusAction) else 0.02) if tolerance is None else tolerance
    if lambda_max < min_lambda:
        return FullLawReport(spec.key, float(lambda_max), 0, float("nan"), float("nan"), tol, True)
    if table is None:
        table = build_spectrum(spec, lambda_max)
    N = int(count_total(table, [lambda_max])[0])
    vol_sm = spec.volume() * unit_sphere_area(n)
    pred = vol_sm / (n * (2 * np.pi) ** n) * lambda_max ** (n / 2)
    return FullLawReport(spec.key, float(lambda_max), N, float(pred), float(N / pred), tol, False)


@dataclass(frozen=True)
class SmoothedReport:
    action: str
    chi: CharacterLabel
    mus: np.ndarray
    values: np.ndarray
    predicted: np.ndarray
    band: tuple = (0.9, 1.1)

    @property
    def ratio(self):
        return self.values / self.predicted

    @property
    def passed(self):
        r = self.ratio
        return bool(np.all((r >= self.band[0]) & (r <= self.band[1])))


def smoothed_check(spec: GroupActionSpec, chi: CharacterLabel, table: SpectrumTable, mus, volume: float,
                   config=None, band=(0.9, 1.1)) -> SmoothedReport:
    """sum_j m_chi(mu_j) rho^(mu - mu_j) against d_chi L rho(0) (mu / 2 pi)^{n - kappa - 1}, L = [pi_chi|H : 1] vol."""
    from .spectral import gaussian_config, smoothed_count

    cfg = gaussian_config() if config is None else config
    info = spec.orbit_type_info()
    n, k = spec.dim_M, info.kappa
    L = restriction_multiplicity(chi, info.principal_isotropy) * volume
    mus = np.asarray(mus, dtype=float)
    vals = np.array([smoothed_count(table, chi, cfg, m).value for m in mus])
    pred = chi.d_chi * L * cfg.rho0 * (mus / (2 * np.pi)) ** (n - k - 1)
    return SmoothedReport(spec.key, chi, mus, vals, pred, tuple(band))
