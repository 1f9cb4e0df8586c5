"""Least-squares fits of c * s^alpha * log(1/s)^k models, plus (mu, re, im) CSV files.

s is the small parameter: s = mu in the small-parameter convention, s = 1/mu in the
large-parameter one, so every model term decays or grows like a power of s.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MAX_COND = 1e8


class FitError(ValueError):
    """Ill-conditioned design, too few samples, or malformed input."""


@dataclass(frozen=True)
class AsymptoticFit:
    terms: tuple           # ((Fraction alpha, int k), ...)
    coefficients: np.ndarray
    residual: float        # weighted relative residual norm
    cond: float
    convention: str
    source: str = "fit"
    samples: int = 0
    stderr: np.ndarray | None = None

    def coefficient(self, alpha, k):
        key = (Fraction(alpha).limit_denominator(1000), int(k))
        for i, t in enumerate(self.terms):
            if t == key:
                return complex(self.coefficients[i])
        raise KeyError(key)

    def evaluate(self, mu):
        s = _small(np.asarray(mu, dtype=float), self.convention)
        out = np.zeros(np.shape(s), dtype=complex)
        for (a, k), c in zip(self.terms, self.coefficients):
            out = out + c * s ** float(a) * np.log(1.0 / s) ** k
        return out

    def as_json(self):
        return {
            "terms": [[str(a), int(k)] for a, k in self.terms],
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
            "residual": float(self.residual),
            "cond": float(self.cond),
            "convention": self.convention,
            "source": self.source,
            "samples": self.samples,
            "stderr": None if self.stderr is None else [float(v) for v in self.stderr],
        }


def _small(mu, convention):
    if convention == "small":
        return mu
    if convention == "large":
        return 1.0 / mu
    raise FitError("convention must be 'large' or 'small'")


def normalize_terms(terms):
    out = []
    for a, k in terms:
        k = int(k)
        if k < 0:
            raise FitError("log powers must be non-negative")
        out.append((Fraction(a).limit_denominator(1000) if not isinstance(a, Fraction) else a, k))
    if len(set(out)) != len(out):
        raise FitError("duplicate model terms")
    return tuple(out)


def fit_asymptotics(samples, terms, convention="small", max_cond=MAX_COND, source="fit") -> AsymptoticFit:
    """Weighted least squares of sample values against sum_j c_j s^{alpha_j} log(1/s)^{k_j}.

    Rows are weighted by 1/|value| (relative error); columns are equilibrated before the
    condition number is computed, and fits above `max_cond` are refused.
    """
    terms = normalize_terms(terms)
    mus = np.array([float(m) for m, _ in samples])
    ys = np.array([complex(v) for _, v in samples])
    if len(terms) == 0:
        raise FitError("no model terms")
    if len(mus) < 2 * len(terms):
        raise FitError(f"need at least {2 * len(terms)} samples for {len(terms)} terms, got {len(mus)}")
    if np.any(mus <= 0) or not np.all(np.isfinite(ys)):
        raise FitError("samples must have positive mu and finite values")
    s = _small(mus, convention)
    A = np.column_stack([s ** float(a) * np.log(1.0 / s) ** k for a, k in terms]).astype(complex)
    w = 1.0 / np.where(np.abs(ys) > 0, np.abs(ys), 1.0)
    Aw = A * w[:, None]
    yw = ys * w
    norms = np.linalg.norm(Aw, axis=0)
    if np.any(norms == 0):
        raise FitError("a model column vanishes on the samples")
    As = Aw / norms
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > max_cond:
        raise FitError(f"design matrix condition number {cond:.3g} exceeds {max_cond:.3g}")
    sol = np.linalg.lstsq(As, yw, rcond=None)[0] / norms
    r = Aw @ sol - yw
    res = float(np.linalg.norm(r) / np.sqrt(len(ys)))
    dof = max(len(ys) - len(terms), 1)
    cov = np.linalg.inv((As.conj().T @ As).real) * (np.vdot(r, r).real / dof)
    stderr = np.sqrt(np.abs(np.diag(cov))) / norms
    return AsymptoticFit(terms, sol, res, cond, convention, source, len(ys), stderr)


def write_samples(path, samples):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["mu", "re", "im"])
        for m, v in samples:
            v = complex(v)
            wr.writerow([repr(float(m)), repr(v.real), repr(v.imag)])


def read_samples(path):
    out = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or [f.strip() for f in rd.fieldnames[:3]] != ["mu", "re", "im"]:
            raise FitError(f"{path}: expected header mu,re,im")
        for row in rd:
            out.append((float(row["mu"]), complex(float(row["re"]), float(row["im"]))))
    return out
