"""Compiled vs NumPy line kernels: wall time and agreement on polynomial/bump line batches.

    python benchmarks/bench_line_kernels.py [--repeats 5] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from eqweyl.functions import BumpAmplitude, PolynomialPhase, gauss_legendre
from eqweyl.oscquad import COMPILED_AVAILABLE, QuadratureSpec, integrate
from eqweyl.oscquad import backend

CASES = [
    # name, phase (coefs, exps), omega, lines
    ("fresnel-1d", ([1.0], [[2]]), 1e3, 1),
    ("xy2-lines", ([1.0], [[2, 2]]), 1e3, 512),
    ("xy2-lines-hi", ([1.0], [[2, 2]]), 1e4, 256),
    ("saddle-lines", ([1.0], [[1, 1]]), 1e3, 512),
]


def _time(fn, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_lines(repeats):
    xr, wr = gauss_legendre(6)
    rows = []
    for name, (coefs, exps), omega, lines in CASES:
        dim = len(exps[0])
        phase = PolynomialPhase(np.array(coefs), np.array(exps))
        amp = BumpAmplitude.uniform(dim)
        base = np.zeros((lines, dim))
        if dim > 1:
            base[:, 1] = np.linspace(-0.99, 0.99, lines)
        row = {"case": name, "omega": omega, "lines": lines}
        results = {}
        for be in ("python", "compiled"):
            if be == "compiled" and not COMPILED_AVAILABLE:
                continue
            t, (vals, nodes) = _time(
                lambda be=be: backend.poly_bump_lines(base, 0, -1.0, 1.0, phase, amp, omega, 12, 16, xr, wr, be),
                repeats)
            results[be] = vals
            row[f"{be}_s"] = t
            row["nodes"] = nodes
        if "compiled" in results:
            row["speedup"] = row["python_s"] / row["compiled_s"]
            row["max_abs_diff"] = float(np.max(np.abs(results["compiled"] - results["python"])))
        rows.append(row)
    return rows


def bench_integrate(repeats):
    """End-to-end integrate() on the (xy)^2 problem at mu = 1e-3 (small convention)."""
    phase = PolynomialPhase(np.array([1.0]), np.array([[2, 2]]))
    amp = BumpAmplitude.uniform(2)
    out = {}
    for be in ("python", "compiled"):
        if be == "compiled" and not COMPILED_AVAILABLE:
            continue
        spec = QuadratureSpec(mu=1e-3, convention="small", backend=be)
        t, res = _time(lambda spec=spec: integrate(phase, amp, spec), repeats)
        out[be] = {"seconds": t, "value": [res.value.real, res.value.imag], "nodes": res.nodes}
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    lines = bench_lines(args.repeats)
    print(f"compiled kernels available: {COMPILED_AVAILABLE}")
    print(f"{'case':<14}{'nodes':>12}{'python s':>12}{'compiled s':>12}{'speedup':>9}{'max diff':>11}")
    for r in lines:
        print(f"{r['case']:<14}{r['nodes']:>12d}{r['python_s']:>12.4f}{r.get('compiled_s', float('nan')):>12.4f}"
              f"{r.get('speedup', float('nan')):>9.1f}{r.get('max_abs_diff', float('nan')):>11.1e}")
    full = bench_integrate(1)
    for be, r in full.items():
        print(f"integrate (xy)^2 mu=1e-3 [{be}]: {r['seconds']:.2f} s, {r['nodes']} nodes")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"lines": lines, "integrate": full}, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
