"""Benchmark the hot lattice kernels: numba-jitted vs pure-numpy fallback.

The kernel path is chosen at import time from CP1LAX_DISABLE_NUMBA, so each
measurement runs in a subprocess.  Usage: python benchmarks/bench_lattice.py
"""
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, os, time
import numpy as np
from cp1lax import HAVE_NUMBA
from cp1lax import dynamics as dyn, lax
from cp1lax.curve import ModelParams
from cp1lax.geometry import geometry_tensors
from cp1lax.lie import make_algebra

su2 = make_algebra("su(2)")
par = ModelParams(p1=2, p2=1, eps=0.2)
geo = geometry_tensors(par, su2, 256)
coeffs = dyn.derive_eom_coefficients(par, su2, geo)

n = int(os.environ.get("BENCH_N", "192"))
init = dyn.initial_random_fourier(su2, coeffs, n, 1.0, amplitude=0.18, seed=5)

# warm-up (jit compile) on a small march
dyn.solve(dyn.initial_random_fourier(su2, coeffs, 16, 1.0, seed=1), 7,
          coeffs, su2, 1/16, 1/16)

t0 = time.perf_counter()
field = dyn.solve(init, n - 1, coeffs, su2, 1.0/n, 1.0/n)
t_march = time.perf_counter() - t0

zs = [par.p1 + 0.5*par.eps, par.p1 - 0.45*par.eps, par.p1 + 0.4j*par.eps]
t0 = time.perf_counter()
table = lax.charge_scan(field, par, zs, row_stride=1)
t_scan = time.perf_counter() - t0

print(json.dumps({"numba": bool(HAVE_NUMBA), "n": n,
                  "march_s": t_march, "scan_s": t_scan,
                  "max_drift": max(r[4] for r in table)}))
"""


def run_case(disable_numba: bool, n: int) -> dict:
    env = dict(os.environ)
    env["CP1LAX_DISABLE_NUMBA"] = "1" if disable_numba else "0"
    env["BENCH_N"] = str(n)
    out = subprocess.run([sys.executable, "-c", _WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 192
    rows = [run_case(False, n), run_case(True, n)]
    print(f"{'path':<12} {'march [s]':>10} {'row scan [s]':>13} {'max drift':>11}")
    for r in rows:
        label = "numba" if r["numba"] else "numpy"
        print(f"{label:<12} {r['march_s']:>10.3f} {r['scan_s']:>13.3f} "
              f"{r['max_drift']:>11.2e}")
    if rows[0]["numba"] and not rows[1]["numba"]:
        print(f"march speedup: {rows[1]['march_s'] / rows[0]['march_s']:.2f}x, "
              f"scan speedup: {rows[1]['scan_s'] / rows[0]['scan_s']:.2f}x")
    else:
        print("note: numba unavailable; both rows ran the numpy fallback")


if __name__ == "__main__":
    main()
