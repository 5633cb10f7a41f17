#!/usr/bin/env python3
"""Large-lambda behaviour of the self-similar profiles.

Shoots profiles for growing lambda with the `imcf selfsim` subcommand and
reports how close each one is to a cone far out: the flux ratio r u_r / u at
the outer radius (a cone has 1), the target exponent, and the relative drift
of the slope u_r across the last decade. Nothing is asserted; the table is
the result.

    python3 experiments/lambda_limit.py --imcf build/tools/imcf
"""

import argparse
import subprocess
import tempfile
from pathlib import Path

import numpy as np


def shoot(imcf, n, lam, kappa, rmax, out):
    # exit code 3 only means the flux exponent has not settled; the samples are still written
    proc = subprocess.run(
        [imcf, "selfsim", "--n", str(n), "--lambda", repr(lam), "--kappa", repr(kappa),
         "--rmax", repr(rmax), "-o", str(out)],
        capture_output=True, text=True)
    if proc.returncode not in (0, 3) or not out.exists():
        return None, proc.stderr.strip()
    data = np.genfromtxt(out, delimiter=",", names=True)
    return data, "ok" if proc.returncode == 0 else "drifting"


def slope_drift(data):
    r, ur = data["r"], data["ur"]
    outer = ur[-1]
    inner = np.interp(r[-1] / 10.0, r, ur)
    return (outer - inner) / outer


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--imcf", default="build/tools/imcf")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--kappa", type=float, default=-1.0)
    ap.add_argument("--lambdas", default="1,2,4,8,16,32,64,128")
    ap.add_argument("--rmax", default="1e4,1e6,1e8")
    args = ap.parse_args()

    lambdas = [float(x) for x in args.lambdas.split(",")]
    radii = [float(x) for x in args.rmax.split(",")]
    print(f"n = {args.n}, kappa = {args.kappa}")
    print(f"{'lambda':>8} {'q_target':>9} {'r_max':>8} {'flux_ratio':>11} {'u_r(r_max)':>11} {'slope_drift':>12}  status")
    with tempfile.TemporaryDirectory() as tmp:
        for lam in lambdas:
            q = lam * (args.n - 1) / ((args.n - 1) * lam - 1.0)
            for rmax in radii:
                data, status = shoot(args.imcf, args.n, lam, args.kappa, rmax, Path(tmp) / "p.csv")
                if data is None:
                    print(f"{lam:8g} {q:9.5f} {rmax:8.0e} {'':>11} {'':>11} {'':>12}  {status}")
                    continue
                print(f"{lam:8g} {q:9.5f} {rmax:8.0e} {data['flux_ratio'][-1]:11.6f} "
                      f"{data['ur'][-1]:11.5f} {slope_drift(data):12.3e}  {status}")


if __name__ == "__main__":
    main()
