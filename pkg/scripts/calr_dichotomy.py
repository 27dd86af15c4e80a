"""Anomalous localized resonance of a core-shell device.

Compares sources whose modal coefficients decay like ``(r_e / r_s)^n`` with
``r_s`` inside and outside the critical radius.
"""
import argparse
from dataclasses import dataclass, field

import numpy as np

from elastic_plasmon.cloaking import ShellConfig, calr_verdict, critical_radius, decaying_source
from elastic_plasmon.kernels import LameParams


@dataclass
class DeviceSetup:
    lam: float = 2.0
    mu: float = 1.0
    r_i: float = 0.5
    r_e: float = 1.0
    n_max: int = 70
    factors: list = field(default_factory=lambda: [0.8, 0.95, 1.05, 1.5])
    deltas: np.ndarray = field(default_factory=lambda: np.logspace(-2, -8, 13))


def run(setup: DeviceSetup):
    bg = LameParams.background(setup.lam, setup.mu)
    rstar = critical_radius(setup.r_i, setup.r_e)
    template = ShellConfig.preset(setup.r_i, setup.r_e, setup.deltas[0], bg)
    out = []
    for k in setup.factors:
        r_s = k * rstar
        rep = calr_verdict(decaying_source(r_s, setup.r_e, setup.n_max), r_s, template, setup.deltas)
        out.append((k, r_s, rep))
    return rstar, out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--r-i", type=float, default=0.5)
    p.add_argument("--n-max", type=int, default=70)
    p.add_argument("--curves", action="store_true", help="print energy against delta for each source")
    args = p.parse_args()
    rstar, results = run(DeviceSetup(r_i=args.r_i, n_max=args.n_max))
    print(f"critical radius r* = {rstar:.6f}")
    print(f"{'r_s/r*':>7} {'resonant':>9} {'E ratio':>12} {'field ratio':>12} {'variation':>10}")
    for k, _, rep in results:
        print(f"{k:7.2f} {str(rep.resonant):>9} {rep.energy_ratio:12.4e} {rep.field_ratio:12.4e} {rep.field_variation:10.4f}")
    if args.curves:
        for k, _, rep in results:
            print(f"\nr_s/r* = {k}")
            for pt in rep.points:
                print(f"  {pt.delta:10.3e} {pt.energy:14.6e}")


if __name__ == "__main__":
    main()
