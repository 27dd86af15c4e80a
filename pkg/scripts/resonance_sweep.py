"""Energy blow-up of a single inclusion tuned to a critical value.

Sweeps the loss parameter at a C1 branch point and prints the dissipated
energy, the density norm and the fitted log-log slopes.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from elastic_plasmon.kernels import LameParams
from elastic_plasmon.spectrum import BranchKind, CriticalBranch, PlasmonConfig, branch_point
from elastic_plasmon.transmission import modal_source_from_family1, resonance_sweep


@dataclass
class SweepSetup:
    lam: float = 2.0
    mu: float = 1.0
    degree: int = 3
    eps1: float = 1.0
    delta_start: float = 1e-2
    delta_stop: float = 1e-7
    num: int = 11
    detune: float = 0.0


def run(setup: SweepSetup):
    bg = LameParams.background(setup.lam, setup.mu)
    e1, e2 = branch_point(CriticalBranch(BranchKind.C1, setup.degree), setup.eps1, bg)
    e2 *= 1 + setup.detune
    src = modal_source_from_family1({(setup.degree, 0): 1.0, (2, 1): 0.5}, 1.0, bg)
    deltas = np.logspace(np.log10(setup.delta_start), np.log10(setup.delta_stop), setup.num)
    return e2, resonance_sweep(src, PlasmonConfig(e1, e2, deltas[0], bg), deltas)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--detune", type=float, default=0.0, help="relative shift of eps2 off the branch")
    p.add_argument("--num", type=int, default=11)
    args = p.parse_args()
    e2, rep = run(SweepSetup(degree=args.degree, detune=args.detune, num=args.num))
    print(f"eps2 = {e2:.10g}")
    print(f"{'delta':>12} {'energy':>14} {'|phi|':>14}")
    for r in rep.rows:
        print(f"{r.delta:12.3e} {r.energy:14.6e} {r.phi_norm:14.6e}")
    print(f"slope(energy) = {rep.slope('energy'):.4f}")
    print(f"slope(|phi|)  = {rep.slope('phi_norm'):.4f}")


if __name__ == "__main__":
    main()
