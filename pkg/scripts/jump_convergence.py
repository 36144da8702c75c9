"""Offset-curve limits of the layer potentials on a circle, as n and t vary."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from cylbem import ClosedCurve, CylinderModel, GreenKernel, assemble, discretize, eigensystem
from cylbem.layerops import jump_check


@dataclass
class Config:
    radius: float = 0.5
    ns: tuple = (64, 128, 256)
    ts: tuple = (8e-3, 4e-3, 2e-3, 1e-3)


def main(cfg):
    gk = GreenKernel(eigensystem(CylinderModel()))
    curve = ClosedCurve.circle((0.0, math.pi), cfg.radius)
    print(f"{'n':>5} {'t':>8} {'relation':>9} {'error':>10} {'limit':>10} {'order':>6}")
    for n in cfg.ns:
        ops = assemble(gk, discretize(curve, n))
        s = 2 * np.pi * np.arange(n) / n
        f = np.exp(np.cos(s)) + 0.5 * np.sin(2 * s)
        for r in jump_check(ops, f, cfg.ts):
            order = "" if r["order"] is None else f"{r['order']:.3f}"
            print(f"{n:5d} {r['t']:8.1e} {r['relation']:>9} {r['error']:10.3e} "
                  f"{r['limit_error']:10.3e} {order:>6}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=float, default=Config.radius)
    ap.add_argument("--n", type=int, nargs="+", default=list(Config.ns))
    a = ap.parse_args()
    main(Config(radius=a.radius, ns=tuple(a.n)))
