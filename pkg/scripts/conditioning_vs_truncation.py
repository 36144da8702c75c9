"""cond(-I/2 + K) on the bumped strip as the truncation half-length grows."""
import argparse
from dataclasses import dataclass

import numpy as np

from cylbem import Boundary, GreenKernel, assemble, build_model, discretize, eigensystem, strip_config


@dataclass
class Config:
    bump_height: float = -0.5
    bump_radius: float = 2.0
    h: float = 0.5
    lengths: tuple = (10.0, 15.0, 20.0, 25.0, 30.0)


def main(cfg):
    model, region = build_model(strip_config(bump_height=cfg.bump_height, bump_radius=cfg.bump_radius))
    gk = GreenKernel(eigensystem(model))
    print(f"{'L':>5} {'n':>5} {'cond':>10} {'tail bound':>11}")
    for L in cfg.lengths:
        bd = Boundary([discretize(c, cfg.h, L, decay_rate=gk.tail_bound_rate) for c in region.curves])
        ops = assemble(gk, bd)
        cond = np.linalg.cond(-0.5 * np.eye(ops.n) + ops.K)
        print(f"{L:5.1f} {ops.n:5d} {cond:10.5f} {max(d.tail_bound for d in bd.discs):11.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bump-height", type=float, default=Config.bump_height)
    ap.add_argument("--L", type=float, nargs="+", default=list(Config.lengths))
    a = ap.parse_args()
    main(Config(bump_height=a.bump_height, lengths=tuple(a.L)))
