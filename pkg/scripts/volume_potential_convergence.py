"""Interior source problem: recover a bump from (Delta + V) bump and zero boundary data."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from cylbem import (DiskSource, GreenKernel, assemble, build_model, discretize, disk_config,
                    eigensystem, smooth_bump, wellposedness_solve)


@dataclass
class Config:
    disk_radius: float = 1.2
    bump_radius: float = 0.6
    n: int = 256
    hs: tuple = (1 / 16, 1 / 32, 1 / 64)
    seed: int = 0


def main(cfg):
    model, region = build_model(disk_config(radius=cfg.disk_radius))
    gk = GreenKernel(eigensystem(model))
    ops = assemble(gk, discretize(region.curves[0], cfg.n))
    center = (0.0, math.pi)
    psi, neg_lap = smooth_bump(center, cfg.bump_radius)
    src = DiskSource(lambda q: neg_lap(q) + model.potential(q[:, 1]) * psi(q), center, cfg.bump_radius)
    rng = np.random.default_rng(cfg.seed)
    r = 0.9 * cfg.disk_radius * np.sqrt(rng.uniform(size=20))
    a = rng.uniform(0, 2 * np.pi, 20)
    probes = np.column_stack([r * np.cos(a), math.pi + r * np.sin(a)])
    for h in cfg.hs:
        sol = wellposedness_solve(ops, src, np.zeros(ops.n), h=h)
        print(f"h=1/{round(1 / h):<3d} max error {np.max(np.abs(sol(probes) - psi(probes))):.3e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=Config.n)
    a = ap.parse_args()
    main(Config(n=a.n))
