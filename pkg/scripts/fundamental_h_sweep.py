"""Residual of int E(p, q) (Delta + V) psi(q) dq = psi(p) as the grid is refined."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from cylbem import CylinderModel, GreenKernel, eigensystem, verify_fundamental


@dataclass
class Config:
    radius: float = 1.5
    hs: tuple = (1 / 16, 1 / 32, 1 / 64, 1 / 128)
    variable: bool = False


def main(cfg):
    model = CylinderModel(fourier_cos=(1.0, 0.5)) if cfg.variable else CylinderModel()
    gk = GreenKernel(eigensystem(model))
    p = np.array([0.0, 0.25 * model.circumference])
    prev = None
    for h in cfg.hs:
        r = verify_fundamental(gk, model, p, p, cfg.radius, h)
        rate = "" if prev is None else f"{math.log2(prev / r):.2f}"
        print(f"h=1/{round(1 / h):<4d} residual={r:.3e} rate={rate}")
        prev = r


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=float, default=Config.radius)
    ap.add_argument("--variable", action="store_true", help="use V = 1 + 0.5 cos(theta)")
    a = ap.parse_args()
    main(Config(radius=a.radius, variable=a.variable))
