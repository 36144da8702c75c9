"""Norms of the inverse arc layer operators over tau, for a few potentials."""
import argparse
import math
from dataclasses import dataclass

from cylbem import CylinderModel, domain_from_model, eigensystem, tau_grid, uniform_bound_sweep


@dataclass
class Config:
    tmax: float = 40.0
    step: float = 0.5
    arcs: tuple = ((0.0, math.pi),)


POTENTIALS = {
    "V=1": CylinderModel(),
    "V=1+cos": CylinderModel(fourier_cos=(1.0, 1.0)),
    "V=2+cos+sin2": CylinderModel(fourier_cos=(2.0, 1.0), fourier_sin=(0.0, 0.5)),
}


def main(cfg):
    for name, model in POTENTIALS.items():
        rep = uniform_bound_sweep(domain_from_model(model, cfg.arcs), eigensystem(model),
                                  tau_grid(cfg.tmax, cfg.step))
        print(f"{name}: sup |S^-1| = {rep.sup_S_inv:.6f}  sup |(I/2 + K)^-1| = {rep.sup_halfK_inv:.6f}")
        for row in rep.rows()[len(rep.taus) // 2::8]:
            print(f"   tau={row['tau']:6.2f}  |S^-1|={row['norm_S_inv']:.5f}  "
                  f"|(I/2+K)^-1|={row['norm_halfK_inv']:.5f}  cond S={row['cond_S']:.3g}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tmax", type=float, default=Config.tmax)
    ap.add_argument("--step", type=float, default=Config.step)
    a = ap.parse_args()
    main(Config(tmax=a.tmax, step=a.step))
