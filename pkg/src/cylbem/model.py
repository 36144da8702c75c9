"""The flat cylinder R x S^1 with an x-independent potential, and the region N.

Coordinates are (x, theta) with theta in [0, circumference).  The operator
is Delta + V with the positive Laplacian Delta = -d_x^2 - d_theta^2.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .boundary import ClosedCurve, GraphCurve, curve_from_dict
from .errors import (CurveIntersection, MissingExteriorPotential, ModelError,
                     NegativePotential, ZeroPotential)

_GRID = 4096


@dataclass(frozen=True)
class CylinderModel:
    circumference: float = 2 * math.pi
    fourier_cos: tuple = (1.0,)
    fourier_sin: tuple = ()
    mode_cutoff: int = 64
    end_marker: float = 1.0

    @property
    def omega(self):
        return 2 * math.pi / self.circumference

    def potential(self, theta):
        """V(theta) = a0 + sum_k a_k cos(k w theta) + b_k sin(k w theta)."""
        theta = np.asarray(theta, dtype=float)
        w = self.omega
        v = np.full_like(theta, self.fourier_cos[0] if self.fourier_cos else 0.0)
        for k, a in enumerate(self.fourier_cos[1:], start=1):
            v = v + a * np.cos(k * w * theta)
        for k, b in enumerate(self.fourier_sin, start=1):
            v = v + b * np.sin(k * w * theta)
        return v

    def potential_hat(self):
        """Complex coefficients Vhat_n with V = sum_n Vhat_n exp(i n w theta)."""
        nmax = max(len(self.fourier_cos) - 1, len(self.fourier_sin), 0)
        out = np.zeros(2 * nmax + 1, dtype=complex)
        out[nmax] = self.fourier_cos[0] if self.fourier_cos else 0.0
        for k in range(1, nmax + 1):
            a = self.fourier_cos[k] if k < len(self.fourier_cos) else 0.0
            b = self.fourier_sin[k - 1] if k - 1 < len(self.fourier_sin) else 0.0
            out[nmax + k] = 0.5 * (a - 1j * b)
            out[nmax - k] = 0.5 * (a + 1j * b)
        return out

    @property
    def is_constant_potential(self):
        return all(a == 0.0 for a in self.fourier_cos[1:]) and all(b == 0.0 for b in self.fourier_sin)

    @property
    def mean_potential(self):
        return float(self.fourier_cos[0]) if self.fourier_cos else 0.0

    def standard_decomposition(self):
        """(R, circumference): M = M1 u (S^1 x (-inf, 0]) with M1 = [-R, R] x S^1."""
        return (self.end_marker, self.circumference)

    def to_dict(self):
        return {"circumference": self.circumference,
                "potential": {"fourier_cos": list(self.fourier_cos),
                              "fourier_sin": list(self.fourier_sin)},
                "mode_cutoff": self.mode_cutoff, "end_marker": self.end_marker}


@dataclass
class RegionSpec:
    curves: list = field(default_factory=list)
    circumference: float = 2 * math.pi

    @property
    def interior_sides(self):
        return [c.side for c in self.curves]

    @property
    def asymptote_angles(self):
        return sorted(c.level % self.circumference for c in self.curves if c.kind == "graph")

    @property
    def straight_radius(self):
        rs = [c.straight_radius for c in self.curves if c.kind == "graph"]
        return max(rs) if rs else 0.0

    def contains(self, pts):
        """Membership in the open region N for chart points (x, theta)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c = self.circumference
        inside = np.ones(pts.shape[0], dtype=bool)
        graphs = [g for g in self.curves if g.kind == "graph"]
        if graphs:
            # the graph curve met first when walking down in theta decides
            best = np.full(pts.shape[0], np.inf)
            side_above = np.zeros(pts.shape[0], dtype=bool)
            for g in graphs:
                gap = (pts[:, 1] - g.profile(pts[:, 0])) % c
                closer = gap < best
                best = np.where(closer, gap, best)
                side_above = np.where(closer, g.side == "above", side_above)
            inside &= side_above
        for cc in self.curves:
            if cc.kind == "closed":
                shifted = pts.copy()
                center = cc.theta_cos[0]
                shifted[:, 1] = (pts[:, 1] - center + 0.5 * c) % c - 0.5 * c + center
                enclosed = cc.contains(shifted)
                inside &= enclosed if cc.side == "inside" else ~enclosed
        return inside

    def cross_section_at_infinity(self, theta, x_far=None):
        """Mask of theta values inside the cross-section X of N at x -> +inf."""
        if x_far is None:
            x_far = 10.0 + self.straight_radius + max(
                [abs(cc.x_cos[0]) + np.sum(np.abs(cc.x_cos[1:])) + np.sum(np.abs(cc.x_sin))
                 for cc in self.curves if cc.kind == "closed"] + [0.0])
        pts = np.column_stack([np.full_like(theta, x_far), theta])
        return self.contains(pts)

    def to_list(self):
        return [c.to_dict() for c in self.curves]


def _curve_distance(a, b, circumference):
    """Distance between two curves: closest sampled pair, refined by local minimization."""
    sa, sb = a.sample_params(1024), b.sample_params(1024)
    pa, pb = a.point(sa), b.point(sb)
    d = pa[:, None, :] - pb[None, :, :]
    d[..., 1] = (d[..., 1] + 0.5 * circumference) % circumference - 0.5 * circumference
    d2 = (d ** 2).sum(axis=-1)
    i, j = np.unravel_index(np.argmin(d2), d2.shape)

    def gap(st):
        e = a.point(st[0]) - b.point(st[1])
        e[1] = (e[1] + 0.5 * circumference) % circumference - 0.5 * circumference
        return float(e @ e)

    res = minimize(gap, [sa[i], sb[j]], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": 2000})
    return math.sqrt(min(res.fun, d2[i, j]))


def _validate(model, region):
    if not model.circumference > 0:
        raise ModelError("circumference must be positive")
    if model.mode_cutoff < 8:
        raise ModelError("mode_cutoff must be >= 8")
    if not model.end_marker > 0:
        raise ModelError("end_marker must be positive")
    theta = np.linspace(0, model.circumference, _GRID, endpoint=False)
    v = model.potential(theta)
    if np.min(v) < 0:
        raise NegativePotential(f"min V = {np.min(v):.3g} < 0")
    if np.max(v) <= 0:
        raise ZeroPotential("V vanishes identically")
    for i, a in enumerate(region.curves):
        for b in region.curves[i + 1:]:
            if _curve_distance(a, b, model.circumference) <= 1e-8:
                raise CurveIntersection("boundary curves intersect")
    for g in region.curves:
        if g.kind == "graph" and g.straight_radius > model.end_marker + 1e-12:
            raise ModelError("graph curves must be straight for |x| >= end_marker")
    if region.curves:
        outside = ~region.cross_section_at_infinity(theta)
        if not np.any(v[outside] > 0):
            raise MissingExteriorPotential(
                "V must be positive somewhere on the cross-section complement of N")


def build_model(config):
    """Parse a configuration dict (the JSON schema) into (CylinderModel, RegionSpec)."""
    pot = config.get("potential", {"fourier_cos": [1.0]})
    model = CylinderModel(
        circumference=float(config.get("circumference", 2 * math.pi)),
        fourier_cos=tuple(float(a) for a in pot.get("fourier_cos", [])) or (0.0,),
        fourier_sin=tuple(float(b) for b in pot.get("fourier_sin", [])),
        mode_cutoff=int(config.get("mode_cutoff", 64)),
        end_marker=float(config.get("end_marker", 1.0)))
    curves = [curve_from_dict(c) for c in config.get("curves", [])]
    region = RegionSpec(curves=curves, circumference=model.circumference)
    _validate(model, region)
    return model, region


def model_to_config(model, region):
    cfg = model.to_dict()
    cfg["curves"] = region.to_list()
    return cfg


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return build_model(json.load(fh))


def dump_model(model, region, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_config(model, region), fh, indent=2)
        fh.write("\n")


# Reference configurations used throughout tests, scripts and the acceptance suite.

def strip_config(v=1.0, bump_height=0.0, bump_radius=2.0, mode_cutoff=64):
    """N = {0 < theta < pi (+ bump)} between two graph curves."""
    end = max(bump_radius, 1.0)
    return {"circumference": 2 * math.pi,
            "potential": {"fourier_cos": [v], "fourier_sin": []},
            "curves": [GraphCurve(0.0, side="above").to_dict(),
                       GraphCurve(math.pi, bump_height, 0.0, bump_radius, side="below").to_dict()],
            "mode_cutoff": mode_cutoff, "end_marker": end}


def disk_config(radius=0.5, center=(0.0, math.pi), fourier_cos=(1.0,), mode_cutoff=64):
    return {"circumference": 2 * math.pi,
            "potential": {"fourier_cos": list(fourier_cos), "fourier_sin": []},
            "curves": [ClosedCurve.circle(center, radius, "inside").to_dict()],
            "mode_cutoff": mode_cutoff, "end_marker": 1.0}
