"""Boundary curves on the cylinder chart (x, theta) and their discretization.

Two kinds of curves are supported:

* closed curves, trigonometric in a parameter s in [0, 2 pi), that do not
  wrap around the cylinder;
* graph curves theta = f(x) with f a constant plus a compactly supported
  smooth bump, straight for |x| >= R.

Normals are unit vectors in (x, theta) components pointing out of N.
Offsets by a signed distance t move points along -nu, so positive t goes
into N (the "+" side).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import IrregularCurve, OffsetTooLarge, TruncationTooShort


def _bump(u, order=0):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    v = u[inside]
    one = 1.0 - v * v
    b = np.exp(1.0 - 1.0 / one)
    if order == 0:
        out[inside] = b
    elif order == 1:
        out[inside] = -2.0 * v * b / one**2
    elif order == 2:
        out[inside] = b * (6.0 * v**4 - 2.0) / one**4
    else:
        raise ValueError(order)
    return out


def _rot_cw(v):
    # (a, b) -> (b, -a)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


class Curve:
    kind = None

    def point(self, s):
        raise NotImplementedError

    def deriv(self, s):
        raise NotImplementedError

    def deriv2(self, s, h=1e-4):
        # fourth-order central differences; overridden where closed forms exist
        s = np.asarray(s, dtype=float)
        return (-self.deriv(s + 2 * h) + 8 * self.deriv(s + h)
                - 8 * self.deriv(s - h) + self.deriv(s - 2 * h)) / (12 * h)

    def speed(self, s):
        return np.linalg.norm(self.deriv(s), axis=-1)

    def tangent(self, s):
        d = self.deriv(s)
        return d / np.linalg.norm(d, axis=-1)[..., None]

    def normal(self, s):
        return self._normal_sign() * _rot_cw(self.tangent(s))

    def _normal_sign(self):
        raise NotImplementedError

    def curvature(self, s):
        d1 = self.deriv(s)
        d2 = self.deriv2(s)
        cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        return np.abs(cross) / np.linalg.norm(d1, axis=-1) ** 3

    def sample_params(self, n=2048):
        raise NotImplementedError


class ClosedCurve(Curve):
    """x(s) = sum x_cos[k] cos(ks) + sum x_sin[k-1] sin(ks), same for theta."""

    kind = "closed"

    def __init__(self, x_cos, x_sin, theta_cos, theta_sin, side="inside"):
        if side not in ("inside", "outside"):
            raise ValueError(f"closed curve side must be inside/outside, got {side!r}")
        self.x_cos = np.atleast_1d(np.asarray(x_cos, dtype=float))
        self.x_sin = np.atleast_1d(np.asarray(x_sin, dtype=float))
        self.theta_cos = np.atleast_1d(np.asarray(theta_cos, dtype=float))
        self.theta_sin = np.atleast_1d(np.asarray(theta_sin, dtype=float))
        self.side = side
        s = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        d = self._eval(s, 1)
        p = self._eval(s, 0)
        area = 0.5 * np.mean(p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0]) * 2 * np.pi
        self.ccw = area > 0

    @classmethod
    def circle(cls, center, radius, side="inside"):
        return cls([center[0], radius], [0.0], [center[1], 0.0], [radius], side)

    def _series(self, cos_c, sin_c, s, order):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for k, a in enumerate(cos_c):
            if a == 0.0:
                continue
            if order == 0:
                out = out + a * np.cos(k * s)
            elif order == 1:
                out = out - a * k * np.sin(k * s)
            else:
                out = out - a * k * k * np.cos(k * s)
        for k, b in enumerate(sin_c, start=1):
            if b == 0.0:
                continue
            if order == 0:
                out = out + b * np.sin(k * s)
            elif order == 1:
                out = out + b * k * np.cos(k * s)
            else:
                out = out - b * k * k * np.sin(k * s)
        return out

    def _eval(self, s, order):
        return np.stack([self._series(self.x_cos, self.x_sin, s, order),
                         self._series(self.theta_cos, self.theta_sin, s, order)], axis=-1)

    def point(self, s):
        return self._eval(s, 0)

    def deriv(self, s):
        return self._eval(s, 1)

    def deriv2(self, s, h=None):
        return self._eval(s, 2)

    def _normal_sign(self):
        # rot_cw(tangent) points out of the enclosed disk for a ccw curve
        out_of_disk = 1.0 if self.ccw else -1.0
        return out_of_disk if self.side == "inside" else -out_of_disk

    def sample_params(self, n=2048):
        return np.linspace(0, 2 * np.pi, n, endpoint=False)

    def contains(self, pts):
        """True for points enclosed by the curve (chart winding number)."""
        poly = self.point(self.sample_params(4096))
        pts = np.atleast_2d(pts)
        lo, hi = poly.min(axis=0), poly.max(axis=0)
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        out = np.zeros(pts.shape[0], dtype=bool)
        if not inside.any():
            return out
        out[inside] = self._winding_odd(poly, pts[inside])
        return out

    @staticmethod
    def _winding_odd(poly, pts):
        x, y = pts[:, 0][:, None], pts[:, 1][:, None]
        x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
        x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
        crosses = ((y0 > y) != (y1 > y)) & (x < (x1 - x0) * (y - y0) / (y1 - y0 + 1e-300) + x0)
        return (np.count_nonzero(crosses, axis=1) % 2) == 1

    def to_dict(self):
        return {"kind": "closed", "x_cos": self.x_cos.tolist(), "x_sin": self.x_sin.tolist(),
                "theta_cos": self.theta_cos.tolist(), "theta_sin": self.theta_sin.tolist(),
                "side": self.side}


class GraphCurve(Curve):
    """theta = level + height * bump((x - center) / radius); parameter s = x."""

    kind = "graph"

    def __init__(self, level, bump_height=0.0, bump_center=0.0, bump_radius=1.0, side="above"):
        if side not in ("above", "below"):
            raise ValueError(f"graph curve side must be above/below, got {side!r}")
        if bump_radius <= 0:
            raise ValueError("bump_radius must be positive")
        self.level = float(level)
        self.bump_height = float(bump_height)
        self.bump_center = float(bump_center)
        self.bump_radius = float(bump_radius)
        self.side = side

    @property
    def straight_radius(self):
        """|x| >= straight_radius implies f'(x) = 0."""
        if self.bump_height == 0.0:
            return 0.0
        return abs(self.bump_center) + self.bump_radius

    def profile(self, x, order=0):
        u = (np.asarray(x, dtype=float) - self.bump_center) / self.bump_radius
        val = self.bump_height * _bump(u, order) / self.bump_radius**order
        return val + self.level if order == 0 else val

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return np.stack([s, self.profile(s)], axis=-1)

    def deriv(self, s):
        s = np.asarray(s, dtype=float)
        return np.stack([np.ones_like(s), self.profile(s, 1)], axis=-1)

    def deriv2(self, s, h=None):
        s = np.asarray(s, dtype=float)
        return np.stack([np.zeros_like(s), self.profile(s, 2)], axis=-1)

    def _normal_sign(self):
        # rot_cw of (1, f') is (f', -1), pointing to smaller theta
        return 1.0 if self.side == "above" else -1.0

    def sample_params(self, n=2048, half_length=None):
        L = half_length if half_length is not None else self.straight_radius + 1.0
        return np.linspace(-L, L, n)

    def to_dict(self):
        return {"kind": "graph", "level": self.level, "bump_height": self.bump_height,
                "bump_center": self.bump_center, "bump_radius": self.bump_radius,
                "side": self.side}


class OffsetCurve(Curve):
    """Parallel curve gamma(s) - t nu(s); positive t moves into N."""

    def __init__(self, base, t):
        self.base = base
        self.t = float(t)
        self.kind = base.kind
        self.side = base.side

    def point(self, s):
        return self.base.point(s) - self.t * self.base.normal(s)

    def deriv(self, s):
        d1 = self.base.deriv(s)
        d2 = self.base.deriv2(s)
        sp = np.linalg.norm(d1, axis=-1)[..., None]
        tan_dot = (d1 * d2).sum(axis=-1)[..., None] / sp**3
        dnu = self.base._normal_sign() * _rot_cw(d2 / sp - d1 * tan_dot)
        return d1 - self.t * dnu

    def _normal_sign(self):
        return self.base._normal_sign()

    def sample_params(self, n=2048):
        return self.base.sample_params(n)

    @property
    def straight_radius(self):
        return self.base.straight_radius


def curve_from_dict(d):
    d = dict(d)
    kind = d.pop("kind")
    if kind == "closed":
        return ClosedCurve(**d)
    if kind == "circle":
        return ClosedCurve.circle(d["center"], d["radius"], d.get("side", "inside"))
    if kind == "graph":
        return GraphCurve(**d)
    raise ValueError(f"unknown curve kind {kind!r}")


@dataclass
class BoundaryDiscretization:
    """Quadrature nodes for one curve.

    For closed curves ``scheme == "trapezoid"`` and ``params`` are equispaced
    in [0, 2 pi).  For graph curves ``scheme == "panels"``: ``params`` are
    Gauss-Legendre nodes on equal panels of [-L, L].
    """

    curve: Curve
    params: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    speed: np.ndarray
    scheme: str
    panel_order: int = 0
    panel_edges: np.ndarray = None
    half_length: float = None
    tail_bound: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.params.size

    def spacing(self):
        """Local node spacing in arclength."""
        if self.scheme == "trapezoid":
            return self.weights.copy()
        h = np.diff(self.panel_edges)[0]
        return np.full(self.n, h / self.panel_order) * self.speed

    def export_rows(self):
        return np.column_stack([self.nodes, self.weights, self.normals])


def _check_regular(curve, s):
    if np.min(curve.speed(s)) < 1e-6:
        raise IrregularCurve("parameterization has |gamma'| < 1e-6")


def discretize(curve, n_or_h, L=None, *, panel_order=12, decay_rate=None):
    """Discretize one curve.

    Closed curves: ``n_or_h`` is the (even, >= 16) number of nodes.
    Graph curves: ``n_or_h`` is the maximal panel length on [-L, L].
    ``decay_rate`` (sqrt of the ground-state eigenvalue) sets the minimal
    truncation L >= R + 5 / decay_rate and the recorded tail bound.
    """
    if curve.kind == "closed":
        n = int(n_or_h)
        if n < 16 or n % 2:
            raise ValueError("closed curves need an even node count >= 16")
        s = 2 * np.pi * np.arange(n) / n
        _check_regular(curve, curve.sample_params(4 * n))
        sp = curve.speed(s)
        return BoundaryDiscretization(
            curve=curve, params=s, nodes=curve.point(s), weights=sp * 2 * np.pi / n,
            normals=curve.normal(s), tangents=curve.tangent(s), speed=sp, scheme="trapezoid")

    if L is None:
        raise ValueError("graph curves need a truncation half-length L")
    R = curve.straight_radius
    if decay_rate is not None and L < R + 5.0 / decay_rate:
        raise TruncationTooShort(f"L = {L} < R + 5/sqrt(mu0) = {R + 5.0 / decay_rate:.4g}")
    hmax = float(n_or_h)
    npan = int(np.ceil(2 * L / hmax - 1e-12))
    edges = np.linspace(-L, L, npan + 1)
    t, w = np.polynomial.legendre.leggauss(panel_order)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wq = (half[:, None] * w[None, :]).ravel()
    _check_regular(curve, np.linspace(-L, L, 8 * npan + 1))
    sp = curve.speed(s)
    tail = np.exp(-decay_rate * (L - R)) if decay_rate is not None else np.nan
    return BoundaryDiscretization(
        curve=curve, params=s, nodes=curve.point(s), weights=wq * sp, normals=curve.normal(s),
        tangents=curve.tangent(s), speed=sp, scheme="panels", panel_order=panel_order,
        panel_edges=edges, half_length=float(L), tail_bound=float(tail))


class Boundary:
    """Concatenation of the discretizations of all curves bounding N."""

    def __init__(self, discs):
        self.discs = list(discs)
        sizes = [d.n for d in self.discs]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.nodes = np.concatenate([d.nodes for d in self.discs])
        self.weights = np.concatenate([d.weights for d in self.discs])
        self.normals = np.concatenate([d.normals for d in self.discs])
        self.tangents = np.concatenate([d.tangents for d in self.discs])
        self.curve_index = np.concatenate([np.full(d.n, i) for i, d in enumerate(self.discs)])

    @property
    def n(self):
        return self.nodes.shape[0]

    def block(self, i):
        return slice(self.offsets[i], self.offsets[i + 1])

    def spacing(self):
        return np.concatenate([d.spacing() for d in self.discs])

    def export_rows(self):
        return np.concatenate([d.export_rows() for d in self.discs])


def max_offset(curve, others=(), circumference=None):
    """Conservative offset bound min(0.25, 1/(2 max curvature), d_min / 2)."""
    s = curve.sample_params(2048)
    kmax = np.max(curve.curvature(s))
    eps = 0.25 if kmax == 0 else min(0.25, 1.0 / (2.0 * kmax))
    if others:
        pa = curve.point(s)
        for other in others:
            pb = other.point(other.sample_params(2048))
            eps = min(eps, 0.5 * min_distance(pa, pb, circumference))
    return eps


def min_distance(pa, pb, circumference=None):
    d = pa[:, None, :] - pb[None, :, :]
    if circumference is not None:
        d[..., 1] = (d[..., 1] + 0.5 * circumference) % circumference - 0.5 * circumference
    return float(np.sqrt(np.min((d**2).sum(axis=-1))))


def offset_curve(curve, t, others=(), circumference=None):
    """Normal offset of ``curve`` by ``t`` (positive t toward the interior of N)."""
    eps = max_offset(curve, others, circumference)
    if abs(t) >= eps:
        raise OffsetTooLarge(f"|t| = {abs(t)} >= eps_max = {eps:.4g}")
    if t == 0:
        return curve
    return OffsetCurve(curve, t)
