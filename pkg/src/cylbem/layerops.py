"""Nystrom matrices for the single and double layer operators and off-curve potentials.

Conventions: nu is the unit normal pointing out of N, the "+" side of the
boundary is N itself, and for smooth f

    single layer      S f           (no jump)
    double layer      D f  ->  (-1/2 I + K) f  from N,  (1/2 I + K) f  from outside
    normal derivative dS f ->  (1/2 I + K*) f  from N,  (-1/2 I + K*) f from outside

with D f(p) = int d_{nu_q} E(p, q) f(q) dsigma(q).
"""
from dataclasses import dataclass, field

import numpy as np

from .boundary import Boundary, BoundaryDiscretization
from .errors import ExtrapolationUnstable, TooCloseToBoundary
from .greens import (diagonal_constant, grad_log_coefficient, kernel_gradE,
                     log_coefficient, regular_part)
from .quadrature import (composite_gauss, graded_intervals, kress_weights,
                         legendre_interp_matrix, panel_log_weights)

NEAR_FACTOR = 10.0
MIN_DISTANCE = 1e-4
_RICHARDSON_TOL = 1e-4


def as_boundary(bd):
    if isinstance(bd, BoundaryDiscretization):
        return Boundary([bd])
    return bd


@dataclass
class LayerOperatorSet:
    S: np.ndarray
    K: np.ndarray
    Kstar: np.ndarray
    boundary: Boundary
    gk: object
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.S.shape[0]

    @property
    def weights(self):
        return self.boundary.weights

    def symmetry_residual(self):
        w = np.sqrt(self.boundary.weights)
        A = w[:, None] * self.S / w[None, :]
        return float(np.linalg.norm(A - A.T) / np.linalg.norm(A))


# Kernel pieces -------------------------------------------------------------

def _kernels(gk, p, q, nu_q):
    """E(p, q) and d_{nu_q} E(p, q) for p != q."""
    E, g = kernel_gradE(gk, p, q)
    return E, np.sum(g * nu_q, axis=-1)


def _log_parts(gk, p, q, nu_q):
    """Coefficients L with kernel = L log r + smooth, for S and K."""
    d = q - p
    r = np.linalg.norm(d, axis=-1)
    LS = log_coefficient(gk, r)
    LK = grad_log_coefficient(gk, r) * np.sum(d * nu_q, axis=-1)
    return LS, LK, r


def _offdiag_pairs(gk, X, N):
    n = X.shape[0]
    ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    E = np.zeros((n, n))
    dE = np.zeros((n, n))
    e, de = _kernels(gk, X[ii], X[jj], N[jj])
    E[ii, jj] = e
    dE[ii, jj] = de
    return E, dE


def _smooth_K(gk, curve, s, h):
    # (d_nu E - L_K log r) * speed at parameter offsets +-h from each s
    p = curve.point(s)
    out = 0.0
    for sign in (1.0, -1.0):
        sq = s + sign * h
        q = curve.point(sq)
        nu = curve.normal(sq)
        _, dE = _kernels(gk, p, q, nu)
        _, LK, r = _log_parts(gk, p, q, nu)
        out = out + 0.5 * (dE - LK * np.log(r)) * curve.speed(sq)
    return out


def _richardson3(gk, curve, s, h0):
    a1 = _smooth_K(gk, curve, s, h0)
    a2 = _smooth_K(gk, curve, s, h0 / 2)
    a3 = _smooth_K(gk, curve, s, h0 / 4)
    r1 = (4 * a2 - a1) / 3
    r2 = (4 * a3 - a2) / 3
    final = (16 * r2 - r1) / 15
    spread = np.abs(r2 - r1)
    bad = spread > _RICHARDSON_TOL * np.maximum(np.abs(final), 1e-8) + 1e-12
    return final, spread, bad


def k_diagonal(gk, curve, s, h0, max_halvings=6):
    """lim_{s' -> s} of the double-layer kernel times speed, by 3-level Richardson.

    Nodes whose levels disagree are retried with a halved base step, which
    handles profiles that vary quickly on a scale below h0.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    final, spread, bad = _richardson3(gk, curve, s, h0)
    h = h0
    for _ in range(max_halvings):
        if not bad.any():
            break
        h /= 2
        idx = np.nonzero(bad)[0]
        f2, sp2, b2 = _richardson3(gk, curve, s[idx], h)
        final[idx], spread[idx], bad[idx] = f2, sp2, b2
    if bad.any():
        scale = np.maximum(np.abs(final), 1e-8)
        raise ExtrapolationUnstable(
            f"diagonal extrapolation spread {np.max(spread / scale):.3g} exceeds {_RICHARDSON_TOL}")
    return final, float(np.max(spread))


def k_diagonal_curvature(gk, curve, s):
    """Closed-form diagonal of the double-layer kernel times speed (cross-check).

    For the planar part the limit is gamma'' . nu / (4 pi |gamma'|^2); the
    periodic images and the variable-potential remainder add grad R . nu.
    """
    p = curve.point(s)
    d1 = curve.deriv(s)
    d2 = curve.deriv2(s)
    nu = curve.normal(s)
    sp = np.linalg.norm(d1, axis=-1)
    planar = np.sum(d2 * nu, axis=-1) / (4 * np.pi * sp**2)
    _, gR = regular_part(gk, p, p, grad=True)
    return (planar + np.sum(gR * nu, axis=-1)) * sp


def s_diagonal_smooth(gk, curve, s):
    """Smooth part of the single-layer kernel times speed at coincidence."""
    p = curve.point(s)
    sp = curve.speed(s)
    ereg = diagonal_constant(gk) + regular_part(gk, p, p)
    return (ereg - np.log(sp) / (2 * np.pi)) * sp


# Assembly --------------------------------------------------------------------

def _richardson_step(disc):
    if disc.scheme == "trapezoid":
        return min(0.05, 2 * np.pi / disc.n)
    h = np.diff(disc.panel_edges)[0]
    return min(0.05, h / disc.panel_order)


def _closed_correction(gk, disc, S, K, blk):
    n = disc.n
    s = disc.params
    X, Nn, sp = disc.nodes, disc.normals, disc.speed
    R = kress_weights(n)
    diff = s[:, None] - s[None, :]
    with np.errstate(divide="ignore"):
        log4 = np.log(4 * np.sin(0.5 * diff) ** 2)
    np.fill_diagonal(log4, 0.0)
    LS, LK, _ = _log_parts(gk, X[:, None, :], X[None, :, :], Nn[None, :, :])
    corr = R - (2 * np.pi / n) * log4
    np.fill_diagonal(corr, 0.0)
    S[blk, blk] += 0.5 * LS * sp[None, :] * corr
    K[blk, blk] += 0.5 * LK * sp[None, :] * corr
    idx = np.arange(n)
    # diagonal: R_ii * M1 + (2 pi / n) * M2
    S_diag = R[idx, idx] * 0.5 * (-1 / (2 * np.pi)) * sp + (2 * np.pi / n) * s_diagonal_smooth(gk, disc.curve, s)
    K_diag, spread = k_diagonal(gk, disc.curve, s, _richardson_step(disc))
    o = blk.start
    S[o + idx, o + idx] = S_diag
    K[o + idx, o + idx] = (2 * np.pi / n) * K_diag
    return spread


def _graph_correction(gk, disc, S, K, blk):
    order = disc.panel_order
    ref, wref, W = panel_log_weights(order)
    edges = disc.panel_edges
    npan = edges.size - 1
    h = edges[1] - edges[0]
    X, Nn, sp = disc.nodes, disc.normals, disc.speed
    o = blk.start
    for P in range(npan):
        ti = slice(P * order, (P + 1) * order)
        for shift, Q in ((0, P - 1), (1, P), (2, P + 1)):
            if Q < 0 or Q >= npan:
                continue
            sj = slice(Q * order, (Q + 1) * order)
            p = X[ti][:, None, :]
            q = X[sj][None, :, :]
            LS, LK, _ = _log_parts(gk, p, q, Nn[sj][None, :, :])
            # target coordinate in the source panel frame
            tau = ref[:, None] + 2.0 * (1 - shift)
            with np.errstate(divide="ignore"):
                logd = np.log(np.abs(tau - ref[None, :]))
            corr = (h / 2) * (W[shift] - wref[None, :] * logd)
            if shift == 1:
                np.fill_diagonal(corr, 0.0)
            S[o + ti.start:o + ti.stop, o + sj.start:o + sj.stop] += LS * sp[sj][None, :] * corr
            K[o + ti.start:o + ti.stop, o + sj.start:o + sj.stop] += LK * sp[sj][None, :] * corr
    # diagonal entries
    idx = np.arange(disc.n)
    loc = idx % order
    wd = (h / 2) * wref[loc]
    S_diag = (-1 / (2 * np.pi)) * sp * (h / 2) * (np.log(h / 2) * wref[loc] + W[1][loc, loc]) \
        + wd * s_diagonal_smooth(gk, disc.curve, disc.params)
    K_diag, spread = k_diagonal(gk, disc.curve, disc.params, _richardson_step(disc))
    S[o + idx, o + idx] = S_diag
    K[o + idx, o + idx] = wd * K_diag
    return spread


def assemble(gk, bd):
    """Assemble S, K and K* on a boundary (or a single curve discretization)."""
    bd = as_boundary(bd)
    X, Nn, w = bd.nodes, bd.normals, bd.weights
    E, dE = _offdiag_pairs(gk, X, Nn)
    S = E * w[None, :]
    K = dE * w[None, :]
    spreads = []
    schemes = []
    for i, disc in enumerate(bd.discs):
        blk = bd.block(i)
        if disc.scheme == "trapezoid":
            spreads.append(_closed_correction(gk, disc, S, K, blk))
            schemes.append("kress-product")
        else:
            spreads.append(_graph_correction(gk, disc, S, K, blk))
            schemes.append("panel-log-product")
    Kstar = (K.T * w[None, :]) / w[:, None]
    diag = {"schemes": schemes, "k_diagonal_spread": max(spreads),
            "tail_bounds": [float(d.tail_bound) for d in bd.discs], "n": bd.n}
    return LayerOperatorSet(S=S, K=K, Kstar=Kstar, boundary=bd, gk=gk, diagnostics=diag)


def assemble_S(gk, bd):
    return assemble(gk, bd).S


def assemble_K(gk, bd):
    return assemble(gk, bd).K


def assemble_Kstar(gk, bd):
    return assemble(gk, bd).Kstar


# Off-curve evaluation ----------------------------------------------------------

def _closest_param(curve, s0, p, bounds=None):
    """Newton iteration for the parameter of the closest curve point (vectorized)."""
    s = np.array(s0, dtype=float)
    for _ in range(30):
        g = curve.point(s) - p
        d1 = curve.deriv(s)
        d2 = curve.deriv2(s)
        f = np.sum(g * d1, axis=-1)
        fp = np.sum(d1 * d1, axis=-1) + np.sum(g * d2, axis=-1)
        step = np.clip(f / fp, -0.1, 0.1)
        s = s - step
        if bounds is not None:
            s = np.clip(s, *bounds)
        if np.all(np.abs(step) < 1e-14):
            break
    return s


def _unwrap_to(p, base, c):
    pp = p.copy()
    pp[..., 1] = base[..., 1] + ((p[..., 1] - base[..., 1] + 0.5 * c) % c - 0.5 * c)
    return pp


def _trig_eval(fb, sig):
    # trigonometric interpolant of samples at 2 pi j / n, evaluated at sig
    n = fb.size
    N = n // 2
    coef = np.fft.rfft(fb) / n
    k = np.arange(N + 1)
    scale = np.full(N + 1, 2.0)
    scale[0] = 1.0
    scale[N] = 1.0
    ph = np.exp(1j * np.outer(sig, k))
    return np.real(ph @ (coef * scale))


def _closed_rules(disc, pts, s0, c):
    """Graded rules for targets near a closed curve: flat sigma, weights, segment ids."""
    curve = disc.curve
    pp = _unwrap_to(pts, curve.point(s0), c)
    s_star = _closest_param(curve, s0, pp)
    dist = np.linalg.norm(curve.point(s_star) - pp, axis=-1)
    sigs, ws, segs = [], [], []
    for i, (ss, dd) in enumerate(zip(s_star, dist)):
        breaks = graded_intervals(ss, ss - np.pi, ss + np.pi,
                                  max(dd / float(curve.speed(ss)), 1e-12))
        sg, wg = composite_gauss(breaks)
        sigs.append(sg)
        ws.append(wg)
        segs.append(np.full(sg.size, i))
    return pp, dist, np.concatenate(sigs), np.concatenate(ws), np.concatenate(segs)


def _graph_rule(disc, p, s0, c):
    """Graded rule on the panels near one target; returns the panel node range it replaces."""
    curve = disc.curve
    edges = disc.panel_edges
    h = edges[1] - edges[0]
    pp = _unwrap_to(p, curve.point(s0), c)
    s_star = float(_closest_param(curve, s0, pp, (edges[0], edges[-1])))
    dist = float(np.linalg.norm(curve.point(s_star) - pp))
    P = int(np.clip((s_star - edges[0]) // h, 0, edges.size - 2))
    lo_p = max(P - 3, 0)
    hi_p = min(P + 4, edges.size - 1)
    lo, hi = edges[lo_p], edges[hi_p]
    breaks = graded_intervals(s_star, lo, hi, max(dist / float(curve.speed(s_star)), 1e-12))
    breaks = np.unique(np.clip(breaks, lo, hi))
    sig, wsig = composite_gauss(breaks)
    order = disc.panel_order
    interp = np.zeros((sig.size, disc.n))
    pan = np.clip(((sig - edges[0]) // h).astype(int), lo_p, hi_p - 1)
    for Q in np.unique(pan):
        m = pan == Q
        tref = 2 * (sig[m] - edges[Q]) / h - 1
        interp[np.ix_(m, np.arange(Q * order, (Q + 1) * order))] = legendre_interp_matrix(order, tref)
    return pp, dist, sig, wsig, interp, np.arange(lo_p * order, hi_p * order)


def _kernel_values(gk, p, q, nu_q, nu_p, kinds):
    out = {}
    g = None
    if "S" in kinds or "D" in kinds or gk.spec.constant_potential:
        E, g = kernel_gradE(gk, p, q)
        if "S" in kinds:
            out["S"] = E
        if "D" in kinds:
            out["D"] = np.sum(g * nu_q, axis=-1)
    if "dS" in kinds:
        if gk.spec.constant_potential:
            # E depends on q - p only and is even in it
            out["dS"] = -np.sum(g * nu_p, axis=-1)
        else:
            # grad_p E(p, q) = grad_{second} E(q, p)
            _, gp = kernel_gradE(gk, q, p)
            out["dS"] = np.sum(gp * nu_p, axis=-1)
    return out


def layer_potentials(gk, bd, f, pts, kinds=("S", "D"), directions=None):
    """Single layer 'S', double layer 'D' and directional derivative 'dS' of the
    single layer (along ``directions``) at points off the boundary.

    Targets within NEAR_FACTOR local node spacings of a curve use a graded
    Gauss-Legendre rule around the closest curve point with the density
    interpolated from the nodes (trigonometric on closed curves, Legendre per
    panel on graph curves).
    """
    bd = as_boundary(bd)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    f = np.asarray(f, dtype=float)
    npt = pts.shape[0]
    if "dS" in kinds and directions is None:
        raise ValueError("'dS' needs directions")
    nu_p = np.zeros_like(pts) if directions is None else np.broadcast_to(
        np.asarray(directions, dtype=float), pts.shape)
    c = gk.circumference
    out = {k: np.zeros(npt) for k in kinds}
    for b, disc in enumerate(bd.discs):
        blk = bd.block(b)
        fb = f[blk]
        d = disc.nodes[None, :, :] - pts[:, None, :]
        d[..., 1] = (d[..., 1] + 0.5 * c) % c - 0.5 * c
        dist = np.linalg.norm(d, axis=-1)
        j = np.argmin(dist, axis=1)
        dmin = dist[np.arange(npt), j]
        near = dmin < NEAR_FACTOR * disc.spacing()[j]
        if np.any(dmin < MIN_DISTANCE):
            raise TooCloseToBoundary(f"distance {dmin.min():.3g} below {MIN_DISTANCE}")
        far = np.nonzero(~near)[0]
        for lo in range(0, far.size, 2048):
            idx = far[lo:lo + 2048]
            kv = _kernel_values(gk, pts[idx][:, None, :], disc.nodes[None, :, :],
                                disc.normals[None, :, :], nu_p[idx][:, None, :], kinds)
            for k in kinds:
                out[k][idx] += kv[k] @ (disc.weights * fb)
        near = np.nonzero(near)[0]
        if near.size == 0:
            continue
        if disc.scheme == "trapezoid":
            pp, dd, sig, wsig, seg = _closed_rules(disc, pts[near], disc.params[j[near]], c)
            if np.any(dd < MIN_DISTANCE):
                raise TooCloseToBoundary(f"distance {dd.min():.3g} below {MIN_DISTANCE}")
            q = disc.curve.point(sig)
            wq = disc.curve.speed(sig) * wsig * _trig_eval(fb, sig)
            kv = _kernel_values(gk, pp[seg], q, disc.curve.normal(sig), nu_p[near][seg], kinds)
            for k in kinds:
                out[k][near] += np.bincount(seg, weights=kv[k] * wq, minlength=near.size)
            continue
        for i in near:
            pp, dd, sig, wsig, interp, replaced = _graph_rule(disc, pts[i], disc.params[j[i]], c)
            if dd < MIN_DISTANCE:
                raise TooCloseToBoundary(f"distance {dd:.3g} below {MIN_DISTANCE}")
            q = disc.curve.point(sig)
            kv = _kernel_values(gk, pp[None, :], q, disc.curve.normal(sig), nu_p[i][None, :], kinds)
            keep = np.ones(disc.n, dtype=bool)
            keep[replaced] = False
            kf = _kernel_values(gk, pts[i][None, :], disc.nodes[keep], disc.normals[keep],
                                nu_p[i][None, :], kinds)
            for k in kinds:
                out[k][i] += (kv[k] * disc.curve.speed(sig) * wsig) @ (interp @ fb)
                out[k][i] += kf[k] @ (disc.weights[keep] * fb[keep])
    return out


def eval_single(gk, bd, f, pts):
    """Single layer potential int E(p, q) f(q) dsigma(q) at points off the boundary."""
    return layer_potentials(gk, bd, f, pts, ("S",))["S"]


def eval_double(gk, bd, f, pts):
    """Double layer potential int d_{nu_q} E(p, q) f(q) dsigma(q) at points off the boundary."""
    return layer_potentials(gk, bd, f, pts, ("D",))["D"]


def eval_single_normal(gk, bd, f, pts, directions):
    """Derivative of the single layer potential at ``pts`` along ``directions``."""
    return layer_potentials(gk, bd, f, pts, ("dS",), directions)["dS"]


# Jump relations ------------------------------------------------------------------

def offset_points(bd, t):
    """Boundary nodes moved by t along -nu (t > 0: into N)."""
    bd = as_boundary(bd)
    return bd.nodes - t * bd.normals


def _one_sided(ops, f, t):
    gk, bd = ops.gk, ops.boundary
    out = {}
    for side, sgn in (("+", 1.0), ("-", -1.0)):
        pts = offset_points(bd, sgn * t)
        vals = layer_potentials(gk, bd, f, pts, ("S", "D", "dS"), bd.normals)
        for k, v in vals.items():
            out[k + side] = v
    return out


def jump_targets(ops, f):
    I = np.eye(ops.n)
    return {"S+": ops.S @ f, "S-": ops.S @ f,
            "D+": (-0.5 * I + ops.K) @ f, "D-": (0.5 * I + ops.K) @ f,
            "dS+": (0.5 * I + ops.Kstar) @ f, "dS-": (-0.5 * I + ops.Kstar) @ f}


def jump_check(ops, f, t_sequence):
    """Offset-curve limits of the layer potentials against their boundary traces.

    Errors are max-norm, relative to max |f|.  For each t the report has the
    raw error and the error of the first-order Richardson estimate
    2 F(t/2) - F(t) of the limit; ``order`` is the observed rate of the raw
    errors between consecutive t.
    """
    f = np.asarray(f, dtype=float)
    scale = max(np.max(np.abs(f)), 1e-300)
    target = jump_targets(ops, f)
    rows = []
    prev = {}
    cache = {}

    def evaluate(t):
        if t not in cache:
            F = _one_sided(ops, f, t)
            F["total_D"] = F["D-"] - F["D+"]
            F["total_dS"] = F["dS+"] - F["dS-"]
            cache[t] = F
        return cache[t]

    tgt = dict(target, total_D=f, total_dS=f)
    for t in t_sequence:
        F = evaluate(t)
        Fh = evaluate(t / 2)
        for name in ("S+", "S-", "D+", "D-", "dS+", "dS-", "total_D", "total_dS"):
            err = float(np.max(np.abs(F[name] - tgt[name]))) / scale
            lim = float(np.max(np.abs(2 * Fh[name] - F[name] - tgt[name]))) / scale
            order = None
            if name in prev and err > 0 and prev[name][1] > 0:
                order = float(np.log(prev[name][1] / err) / np.log(prev[name][0] / t))
            rows.append({"relation": name, "t": float(t), "error": err,
                         "limit_error": lim, "order": order})
            prev[name] = (t, err)
    return rows
