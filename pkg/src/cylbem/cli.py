"""Command-line entry point: ``cylbem <subcommand> --model model.json [options]``.

Every run writes ``<subcommand>.json`` (diagnostics, tolerances, seed) into
--out, and plot-ready CSV where the subcommand produces tabular data.  Exit
codes: 0 success, 1 usage or validation error, 2 tolerance failure.
"""
import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import acceptance
from .boundary import Boundary, discretize
from .dirichlet import (cross_section_domain, dtn, solve_dirichlet, solve_strip_fourier,
                        strip_dtn_symbol)
from .errors import CylbemError
from .greens import GreenKernel, image_sum_oracle, kernel_E, verify_fundamental
from .layerops import assemble, jump_check
from .model import CylinderModel, build_model, load_model
from .spectrum import eigensystem
from .taufamily import ArcDomain, rellich_check, tau_grid, uniform_bound_sweep

SUBCOMMANDS = ("spectrum", "kernel-check", "jump-check", "solve", "dtn", "tau-sweep",
               "rellich-check", "acceptance")

DEFAULT_TOL = {
    "spectrum": {"residual": 1e-8},
    "kernel-check": {"max_error": 1e-10, "fundamental": 1e-5},
    "jump-check": {"limit_error": 1e-4},
    "solve": {"condition": 1e10},
    "dtn": {"quadratic": 1e-8},
    "tau-sweep": {"stability": 0.01},
    "rellich-check": {"residual": 1e-8},
    "acceptance": {},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    model: str = None
    out: str = "."
    seed: int = 0
    tol: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    bc: str = None
    probes: str = None

    def tolerance(self, name):
        return float(self.tol.get(name, DEFAULT_TOL[self.subcommand][name]))

    def grid_value(self, name, default, kind=float):
        return kind(self.grid[name]) if name in self.grid else default


def _pairs(items, what):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--{what} expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_args(argv):
    p = _Parser(prog="cylbem", description="Layer potentials for Delta + V on the flat cylinder.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", action="append", metavar="NAME=VALUE")
    p.add_argument("--grid", action="append", metavar="NAME=VALUE")
    p.add_argument("--bc", help="boundary data: mode:xi=1 | point:x=..,theta=.. | const:value=..")
    p.add_argument("--probes", help="CSV of probe points (columns x, theta)")
    a = p.parse_args(argv)
    cfg = RunConfig(a.subcommand, a.model, a.out, a.seed, _pairs(a.tol, "tol"),
                    _pairs(a.grid, "grid"), a.bc, a.probes)
    for k in cfg.tol:
        if k not in DEFAULT_TOL[cfg.subcommand]:
            raise UsageError(f"unknown tolerance {k!r} for {cfg.subcommand}")
        float(cfg.tol[k])
    if cfg.model is None and cfg.subcommand != "acceptance":
        raise UsageError(f"{cfg.subcommand} requires --model")
    return cfg


# Output helpers --------------------------------------------------------------------

def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def write_json(cfg, name, payload):
    path = os.path.join(cfg.out, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_csv(cfg, name, header, rows):
    path = os.path.join(cfg.out, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return path


def _report(cfg, passed, results, started, **timing):
    return {"subcommand": cfg.subcommand, "model": cfg.model, "seed": cfg.seed,
            "tolerances": {k: cfg.tolerance(k) for k in DEFAULT_TOL[cfg.subcommand]},
            "grid": cfg.grid, "passed": bool(passed), "results": results,
            "timestamp": {"started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
                          **timing}}


def _load(cfg):
    model, region = load_model(cfg.model)
    return model, region, eigensystem(model)


def _boundary(cfg, model, region, gk):
    discs = []
    for c in region.curves:
        if c.kind == "closed":
            discs.append(discretize(c, cfg.grid_value("n", 256, int)))
        else:
            discs.append(discretize(c, cfg.grid_value("h", 0.5), cfg.grid_value("L", 20.0),
                                    decay_rate=gk.tail_bound_rate))
    if not discs:
        raise UsageError("model has no boundary curves")
    return Boundary(discs)


def _boundary_data(spec_str, bd, gk):
    kind, _, rest = (spec_str or "point:x=0.9,theta=3.4416").partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        k, _, v = item.partition("=")
        params[k.strip()] = float(v)
    if kind == "mode":
        xi = params.get("xi", 1.0)
        return np.where(bd.curve_index == int(params.get("curve", 0)),
                        np.cos(xi * bd.nodes[:, 0]), 0.0)
    if kind == "point":
        p0 = np.array([params.get("x", 0.0), params.get("theta", 0.0)])
        return kernel_E(gk, bd.nodes, p0)
    if kind == "const":
        return np.full(bd.n, params.get("value", 1.0))
    raise UsageError(f"unknown boundary data kind {kind!r}")


def _read_probes(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(rec[0]), float(rec[1])])
            except ValueError:
                continue  # header
    if not rows:
        raise UsageError(f"no probe points in {path}")
    return np.array(rows)


def _arc_domain(cfg, model, region):
    if "arcs" in cfg.grid:
        arcs = []
        for seg in cfg.grid["arcs"].split(";"):
            a, b = seg.split(":")
            arcs.append((float(a), float(b)))
        return ArcDomain(tuple(arcs), model.circumference, model.potential)
    if any(c.kind == "graph" for c in region.curves):
        return cross_section_domain(model, region.curves)[0]
    raise UsageError("model has no graph curves; pass --grid arcs=a:b[;c:d]")


# Subcommands ------------------------------------------------------------------------

def cmd_spectrum(cfg, started):
    model, region, spec = _load(cfg)
    tol = cfg.tolerance("residual")
    mu, res = spec.mu, spec.residuals
    write_csv(cfg, "spectrum.csv", ["k", "mu", "residual"],
              [(k, float(m), float(r)) for k, (m, r) in enumerate(zip(mu, res))])
    ok = bool(np.all(res <= tol * np.maximum(1.0, mu)))
    write_json(cfg, "spectrum.json", _report(cfg, ok, {"mu0": spec.mu0, "n": int(mu.size),
                                                      "max_residual": float(np.max(res))}, started))
    print(f"spectrum: mu0={spec.mu0:.12g} modes={mu.size} max_residual={np.max(res):.3g}")
    return ok


def cmd_kernel_check(cfg, started):
    model, region, spec = _load(cfg)
    gk = GreenKernel(spec)
    rng = np.random.default_rng(cfg.seed)
    c = model.circumference
    npairs = cfg.grid_value("pairs", 500, int)
    p = np.column_stack([rng.uniform(-3, 3, 4 * npairs), rng.uniform(0, c, 4 * npairs)])
    q = np.column_stack([rng.uniform(-3, 3, 4 * npairs), rng.uniform(0, c, 4 * npairs)])
    dth = (q[:, 1] - p[:, 1] + 0.5 * c) % c - 0.5 * c
    keep = np.hypot(q[:, 0] - p[:, 0], dth) >= 0.1
    p, q = p[keep][:npairs], q[keep][:npairs]
    E = kernel_E(gk, p, q)
    if model.is_constant_potential:
        ref = image_sum_oracle(math.sqrt(model.mean_potential), c, p, q)
        oracle = "image_sum"
    else:
        doubled = CylinderModel(model.circumference, model.fourier_cos, model.fourier_sin,
                                2 * model.mode_cutoff, model.end_marker)
        far = np.abs(q[:, 0] - p[:, 0]) >= 0.5
        p, q, E = p[far], q[far], E[far]
        ref = kernel_E(GreenKernel(eigensystem(doubled)), p, q)
        oracle = "cutoff_doubling"
    max_error = float(np.max(np.abs(E - ref) / np.abs(ref)))
    p0 = np.array([0.0, 0.25 * c])
    radius = cfg.grid_value("bump_radius", 1.5)
    sweep = []
    for h in (1 / 32, 1 / 64, 1 / 128):
        sweep.append({"h": h, "residual": verify_fundamental(gk, model, p0, p0, radius, h)})
    ok = max_error <= cfg.tolerance("max_error") and sweep[-1]["residual"] <= cfg.tolerance("fundamental")
    write_json(cfg, "kernel_check.json",
               _report(cfg, ok, {"max_error": max_error, "pairs_tested": int(p.shape[0]),
                                 "oracle": oracle, "h_sweep": sweep}, started))
    write_csv(cfg, "kernel_h_sweep.csv", ["h", "residual"], [(s["h"], s["residual"]) for s in sweep])
    print(f"kernel-check: max_error={max_error:.3g} ({oracle}) fundamental@1/128={sweep[-1]['residual']:.3g}")
    return ok


def cmd_jump_check(cfg, started):
    model, region, spec = _load(cfg)
    gk = GreenKernel(spec)
    bd = _boundary(cfg, model, region, gk)
    ops = assemble(gk, bd)
    X = bd.nodes
    f = np.exp(-X[:, 0] ** 2 / 4) * (1 + 0.5 * np.cos(X[:, 1]))
    ts = [float(t) for t in cfg.grid.get("t", "4e-3,2e-3,1e-3").split(",")]
    rows = jump_check(ops, f, ts)
    last = [r for r in rows if r["t"] == ts[-1]]
    worst = max(r["limit_error"] for r in last)
    ok = worst <= cfg.tolerance("limit_error")
    write_csv(cfg, "jump_check.csv", ["relation", "t", "error", "limit_error", "order"],
              [(r["relation"], r["t"], r["error"], r["limit_error"],
                "" if r["order"] is None else r["order"]) for r in rows])
    write_json(cfg, "jump_check.json", _report(cfg, ok, {"rows": rows, "worst_limit_error": worst,
                                                         "n": ops.n}, started))
    print(f"jump-check: n={ops.n} worst limit error at t={ts[-1]:g}: {worst:.3g}")
    return ok


def _default_probes(bd):
    """About 20 points 0.1 inside N, away from the truncation ends of graph curves."""
    L = max((d.half_length for d in bd.discs if d.curve.kind == "graph"), default=np.inf)
    idx = np.nonzero(np.abs(bd.nodes[:, 0]) <= 0.5 * L)[0]
    idx = idx[:: max(1, idx.size // 20)]
    return bd.nodes[idx] - 0.1 * bd.normals[idx]


def cmd_solve(cfg, started):
    model, region, spec = _load(cfg)
    gk = GreenKernel(spec)
    bd = _boundary(cfg, model, region, gk)
    ops = assemble(gk, bd)
    f = _boundary_data(cfg.bc, bd, gk)
    sol = solve_dirichlet(ops, f, cond_limit=cfg.tolerance("condition"))
    pts = _read_probes(cfg.probes) if cfg.probes else _default_probes(bd)
    outside = ~region.contains(pts)
    if np.any(outside):
        raise UsageError(f"{int(outside.sum())} probe point(s) lie outside N, e.g. {pts[outside][0].tolist()}")
    u = sol(pts)
    results = {"condition": sol.condition, "n": ops.n, "bc": cfg.bc,
               "tail_bounds": ops.diagnostics.get("tail_bounds"),
               "k_diagonal_spread": ops.diagnostics.get("k_diagonal_spread")}
    kind = (cfg.bc or "point").partition(":")[0]
    if kind == "mode" and all(c.kind == "graph" for c in region.curves):
        xi = float(dict(kv.split("=") for kv in cfg.bc.partition(":")[2].split(",") if kv).get("xi", 1.0))
        dom, owners = cross_section_domain(model, region.curves)
        fhat = np.zeros((2, dom.n_points))
        fhat[:, owners.index(0)] = 0.5
        ref = solve_strip_fourier(dom, spec, [xi, -xi], fhat)(pts).real
        results["fourier_difference"] = float(np.max(np.abs(u - ref)))
    write_csv(cfg, "solve_probes.csv", ["x", "theta", "u"],
              [(float(a), float(b), float(c)) for (a, b), c in zip(pts, u)])
    write_json(cfg, "solve.json", _report(cfg, True, results, started))
    print(f"solve: n={ops.n} cond={sol.condition:.3g} probes={pts.shape[0]}")
    return True


def cmd_dtn(cfg, started):
    model, region, spec = _load(cfg)
    gk = GreenKernel(spec)
    bd = _boundary(cfg, model, region, gk)
    ops = assemble(gk, bd)
    D = dtn(ops)
    f = _boundary_data(cfg.bc, bd, gk)
    Nf = D(f)
    qmin = D.min_quadratic_ratio()
    results = {"condition_S": D.condition_S, "symmetry_residual": D.symmetry_residual,
               "min_quadratic_ratio": qmin, "n": ops.n}
    if any(c.kind == "graph" for c in region.curves):
        dom, _ = cross_section_domain(model, region.curves)
        xis = np.linspace(0.0, cfg.grid_value("xi_max", 4.0), 9)
        sym = [strip_dtn_symbol(dom, spec, xi) for xi in xis]
        write_csv(cfg, "dtn_symbol.csv", ["xi", "N00", "N01", "N10", "N11"],
                  [(float(x), *map(float, s.ravel())) for x, s in zip(xis, sym)])
    ok = qmin >= -cfg.tolerance("quadratic")
    write_csv(cfg, "dtn_boundary.csv", ["x", "theta", "f", "Nf"],
              [(float(a), float(b), float(c), float(d)) for (a, b), c, d in zip(bd.nodes, f, Nf)])
    write_json(cfg, "dtn.json", _report(cfg, ok, results, started))
    print(f"dtn: n={ops.n} min <Nf,f>/|f|^2={qmin:.3g} symmetry={D.symmetry_residual:.3g}")
    return ok


def cmd_tau_sweep(cfg, started):
    model, region, spec = _load(cfg)
    dom = _arc_domain(cfg, model, region)
    tmax = cfg.grid_value("tmax", 20.0)
    step = cfg.grid_value("step", 0.5)
    rep = uniform_bound_sweep(dom, spec, tau_grid(tmax, step))
    fine = uniform_bound_sweep(dom, spec, tau_grid(tmax, step / 2))
    change = max(abs(rep.sup_S_inv - fine.sup_S_inv) / rep.sup_S_inv,
                 abs(rep.sup_halfK_inv - fine.sup_halfK_inv) / rep.sup_halfK_inv)
    ok = change <= cfg.tolerance("stability")
    cols = ["tau", "norm_S_inv", "norm_halfK_inv", "cond_S", "cond_halfK"]
    write_csv(cfg, "tau_sweep.csv", cols, [[r[k] for k in cols] for r in rep.rows()])
    write_json(cfg, "tau_sweep.json",
               _report(cfg, ok, {"sup_S_inv": rep.sup_S_inv, "sup_halfK_inv": rep.sup_halfK_inv,
                                 "refinement_change": change, "arcs": dom.arcs}, started))
    print(f"tau-sweep: sup|S^-1|={rep.sup_S_inv:.6g} sup|(I/2+K)^-1|={rep.sup_halfK_inv:.6g} "
          f"refinement change={change:.3g}")
    return ok


def cmd_rellich_check(cfg, started):
    model, region, spec = _load(cfg)
    if "arcs" in cfg.grid or any(c.kind == "graph" for c in region.curves):
        dom = _arc_domain(cfg, model, region)
    else:
        dom = ArcDomain(((0.3, 2.1),), model.circumference, model.potential)
    rng = np.random.default_rng(cfg.seed)
    samples = cfg.grid_value("samples", 50, int)
    single = [ArcDomain((arc,), dom.circumference, dom.potential) for arc in dom.arcs]
    rows = []
    for i in range(samples):
        d = single[i % len(single)]
        u = rng.normal(size=6) + 1j * rng.normal(size=6)
        w = rng.normal(size=4)
        r = rellich_check(d, u, w)
        rows.append((i, r["rellich"]["residual"], r["divergence"]["residual"]))
    worst = max(max(r[1], r[2]) for r in rows)
    ok = worst <= cfg.tolerance("residual")
    write_csv(cfg, "rellich_check.csv", ["sample", "rellich_residual", "divergence_residual"], rows)
    write_json(cfg, "rellich_check.json", _report(cfg, ok, {"samples": samples,
                                                            "max_residual": worst}, started))
    print(f"rellich-check: {samples} samples, max residual {worst:.3g}")
    return ok


def cmd_acceptance(cfg, started):
    if cfg.model:
        load_model(cfg.model)  # validated and recorded; the suite uses its reference models
    acfg = acceptance.AcceptanceConfig(seed=cfg.seed)
    only = None
    if "criteria" in cfg.grid:
        only = {int(s) for s in cfg.grid["criteria"].split(",")}
    results = acceptance.run_all(acfg, only=only, echo=print)
    ok = all(r.passed for r in results)
    body = []
    for r in results:
        d = r.to_dict()
        d.pop("runtime")
        body.append(d)
    write_json(cfg, "acceptance.json",
               _report(cfg, ok, body, started,
                       runtimes={str(r.number): r.runtime for r in results}))
    print(f"acceptance: {sum(r.passed for r in results)}/{len(results)} passed")
    return ok


COMMANDS = {"spectrum": cmd_spectrum, "kernel-check": cmd_kernel_check,
            "jump-check": cmd_jump_check, "solve": cmd_solve, "dtn": cmd_dtn,
            "tau-sweep": cmd_tau_sweep, "rellich-check": cmd_rellich_check,
            "acceptance": cmd_acceptance}


def run(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
        os.makedirs(cfg.out, exist_ok=True)
        ok = COMMANDS[cfg.subcommand](cfg, time.time())
    except (UsageError, CylbemError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"cylbem: error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
