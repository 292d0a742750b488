"""Batch front end: ``dfcb sample|verify|sweep|compare-explicit``.

A run is described by one JSON document::

    {
      "seeds": [{"k": 0.8, "c": [1, 1, 1]}],
      "lambda": {"kind": "constant", "params": {"c": 1}},
      "h": {"kind": "constant", "params": {"c": 0}},
      "fold": 1,
      "grid": {"x0": -2, "x1": 2, "nx": 41, "y0": 0, "y1": 1, "ny": 1,
               "t0": 0, "t1": 1, "nt": 3},
      "options": {"tolerance": 1e-8}
    }

Wavenumbers, seed coefficients and profiles have no defaults.  Grid counts
and every entry of ``options`` do.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coeffs import Coefficients, TimeProfile, eval_profile
from .darboux import MAX_FOLD, TransformedSolution, mode_discrepancy, sample_solution
from .errors import ConfigError, DFCBError
from .explicit import discrepancy_report
from .grid import GridSpec
from .jet import JetShape, Point
from .seeds import SeedSpec, eval_seed, lax_residual, trivial_background
from .verify import convergence_order, darboux_evaluator, solution_residual_jet

log = logging.getLogger("dfcb")

DEFAULT_OPTIONS = {
    "tolerance": 1e-8,
    "lax_tolerance": 1e-9,
    "mode_tolerance": 1e-10,
    "fd_ladder": [0.1, 0.05, 0.025],
    "fd_order_range": [1.8, 2.2],
    "fd_points": 5,
    "sweep_axis": "damping",
    "sweep_values": [],
}

DEFAULT_COUNTS = {"nx": 21, "ny": 1, "nt": 5}

CSV_HEADER = "x,y,t,u,v"


def fmt(x: float) -> str:
    """Shortest round-trip decimal; NaN as the literal ``nan``."""
    x = float(x)
    if x != x:
        return "nan"
    return repr(x)


@dataclass(frozen=True)
class RunConfig:
    seeds: tuple
    lam: TimeProfile
    h: TimeProfile
    fold: int
    grid: GridSpec
    options: dict = field(default_factory=dict)

    @property
    def coeffs(self) -> Coefficients:
        return Coefficients(self.lam, self.h)

    def opt(self, key):
        return self.options.get(key, DEFAULT_OPTIONS[key])

    def solution(self, mode: str = "wronskian-direct") -> TransformedSolution:
        return TransformedSolution(self.coeffs, self.seeds[: self.fold], mode)

    def to_dict(self) -> dict:
        return {
            "seeds": [s.to_dict() for s in self.seeds],
            "lambda": self.lam.to_dict(),
            "h": self.h.to_dict(),
            "fold": self.fold,
            "grid": self.grid.to_dict(),
            "options": copy.deepcopy(dict(self.options)),
        }

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()


def _required(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}{key}", "required field missing")
    return d[key]


def _profile(d, path: str) -> TimeProfile:
    if not isinstance(d, dict):
        raise ConfigError(path, "profile must be an object {kind, params}")
    try:
        return TimeProfile(_required(d, "kind", f"{path}."), dict(d.get("params", {})))
    except ConfigError as e:
        raise ConfigError(f"{path}.{e.path}", str(e).split(": ", 1)[-1]) from None


def parse_config(d: dict) -> RunConfig:
    """Validate a config document; every error names its field path."""
    if not isinstance(d, dict):
        raise ConfigError("$", "config must be a JSON object")
    raw_seeds = _required(d, "seeds", "")
    if not isinstance(raw_seeds, list):
        raise ConfigError("seeds", "must be a list")
    seeds = []
    for i, s in enumerate(raw_seeds):
        path = f"seeds[{i}]"
        k = _required(s, "k", f"{path}.")
        c = _required(s, "c", f"{path}.")
        if not (isinstance(c, list) and len(c) == 3):
            raise ConfigError(f"{path}.c", "must be a list of three numbers")
        try:
            seeds.append(SeedSpec(float(k), *(float(v) for v in c)))
        except ValueError as e:
            raise ConfigError(path, str(e)) from None
    lam = _profile(_required(d, "lambda", ""), "lambda")
    h = _profile(_required(d, "h", ""), "h")
    fold = _required(d, "fold", "")
    if not isinstance(fold, int) or isinstance(fold, bool) or fold < 0:
        raise ConfigError("fold", f"must be a non-negative integer, got {fold!r}")
    if fold > MAX_FOLD:
        raise ConfigError("fold", f"at most {MAX_FOLD}, got {fold}")
    if fold > len(seeds):
        raise ConfigError("fold", f"fold {fold} needs at least {fold} seeds, got {len(seeds)}")
    ks = [s.k for s in seeds]
    for i in range(len(ks)):
        for j in range(i):
            if ks[i] == ks[j]:
                raise ConfigError(f"seeds[{i}].k", f"duplicates seeds[{j}].k = {ks[j]}")
    grid_d = dict(_required(d, "grid", ""))
    for key, default in DEFAULT_COUNTS.items():
        grid_d.setdefault(key, default)
    grid = GridSpec.from_dict(grid_d)
    options = dict(d.get("options", {}))
    unknown = set(options) - set(DEFAULT_OPTIONS)
    if unknown:
        raise ConfigError(f"options.{sorted(unknown)[0]}", "unknown option")
    try:
        Coefficients(lam, h).check_range(grid.t0, grid.t1)
    except DFCBError as e:
        raise ConfigError("lambda", str(e)) from None
    return RunConfig(tuple(seeds), lam, h, fold, grid, options)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(json.load(fh))


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _finite_or_none(x):
    x = float(x)
    return x if np.isfinite(x) else None


# --------------------------------------------------------------------------
# sample


def field_csv(sample) -> str:
    p = sample.grid.points()
    rows = [CSV_HEADER]
    for x, y, t, u, v in zip(p.x.ravel(), p.y.ravel(), p.t.ravel(),
                             sample.u.ravel(), sample.v.ravel()):
        rows.append(",".join(fmt(a) for a in (x, y, t, u, v)))
    return "\n".join(rows) + "\n"


def _field_summary(cfg: RunConfig, sample) -> dict:
    ok = ~sample.mask

    def rng(a):
        a = a[ok]
        return [float(a.min()), float(a.max())] if a.size else [None, None]

    return {
        "config": cfg.to_dict(),
        "nodes": int(sample.mask.size),
        "masked_count": sample.masked_count,
        "valid_count": sample.valid_count,
        "masked_locations": sample.masked_locations(limit=100),
        "u_range": rng(sample.u),
        "v_range": rng(sample.v),
    }


def cmd_sample(cfg: RunConfig, out: Path, stem: str = "field") -> Path:
    sample = sample_solution(cfg.solution(), cfg.grid)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write(field_csv(sample))
    _write_json(out / f"{stem}_summary.json", _field_summary(cfg, sample))
    log.info("wrote %s (%d nodes, %d masked)", path, sample.mask.size, sample.masked_count)
    return path


# --------------------------------------------------------------------------
# verify


@dataclass
class Criterion:
    name: str
    value: float
    bound: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{mark}  {self.name}: {self.value:.3e} (bound {self.bound}){extra}"


def _subsample(grid: GridSpec, n: int) -> Point:
    """At most n nodes per axis, spread evenly over the grid."""
    axes = []
    for ax in "xyt":
        a = grid.axis(ax)
        idx = np.unique(np.linspace(0, a.size - 1, min(n, a.size)).round().astype(int))
        axes.append(a[idx])
    t, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    return Point.make(x, y, t)


def run_verify(cfg: RunConfig, tolerance: float | None = None,
               corrupt: dict | None = None) -> list[Criterion]:
    tol = cfg.opt("tolerance") if tolerance is None else tolerance
    lax_tol = cfg.opt("lax_tolerance") if tolerance is None else min(tolerance, cfg.opt("lax_tolerance"))
    coeffs = cfg.coeffs
    grid = cfg.grid
    pts = grid.points()
    out = []

    shape = JetShape(3, 1, 1)
    u0, v0 = trivial_background(coeffs, pts, shape)
    for i, s in enumerate(cfg.seeds):
        rep = lax_residual(u0, v0, coeffs, eval_seed(s, pts, shape), s.k)
        out.append(Criterion(f"lax_seed[{i}]", rep.worst, f"{lax_tol:g}", rep.worst <= lax_tol,
                             f"masked={rep.masked_count}"))

    ts = cfg.solution()
    rep = solution_residual_jet(ts, grid, corrupt)
    valid = rep.total - rep.masked_count
    note = f"masked={rep.masked_count}/{rep.total}"
    out.append(Criterion("pde_jet.res_u", rep.max_res_u, f"{tol:g}",
                         rep.max_res_u <= tol and valid > 0, note))
    out.append(Criterion("pde_jet.res_v", rep.max_res_v, f"{tol:g}",
                         rep.max_res_v <= tol and valid > 0, note))

    if ts.fold >= 1:
        mtol = cfg.opt("mode_tolerance")
        err, ok = mode_discrepancy(ts, pts)
        rel = err[ok]
        worst = float(rel.max()) if rel.size else 0.0
        out.append(Criterion("mode_equivalence", worst, f"{mtol:g}", worst <= mtol,
                             f"regular={int(ok.sum())}/{ok.size}"))

    if len(cfg.seeds) > ts.fold:
        extra = cfg.seeds[ts.fold]
        pshape = JetShape(3 + ts.fold, 1, 1)
        phi = ts.eigenfunction(eval_seed(extra, pts, pshape))
        pots = ts.potentials(pts, order=(1, 1, 1))
        u, v = pots.u, pots.v.truncate(JetShape(0, 1, 1))
        if corrupt:
            u, v = u + corrupt.get("u", 0.0), v + corrupt.get("v", 0.0)
        rep = lax_residual(u, v, coeffs, phi, max(ts.k_scale, abs(extra.k)), term_scale=True)
        out.append(Criterion(f"lax_transformed[seed {ts.fold}]", rep.worst, f"{tol:g}",
                             rep.worst <= tol, f"masked={rep.masked_count}"))

    lo, hi = cfg.opt("fd_order_range")
    conv = convergence_order(darboux_evaluator(ts, corrupt), coeffs,
                             _subsample(grid, cfg.opt("fd_points")), cfg.opt("fd_ladder"))
    if conv.degenerate and np.isinf(conv.order):
        out.append(Criterion("fd_order", conv.order, f"[{lo:g}, {hi:g}]", True,
                             "residual below roundoff at every level; nothing to fit"))
    else:
        out.append(Criterion("fd_order", conv.order, f"[{lo:g}, {hi:g}]",
                             bool(lo <= conv.order <= hi),
                             "norms=" + ",".join(f"{n:.3e}" for n in conv.norms)))
    return out


def cmd_verify(cfg: RunConfig, out: Path, tolerance=None, corrupt=None) -> int:
    crits = run_verify(cfg, tolerance, corrupt)
    lines = [c.line() for c in crits]
    failed = [c for c in crits if not c.passed]
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify_report.txt").write_text("\n".join(lines) + "\n")
    _write_json(out / "verify_report.json", {
        "config": cfg.to_dict(),
        "corrupt": corrupt,
        "criteria": [{"name": c.name, "value": _finite_or_none(c.value), "bound": c.bound,
                      "pass": c.passed, "detail": c.detail} for c in crits],
        "pass": not failed,
    })
    for ln in lines:
        print(ln)
    if failed:
        print(f"verification failed: {failed[0].name}", file=sys.stderr)
        return 1
    return 0


# --------------------------------------------------------------------------
# sweep


def _swept(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "damping":
        a = cfg.lam.params["a"] if cfg.lam.kind == "exponential" else 1.0
        lam, h = TimeProfile.exponential(a, value), cfg.h
    elif axis == "forcing":
        key = "c" if cfg.h.kind == "constant" else "a"
        params = dict(cfg.h.params)
        params[key] = value
        lam, h = cfg.lam, TimeProfile(cfg.h.kind, params)
    else:
        raise ConfigError("options.sweep_axis", f"must be damping or forcing, got {axis!r}")
    Coefficients(lam, h).check_range(cfg.grid.t0, cfg.grid.t1)
    return RunConfig(cfg.seeds, lam, h, cfg.fold, cfg.grid, cfg.options)


def amplitude_profile(cfg: RunConfig, sample) -> tuple[np.ndarray, np.ndarray]:
    """A(t) = max over the (x, y) window of |u - H(t)|, per t-slice."""
    ts_axis = cfg.grid.axis("t")
    h = eval_profile(cfg.h, ts_axis, 0)[0]
    dev = np.abs(sample.u - h[:, None, None])
    dev = np.where(sample.mask, -np.inf, dev)
    amp = dev.reshape(dev.shape[0], -1).max(axis=1)
    return ts_axis, np.where(np.isfinite(amp), amp, np.nan)


def cmd_sweep(cfg: RunConfig, out: Path, axis: str | None = None, values=None) -> Path:
    axis = axis or cfg.opt("sweep_axis")
    values = sorted(float(v) for v in (values if values is not None else cfg.opt("sweep_values")))
    if not values:
        raise ConfigError("options.sweep_values", "sweep needs at least one value")
    out.mkdir(parents=True, exist_ok=True)
    rows = ["param,t,amplitude"]
    runs = []
    for i, val in enumerate(values):
        run = _swept(cfg, axis, val)
        stem = f"sweep_{axis}_{i:02d}"
        sample = sample_solution(run.solution(), run.grid)
        (out / f"{stem}.csv").write_text(field_csv(sample))
        t, amp = amplitude_profile(run, sample)
        rows += [",".join((fmt(val), fmt(tt), fmt(a))) for tt, a in zip(t, amp)]
        runs.append({"param": val, "file": f"{stem}.csv", "lambda": run.lam.to_dict(),
                     "h": run.h.to_dict(), "masked_count": sample.masked_count})
    path = out / f"sweep_{axis}_summary.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    _write_json(out / f"sweep_{axis}_summary.json", {
        "axis": axis,
        "amplitude_metric": "A(t) = max over the (x, y) grid window of |u - H(t)|",
        "runs": runs,
        "config": cfg.to_dict(),
    })
    return path


# --------------------------------------------------------------------------
# compare-explicit


def cmd_compare_explicit(cfg: RunConfig, out: Path, tolerance=None) -> int:
    tol = cfg.opt("tolerance") if tolerance is None else tolerance
    fold = cfg.fold if cfg.fold in (1, 2) else min(len(cfg.seeds), 2)
    if fold not in (1, 2):
        raise ConfigError("fold", "compare-explicit needs a one-fold or two-fold run")
    rep = discrepancy_report(cfg.seeds[:fold], cfg.coeffs, cfg.grid, tol)
    out.mkdir(parents=True, exist_ok=True)
    text = rep.table()
    (out / "explicit_report.txt").write_text(text)
    _write_json(out / "explicit_report.json", rep.to_dict())
    print(text, end="")
    for name, mag in rep.theta_magnitudes.items():
        log.info("max |%s| = %.3e", name, mag)
    darboux_ok = max(rep.darboux_residual["max_res_u"], rep.darboux_residual["max_res_v"]) <= tol
    return 0 if darboux_ok else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dfcb", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("sample", "verify", "sweep", "compare-explicit"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--tolerance", type=float)
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            p.add_argument("--corrupt", nargs=2, metavar=("FIELD", "DELTA"))
        if name == "sweep":
            p.add_argument("--axis", choices=("damping", "forcing"))
            p.add_argument("--values", type=float, nargs="+")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "sample":
            cmd_sample(cfg, args.out)
            return 0
        if args.command == "verify":
            corrupt = None
            if args.corrupt:
                fieldname, delta = args.corrupt
                if fieldname not in ("u", "v"):
                    raise ConfigError("--corrupt", f"field must be u or v, got {fieldname!r}")
                corrupt = {fieldname: float(delta)}
            return cmd_verify(cfg, args.out, args.tolerance, corrupt)
        if args.command == "sweep":
            cmd_sweep(cfg, args.out, args.axis, args.values)
            return 0
        return cmd_compare_explicit(cfg, args.out, args.tolerance)
    except (DFCBError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
