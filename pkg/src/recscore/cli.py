"""Command-line surface: simulate, infer, screen, diagnose.

Configuration lives in strict JSON files (unknown keys are fatal) with flag
overrides on top. All user-facing coefficient labels are 1-based; internal
indices are 0-based. Exit codes: 0 success, 1 usage/config error, 2 data
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .core import Dataset, SeedSpec, SolverConfig, standardize
from .errors import (
    AllRepsFailed,
    ConfigError,
    DataError,
    RecscoreError,
    ZeroVarianceColumn,
)
from .inference import InferenceConfig, bonferroni_infer, initial_estimator, normal_quantile
from .losses import LossSpec
from .screening import SIRS, SIS, ScreenerConfig, default_keep, sirs_stats, sis_stats
from .simgen import CONTAMINATED, LOGNORMAL_SIGN, ErrorModel, SimDesign, run_replications

__all__ = ["main", "cmd_simulate", "cmd_infer", "cmd_screen", "cmd_diagnose"]


# ---------------------------------------------------------------------------
# config handling

class _Required:
    def __repr__(self):
        return "<required>"


REQUIRED = _Required()

# CLI default stride is 10; the library ScreenerConfig default stays 1
# (exact per-step schedule) for programmatic callers.
_SCREENER_DEFAULTS = {"method": SIRS, "keep": None, "refresh_every": 10}
_SOLVER_DEFAULTS = {"radius": 10.0, "tol": 1e-6, "max_iter": 5000, "step_size": None}

SIMULATE_DEFAULTS = {
    "setting": "sim",
    "n": REQUIRED,
    "p": REQUIRED,
    "beta0": REQUIRED,  # {"<1-based index>": value}
    "rho": 0.5,
    "error_model": {"kind": CONTAMINATED, "sigma": 5.0},
    "reps": REQUIRED,
    "targets": REQUIRED,  # 1-based indices
    "seed": 0,
    "threads": 1,
    "alpha": 0.05,
    "loss": "tukey",
    "tuning": None,
    "s_n": None,
    "l": 8,
    "screener": _SCREENER_DEFAULTS,
    "solver": _SOLVER_DEFAULTS,
    "cv_folds": 5,
    "lambda_grid": None,
    "adaptive_gamma": 1.0,
    "out": "results.csv",
}

INFER_DEFAULTS = {
    "alpha": 0.05,
    "targets": None,  # null means every feature column
    "loss": "tukey",
    "tuning": None,
    "s_n": None,
    "l": 8,
    "seed": 0,
    "screener": _SCREENER_DEFAULTS,
    "solver": _SOLVER_DEFAULTS,
    "cv_folds": 5,
    "lambda_grid": None,
    "adaptive_gamma": 1.0,
    "out": "inference.csv",
}

SCREEN_DEFAULTS = {
    "method": SIRS,
    "keep": None,
    "out": None,
}

DIAGNOSE_DEFAULTS = {
    "loss": "tukey",
    "tuning": None,
    "seed": 0,
    "solver": _SOLVER_DEFAULTS,
    "cv_folds": 5,
    "lambda_grid": None,
    "adaptive_gamma": 1.0,
    "out": "diagnostics",
}


def load_config_file(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


def merge_config(defaults, given, prefix=""):
    """Overlay a user config on defaults, rejecting any key not in defaults."""
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in defaults.items()}
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {prefix + key!r}")
        base = defaults[key]
        if isinstance(base, dict) and val is not None:
            if not isinstance(val, dict):
                raise ConfigError(f"config key {prefix + key!r} must be an object")
            out[key] = merge_config(base, val, prefix=f"{prefix}{key}.")
        else:
            out[key] = val
    return out


def _require(cfg, keys):
    missing = [k for k in keys if cfg.get(k) is REQUIRED]
    if missing:
        raise ConfigError(f"missing required config key(s): {', '.join(missing)}")


def _apply_overrides(cfg, args, mapping):
    for attr, key in mapping.items():
        val = getattr(args, attr, None)
        if val is not None:
            cfg[key] = val


def _print_config(cfg):
    print(json.dumps(cfg, indent=2, sort_keys=True))


def _one_based(label):
    """Parse a 1-based coefficient label from config or flag input."""
    try:
        k = int(label)
    except (TypeError, ValueError):
        raise ConfigError(f"coefficient label must be a 1-based integer, got {label!r}")
    if k < 1:
        raise ConfigError(f"coefficient labels are 1-based, got {k}")
    return k - 1


def _build_error_model(merged, user_raw):
    kind = merged["kind"]
    sigma = merged["sigma"]
    # a lognormal_sign model only carries sigma if the user wrote one
    if kind == LOGNORMAL_SIGN and "sigma" not in user_raw:
        sigma = None
    try:
        return ErrorModel(kind, sigma)
    except ValueError as exc:
        raise ConfigError(f"error_model: {exc}")


def _fit_config(cfg, j0, extra=None):
    """InferenceConfig from the generic config keys; extra overrides fields."""
    kwargs = dict(
        j0=j0,
        loss=LossSpec(cfg["loss"], cfg["tuning"]),
        solver=SolverConfig(
            lam=0.0,
            step_size=cfg["solver"]["step_size"],
            radius=cfg["solver"]["radius"],
            tol=cfg["solver"]["tol"],
            max_iter=cfg["solver"]["max_iter"],
        ),
        adaptive_gamma=cfg["adaptive_gamma"],
        cv_folds=cfg["cv_folds"],
        lambda_grid=None if cfg["lambda_grid"] is None else tuple(cfg["lambda_grid"]),
        seed=SeedSpec(int(cfg["seed"])),
    )
    if extra:
        kwargs.update(extra)
    return InferenceConfig(**kwargs)


# ---------------------------------------------------------------------------
# data files

def load_data_csv(path):
    """Read a feature CSV with a y column; returns (Dataset, feature names).

    Header row required; every other column is a numeric feature, in file
    order. Any unparseable or nonfinite cell is reported by row and column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc}")
    if not rows:
        raise DataError(f"data file {path} is empty")
    header = [h.strip() for h in rows[0]]
    if "y" not in header:
        raise DataError("data file has no 'y' column")
    ycol = header.index("y")
    names = [h for i, h in enumerate(header) if i != ycol]
    if not names:
        raise DataError("data file has no feature columns")
    if len(set(names)) != len(names):
        raise DataError("duplicate feature column names")
    body = rows[1:]
    if not body:
        raise DataError("data file has no data rows")
    vals = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        line = i + 2  # 1-based file line, after the header
        if len(row) != len(header):
            raise DataError(f"row {line}: expected {len(header)} fields, got {len(row)}")
        for j, tok in enumerate(row):
            try:
                vals[i, j] = float(tok)
            except ValueError:
                raise DataError(f"row {line}, column {header[j]!r}: not a number: {tok!r}")
            if not math.isfinite(vals[i, j]):
                raise DataError(f"row {line}, column {header[j]!r}: nonfinite value {tok!r}")
    feat = [j for j in range(len(header)) if j != ycol]
    return Dataset(vals[:, feat], vals[:, ycol]), names


def _resolve_targets(tokens, names):
    """Map target labels (feature name or 1-based index) to 0-based indices."""
    out = []
    for tok in tokens:
        tok = str(tok)
        if tok in names:
            out.append(names.index(tok))
            continue
        try:
            k = int(tok)
        except ValueError:
            raise ConfigError(f"unknown target {tok!r}: not a feature name or 1-based index")
        if not 1 <= k <= len(names):
            raise ConfigError(f"target index {k} out of range 1..{len(names)}")
        out.append(k - 1)
    if len(set(out)) != len(out):
        raise ConfigError("duplicate targets")
    return out


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _num(v):
    """Full-fidelity decimal form so reruns are byte-identical."""
    return repr(float(v))


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args):
    raw = load_config_file(args.config)
    cfg = merge_config(SIMULATE_DEFAULTS, raw)
    _apply_overrides(cfg, args, {
        "reps": "reps", "seed": "seed", "threads": "threads", "alpha": "alpha",
        "loss": "loss", "tuning": "tuning", "out": "out",
    })
    _require(cfg, ["n", "p", "beta0", "reps", "targets"])
    if args.print_config:
        _print_config(cfg)
        return 0
    if not isinstance(cfg["beta0"], dict):
        raise ConfigError("beta0 must be an object mapping 1-based indices to values")
    try:
        beta0 = {_one_based(k): float(v) for k, v in cfg["beta0"].items()}
        targets = tuple(_one_based(t) for t in cfg["targets"])
        em = _build_error_model(cfg["error_model"], raw.get("error_model", {}))
        method = _fit_config(cfg, j0=0, extra={
            "alpha": cfg["alpha"],
            "s_n": cfg["s_n"],
            "newton_steps": cfg["l"],
            "screener": ScreenerConfig(**cfg["screener"]),
        })
        design = SimDesign(
            n=int(cfg["n"]), p=int(cfg["p"]), beta0=beta0, error_model=em,
            reps=int(cfg["reps"]), seed=SeedSpec(int(cfg["seed"])),
            targets=targets, method=method, rho=float(cfg["rho"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    rows, _records = run_replications(design, threads=int(cfg["threads"]))
    out_rows = [
        [cfg["setting"], r.target + 1, _num(r.ecp), _num(100.0 * r.al_mean),
         _num(100.0 * r.al_sd), r.reps_ok, design.reps]
        for r in rows
    ]
    _write_csv(cfg["out"], ["setting", "target", "ecp", "al_mean_x100", "al_sd_x100", "reps_ok", "reps"], out_rows)
    em_label = em.kind if em.sigma is None else f"{em.kind}(sigma={em.sigma})"
    print(f"setting={cfg['setting']}  loss={cfg['loss']}  errors={em_label}  "
          f"n={design.n} p={design.p} reps={design.reps}")
    print("coefficient labels are 1-based (beta_k is internal index k-1)")
    print(f"{'target':>8}  {'ECP':>6}  {'AL x100':>9}  {'SD x100':>9}  {'reps_ok':>7}")
    for r in rows:
        print(f"{'beta_' + str(r.target + 1):>8}  {r.ecp:6.3f}  {100 * r.al_mean:9.2f}  "
              f"{100 * r.al_sd:9.2f}  {r.reps_ok:7d}")
    print(f"wrote {cfg['out']}")
    return 0


def cmd_infer(args):
    cfg = merge_config(INFER_DEFAULTS, load_config_file(args.config))
    _apply_overrides(cfg, args, {
        "alpha": "alpha", "loss": "loss", "tuning": "tuning", "seed": "seed", "out": "out",
    })
    if args.target:
        cfg["targets"] = list(args.target)
    if args.print_config:
        _print_config(cfg)
        return 0
    d, names = load_data_csv(args.data)
    try:
        ds, record = standardize(d)
    except ZeroVarianceColumn as exc:
        raise DataError(f"feature column {names[exc.col]!r} is constant")
    if cfg["targets"] is None:
        targets = list(range(len(names)))
    else:
        targets = _resolve_targets(cfg["targets"], names)
    try:
        fit_cfg = _fit_config(cfg, j0=targets[0], extra={
            "alpha": cfg["alpha"],
            "s_n": cfg["s_n"],
            "newton_steps": cfg["l"],
            "screener": ScreenerConfig(**cfg["screener"]),
        })
    except ValueError as exc:
        raise ConfigError(str(exc))
    results = bonferroni_infer(ds, fit_cfg, targets)
    out_rows, failures, significant = [], [], []
    for t in results:
        if t.error is not None:
            failures.append((names[t.j0], t.error))
            continue
        scale = record.x_scale[t.j0]
        est = t.result.beta_hat / scale
        lo = t.result.ci_lo / scale
        hi = t.result.ci_hi / scale
        out_rows.append([names[t.j0], _num(est), _num(lo), _num(hi),
                         _num(t.adjusted_alpha), "true" if t.significant else "false"])
        if t.significant:
            significant.append((names[t.j0], est, lo, hi))
    if not out_rows:
        print("all targets failed:", file=sys.stderr)
        for name, err in failures:
            print(f"  {name}: {err}", file=sys.stderr)
        return 3
    _write_csv(cfg["out"], ["feature", "estimate", "ci_lo", "ci_hi", "adjusted_alpha", "significant"], out_rows)
    print(f"n={d.n} p={d.p} targets={len(targets)} alpha={cfg['alpha']} "
          f"(Bonferroni-adjusted per-target alpha={cfg['alpha'] / len(targets):g})")
    if significant:
        print("significant features:")
        for name, est, lo, hi in significant:
            print(f"  {name}: estimate={est:.4f}, CI=[{lo:.4f}, {hi:.4f}]")
    else:
        print("no significant features at this level")
    for name, err in failures:
        print(f"failed target {name}: {err}")
    print(f"wrote {cfg['out']}")
    return 0


def cmd_screen(args):
    cfg = merge_config(SCREEN_DEFAULTS, load_config_file(args.config))
    if args.out is not None:
        cfg["out"] = args.out
    if args.print_config:
        _print_config(cfg)
        return 0
    if cfg["method"] not in (SIRS, SIS):
        raise ConfigError(f"method must be {SIRS!r} or {SIS!r}, got {cfg['method']!r}")
    d, names = load_data_csv(args.data)
    try:
        stats = sirs_stats(d) if cfg["method"] == SIRS else sis_stats(d)
    except ZeroVarianceColumn as exc:
        col = "y" if exc.col == "y" else names[exc.col]
        raise DataError(f"column {col!r} is constant")
    except ValueError as exc:
        raise DataError(str(exc))
    keep = cfg["keep"] if cfg["keep"] is not None else default_keep(d.n)
    if keep < 1:
        raise ConfigError("keep must be >= 1")
    keep = min(int(keep), d.p)
    order = np.argsort(-stats, kind="stable")[:keep]
    print(f"method={cfg['method']}  keeping top {keep} of {d.p} features")
    print(f"{'rank':>4}  {'feature':<20}  statistic")
    rows = []
    for r, j in enumerate(order, start=1):
        print(f"{r:>4}  {names[j]:<20}  {stats[j]:.6g}")
        rows.append([r, names[j], _num(stats[j])])
    if cfg["out"]:
        _write_csv(cfg["out"], ["rank", "feature", "statistic"], rows)
        print(f"wrote {cfg['out']}")
    return 0


def cmd_diagnose(args):
    cfg = merge_config(DIAGNOSE_DEFAULTS, load_config_file(args.config))
    _apply_overrides(cfg, args, {
        "loss": "loss", "tuning": "tuning", "seed": "seed", "out": "out",
    })
    if args.print_config:
        _print_config(cfg)
        return 0
    d, names = load_data_csv(args.data)
    try:
        ds, _record = standardize(d)
    except ZeroVarianceColumn as exc:
        raise DataError(f"feature column {names[exc.col]!r} is constant")
    try:
        fit_cfg = _fit_config(cfg, j0=0)
    except ValueError as exc:
        raise ConfigError(str(exc))
    beta = initial_estimator(ds, fit_cfg.loss, fit_cfg)
    res = ds.y - ds.x @ beta
    os.makedirs(cfg["out"], exist_ok=True)
    _write_csv(os.path.join(cfg["out"], "residuals.csv"), ["index", "residual"],
               [[i + 1, _num(r)] for i, r in enumerate(res)])
    counts, edges = np.histogram(res, bins=30)
    _write_csv(os.path.join(cfg["out"], "histogram.csv"), ["bin_lo", "bin_hi", "count"],
               [[_num(edges[k]), _num(edges[k + 1]), int(counts[k])] for k in range(30)])
    srt = np.sort(res)
    n = len(srt)
    theo = [normal_quantile(1.0 - (i - 0.5) / n) for i in range(1, n + 1)]
    _write_csv(os.path.join(cfg["out"], "qq.csv"),
               ["theoretical_normal_quantile", "sample_quantile"],
               [[_num(t), _num(s)] for t, s in zip(theo, srt)])
    centered = res - res.mean()
    m2 = float(np.mean(centered ** 2))
    m3 = float(np.mean(centered ** 3))
    g1 = 0.0 if m2 == 0.0 else m3 / m2 ** 1.5
    print(f"n={n} residual skewness g1 = {g1:.6f}")
    print(f"wrote {cfg['out']}/residuals.csv, histogram.csv, qq.csv")
    return 0


# ---------------------------------------------------------------------------
# parser / entry point

class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser():
    p = _Parser(prog="recscore", description="Robust high-dimensional regression inference.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a Monte Carlo coverage study from a config file")
    sim.add_argument("--config", required=True, help="JSON study config")
    sim.add_argument("--out", help="results CSV path")
    sim.add_argument("--reps", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--threads", type=int)
    sim.add_argument("--alpha", type=float)
    sim.add_argument("--loss")
    sim.add_argument("--tuning", type=float)
    sim.add_argument("--print-config", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    inf = sub.add_parser("infer", help="confidence intervals for coefficients of a data CSV")
    inf.add_argument("--data", required=True, help="CSV with a y column and numeric features")
    inf.add_argument("--config")
    inf.add_argument("--out")
    inf.add_argument("--target", action="append", help="feature name or 1-based index (repeatable)")
    inf.add_argument("--alpha", type=float)
    inf.add_argument("--loss")
    inf.add_argument("--tuning", type=float)
    inf.add_argument("--seed", type=int)
    inf.add_argument("--print-config", action="store_true")
    inf.set_defaults(func=cmd_infer)

    scr = sub.add_parser("screen", help="rank features by marginal screening statistic")
    scr.add_argument("--data", required=True)
    scr.add_argument("--config")
    scr.add_argument("--out")
    scr.add_argument("--print-config", action="store_true")
    scr.set_defaults(func=cmd_screen)

    dia = sub.add_parser("diagnose", help="residual diagnostics for the robust fit")
    dia.add_argument("--data", required=True)
    dia.add_argument("--config")
    dia.add_argument("--out")
    dia.add_argument("--loss")
    dia.add_argument("--tuning", type=float)
    dia.add_argument("--seed", type=int)
    dia.add_argument("--print-config", action="store_true")
    dia.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except AllRepsFailed as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except RecscoreError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
