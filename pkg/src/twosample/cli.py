"""Command-line front end: ``twosample {test,curves,null-sim,power-bench,rate-bench}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .calibration import (
    DEFAULT_GRID,
    NullKind,
    NullModel,
    QuantileTable,
    TestReport,
    asymptotic_pvalue,
    null_label_for,
    permutation_null,
    pvalue_from_null,
    simulate_bridge_functional,
    table_kind_for,
)
from .dataio import ParseError, dumps_json, ingest, rows_to_csv
from .empirical import auc, build_empirical, odc_curve, pp_points, qq_pieces, roc_curve
from .registry import NAMES, get_statistic
from .transport import cost_matrix, exact_wasserstein_lp, sinkhorn
from .univariate import compute

log = logging.getLogger("twosample")

# defaults applied after the optional --config file; flags override both
DEFAULTS = {
    "stat": "ks", "p": 1.0, "lambda": 0.0, "gamma": None, "alpha": 0.05, "perms": 999, "seed": 0,
    "calib": "perm", "format": "json", "table": None, "paths": 10000, "grid": DEFAULT_GRID,
    "kind": "sup", "stats": "energy,mmd", "sizes": "25,50,100,200", "dims": "1", "shift": 1.0,
    "generator": None, "alternative": "mean_shift", "trials": 200, "out": None, "x": None, "y": None,
    "plan_out": None,
}


def _csv_list(text, cast=int):
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    return [cast(v) for v in str(text).split(",") if v.strip()]


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    if not 0 < float(cfg["alpha"]) < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _require_inputs(cfg):
    if not cfg["x"] or not cfg["y"]:
        raise ValueError("--x and --y are required")
    return ingest(cfg["x"]), ingest(cfg["y"])


def run_test(cfg: dict) -> TestReport:
    x, y = _require_inputs(cfg)
    stat = get_statistic(cfg["stat"], cfg["p"], cfg["lambda"], cfg["gamma"])
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    if stat.univariate and x.dim != 1:
        raise ValueError(f"{stat.name} needs 1-D samples")
    n, m = x.size, y.size
    raw, scaled = stat.evaluate(x, y)
    if cfg["calib"] == "perm":
        model = NullModel(NullKind.PERMUTATION, int(cfg["perms"]), int(cfg["seed"]))
        observed, null = permutation_null(np.vstack([x.points, y.points]), n, m, stat,
                                          int(cfg["perms"]), int(cfg["seed"]))
        p_value = pvalue_from_null(observed, null)
    elif cfg["calib"] == "asymp":
        if not stat.univariate:
            raise ValueError(f"asymptotic calibration unavailable for {stat.name}; use --calib perm")
        try:
            needed = table_kind_for(stat.kind)
        except ValueError:
            raise ValueError(f"asymptotic calibration unavailable for {stat.name} "
                             "(null law depends on the unknown F); use --calib perm") from None
        if cfg["table"]:
            table = QuantileTable.from_csv(Path(cfg["table"]).read_text())
        else:
            table = simulate_bridge_functional(needed, int(cfg["paths"]), int(cfg["grid"]), int(cfg["seed"]))
        model = NullModel(null_label_for(stat.kind), table.size,
                          table.seed if table.seed is not None else int(cfg["seed"]),
                          table.grid_size or int(cfg["grid"]))
        p_value = asymptotic_pvalue(compute(stat.kind, x, y, stat.p), table)
    else:
        raise ValueError("--calib must be perm or asymp")
    alpha = float(cfg["alpha"])
    return TestReport(
        statistic=stat.name, params=stat.params(), raw_value=raw, scaled_value=scaled,
        p_value=p_value, alpha=alpha, reject=p_value <= alpha, calibration=model.to_dict(),
        sample_sizes=(n, m), config={k: cfg[k] for k in sorted(cfg) if cfg[k] is not None},
    )


def export_plan(cfg: dict) -> str:
    """Dense CSV of the coupling between X and Y: exact LP at lambda = 0, Sinkhorn otherwise."""
    x, y = _require_inputs(cfg)
    M = cost_matrix(x, y, float(cfg["p"]))
    lam = float(cfg["lambda"])
    plan = exact_wasserstein_lp(M)[1] if lam == 0 else sinkhorn(M, lam).plan
    header = [f"y{j}" for j in range(y.size)]
    return rows_to_csv(header, plan.coupling.tolist())


def _cmd_test(cfg):
    report = run_test(cfg)
    if cfg["plan_out"]:
        Path(cfg["plan_out"]).write_text(export_plan(cfg))
    if cfg["format"] == "json":
        _emit(dumps_json(report.to_dict()), cfg["out"])
    else:
        d = report.to_dict()
        header = ["statistic", "raw_value", "scaled_value", "p_value", "alpha", "reject", "n", "m", "calibration"]
        row = [d["statistic"], d["raw_value"], d["scaled_value"], d["p_value"], d["alpha"],
               d["reject"], d["sample_sizes"][0], d["sample_sizes"][1], d["calibration"]["kind"]]
        _emit(rows_to_csv(header, [row]), cfg["out"])


def export_curves(cfg: dict) -> dict[str, str]:
    """Write PP, QQ, ROC and ODC curves; returns ``{filename: contents}``."""
    x, y = _require_inputs(cfg)
    if x.dim != 1 or y.dim != 1:
        raise ValueError("curves need 1-D samples")
    fx, gy = build_empirical(x), build_empirical(y)
    odc, roc = odc_curve(fx, gy), roc_curve(fx, gy)
    area = auc(roc)
    pp = pp_points(fx, gy)
    qq = qq_pieces(fx, gy)
    if cfg["format"] == "json":
        def pieces(sf):
            return [{"t_lo": a, "t_hi": b, "value": v} for a, b, v in sf.pieces()]
        doc = {
            "n": fx.n, "m": gy.n,
            "pp": [{"z": r[0], "cdf_x": r[1], "cdf_y": r[2]} for r in pp.tolist()],
            "qq": [{"t_lo": r[0], "t_hi": r[1], "quantile_x": r[2], "quantile_y": r[3]} for r in qq.tolist()],
            "odc": pieces(odc),
            "roc": {"auc": area, "pieces": pieces(roc)},
        }
        files = {"curves.json": dumps_json(doc)}
    else:
        files = {
            "pp.csv": rows_to_csv(["z", "cdf_x", "cdf_y"], pp.tolist()),
            "qq.csv": rows_to_csv(["t_lo", "t_hi", "quantile_x", "quantile_y"], qq.tolist()),
            "odc.csv": odc.to_csv(),
            "roc.csv": roc.to_csv(),
            "curves.json": dumps_json({"n": fx.n, "m": gy.n, "roc_auc": area}),
        }
    outdir = Path(cfg["out"] or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (outdir / name).write_text(text)
    return files


def _cmd_curves(cfg):
    files = export_curves(cfg)
    outdir = Path(cfg["out"] or ".")
    for name in files:
        print(outdir / name)


def _cmd_null_sim(cfg):
    kind = {"sup": NullKind.BRIDGE_SUP, "l2": NullKind.BRIDGE_L2}.get(str(cfg["kind"]).lower())
    if kind is None:
        raise ValueError("--kind must be sup or l2")
    table = simulate_bridge_functional(kind, int(cfg["paths"]), int(cfg["grid"]), int(cfg["seed"]))
    if cfg["format"] == "json":
        levels = [0.5, 0.9, 0.95, 0.99]
        doc = {"kind": kind.value, "paths": table.size, "grid": table.grid_size, "seed": table.seed,
               "mean": float(table.values.mean()),
               "quantiles": {repr(a): table.quantile(a) for a in levels}}
        _emit(dumps_json(doc), cfg["out"])
    else:
        _emit(table.to_csv(), cfg["out"])


def _cmd_power(cfg):
    rows = bench.power_bench(
        stats=_csv_list(cfg["stats"], str), sizes=_csv_list(cfg["sizes"]), dims=_csv_list(cfg["dims"]),
        shift=float(cfg["shift"]), generator=cfg["generator"] or "gaussian",
        alternative=cfg["alternative"], trials=int(cfg["trials"]), alpha=float(cfg["alpha"]),
        perms=int(cfg["perms"]), seed=int(cfg["seed"]))
    fields = ["statistic", "n", "d", "shift", "rejection_rate", "trials"]
    if cfg["format"] == "json":
        _emit(dumps_json({"config": _echo(cfg), "rows": [r.__dict__ for r in rows]}), cfg["out"])
    else:
        _emit(rows_to_csv(fields, [[getattr(r, f) for f in fields] for r in rows]), cfg["out"])


def _cmd_rate(cfg):
    rows, slopes = bench.rate_bench(
        dims=_csv_list(cfg["dims"]), sizes=_csv_list(cfg["sizes"]), trials=int(cfg["trials"]),
        generator=cfg["generator"] or "uniform", seed=int(cfg["seed"]))
    fields = ["d", "n", "mean_w1", "std_w1", "trials"]
    if cfg["format"] == "json":
        doc = {"config": _echo(cfg), "rows": [r.__dict__ for r in rows],
               "slopes": {str(d): s for d, s in slopes.items()}}
        _emit(dumps_json(doc), cfg["out"])
    else:
        text = rows_to_csv(fields + ["slope"], [[getattr(r, f) for f in fields] + [slopes[r.d]] for r in rows])
        _emit(text, cfg["out"])


def _echo(cfg):
    return {k: cfg[k] for k in sorted(cfg) if cfg[k] is not None and k != "out"}


COMMANDS = {
    "test": _cmd_test,
    "curves": _cmd_curves,
    "null-sim": _cmd_null_sim,
    "power-bench": _cmd_power,
    "rate-bench": _cmd_rate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults; flags override it")
    common.add_argument("--x", help="CSV file with the X sample")
    common.add_argument("--y", help="CSV file with the Y sample")
    common.add_argument("--stat", help=f"statistic: {', '.join(NAMES)}")
    common.add_argument("--p", type=float, help="ground-cost exponent")
    common.add_argument("--lambda", dest="lambda", type=float, help="entropic regularisation weight")
    common.add_argument("--gamma", type=float, help="Gaussian kernel bandwidth (default: median heuristic)")
    common.add_argument("--alpha", type=float, help="test level")
    common.add_argument("--perms", type=int, help="number of permutation resamples")
    common.add_argument("--seed", type=int)
    common.add_argument("--calib", choices=["perm", "asymp"])
    common.add_argument("--table", help="quantile table CSV from null-sim")
    common.add_argument("--paths", type=int, help="bridge paths to simulate")
    common.add_argument("--grid", type=int, help="bridge grid size")
    common.add_argument("--out", help="output file (directory for curves)")
    common.add_argument("--plan-out", dest="plan_out", help="test: also write the transport plan as dense CSV")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="twosample", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("test", parents=[common], help="run one two-sample test")
    sub.add_parser("curves", parents=[common], help="export PP/QQ/ROC/ODC step curves")
    ns = sub.add_parser("null-sim", parents=[common], help="simulate a Brownian-bridge quantile table")
    ns.add_argument("--kind", choices=["sup", "l2"])
    for name in ("power-bench", "rate-bench"):
        b = sub.add_parser(name, parents=[common])
        b.add_argument("--sizes", help="comma-separated sample sizes")
        b.add_argument("--dims", help="comma-separated dimensions")
        b.add_argument("--trials", type=int)
        b.add_argument("--generator", help="uniform, exponential, logit or gaussian")
        if name == "power-bench":
            b.add_argument("--stats", help="comma-separated statistic names")
            b.add_argument("--shift", type=float)
            b.add_argument("--alternative", choices=["none", "mean_shift", "scale_shift"])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        COMMANDS[args.command](cfg)
    except (ValueError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
