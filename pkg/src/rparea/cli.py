"""Command-line front end: every experiment as a seeded, reproducible run.

Each invocation writes a JSON run manifest before any result file, then one
or more CSV tables. Identical command lines (including --seed) produce
byte-identical CSVs for any --threads value.
"""

from __future__ import annotations

import argparse
import csv
import json
import subprocess
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .afriat import AfriatSystem, solve_afriat
from .bounds import BoundParams, enumerate_cycles, theorem1_area_bound, theorem1_rate, theorem2_area_bound, theorem2_rate
from .dataset import Dataset, DatasetFormatError, read_dataset, write_csv as write_dataset_csv
from .designs import ChoiConfig, SmpConfig, choi_design, smp_design
from .estimator import (
    AreaEstimate,
    EstimatorConfig,
    area_curve,
    estimate_area,
    estimate_area_fixed_prices,
    estimate_design_area,
    estimate_separability_area,
)
from .garp import check_garp
from .sampling import PRNG_IDENTITY, PriceDistribution, RngStream, sample_simplex

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2

AREA_COLUMNS = ["K", "T", "sigma", "mode", "mean", "ci_lo", "ci_hi", "draws", "replications", "seed"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10, cwd=Path(__file__).parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


class Run:
    """Output directory plus the manifest, which is written before results."""

    def __init__(self, args, subcommand: str, config: dict):
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.fmt = args.format
        self.files: list[str] = []
        self.manifest_path = self.out / f"{subcommand}_manifest.json"
        self.manifest = {
            "command_line": sys.argv,
            "subcommand": subcommand,
            "config": config,
            "seed": getattr(args, "seed", None),
            "threads": getattr(args, "threads", 1),
            "prng": PRNG_IDENTITY,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "build": _git_describe(),
            "version": __version__,
            "outputs": self.files,
        }
        self._write_manifest()

    def _write_manifest(self):
        with open(self.manifest_path, "w") as fh:
            json.dump(self.manifest, fh, indent=2)
            fh.write("\n")

    def emit_table(self, name: str, columns: list[str], rows: list[list]):
        if self.fmt == "json":
            path = self.out / f"{name}.json"
            payload = [dict(zip(columns, row)) for row in rows]
            with open(path, "w") as fh:
                json.dump(payload, fh, indent=2, default=float)
                fh.write("\n")
        else:
            path = self.out / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(columns)
                for row in rows:
                    w.writerow([_fmt(v) for v in row])
        self.files.append(str(path))
        self._write_manifest()
        print(f"wrote {path}")


def _area_row(K, T, sigma, est: AreaEstimate, seed) -> list:
    return [K, T, sigma, est.mode, est.mean, est.ci_lo, est.ci_hi, est.draws, est.replications, seed]


def _config(args, **overrides) -> EstimatorConfig:
    kw = dict(
        max_draws=args.draws,
        replications=args.replications,
        target_halfwidth=args.target_halfwidth,
        seed=args.seed,
        threads=args.threads,
    )
    kw.update(overrides)
    return EstimatorConfig(**kw)


def _dist(args) -> PriceDistribution:
    return PriceDistribution(mu=args.mu, sigma=args.sigma)


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    try:
        dataset = read_dataset(args.dataset)
    except (DatasetFormatError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stdout)
        return EXIT_INPUT_ERROR
    report: dict = {"file": str(args.dataset), "method": args.method, "T": dataset.T, "K": dataset.K}
    consistent = True
    if args.method in ("garp", "both"):
        verdict = check_garp(dataset, tol_edge=args.tol_edge)
        report["garp"] = {
            "satisfied": verdict.satisfied,
            "witness": [v + 1 for v in verdict.witness] if verdict.witness else None,
        }
        consistent &= verdict.satisfied
    if args.method in ("lp", "both"):
        witness = solve_afriat(AfriatSystem.from_dataset(dataset), tol_lp=args.tol_lp)
        report["lp"] = {
            "feasible": witness.feasible,
            "marginal": witness.marginal,
            "U": witness.U.tolist() if witness.U is not None else None,
            "lambda": witness.lam.tolist() if witness.lam is not None else None,
        }
        consistent &= witness.feasible
    report["consistent"] = consistent
    print(json.dumps(report, indent=2))
    return EXIT_OK if consistent else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# area
# ---------------------------------------------------------------------------

def cmd_area(args) -> int:
    cfg = _config(args)
    if args.prices:
        try:
            prices_ds = read_dataset(args.prices)
        except (DatasetFormatError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        r = prices_ds.r
        run = Run(args, "area", {"prices": str(args.prices), "mode": args.mode, "estimator": asdict(cfg)})
        est = estimate_area_fixed_prices(r, cfg, mode=args.mode)
        rows = [_area_row(r.shape[1], r.shape[0], None, est, cfg.seed)]
    else:
        run = Run(args, "area", {
            "K": args.K, "T": args.T, "mu": args.mu, "sigma": args.sigma,
            "mode": args.mode, "estimator": asdict(cfg),
        })
        est = estimate_area(args.K, args.T, _dist(args), cfg, mode=args.mode)
        rows = [_area_row(args.K, args.T, args.sigma, est, cfg.seed)]
    run.emit_table("area", AREA_COLUMNS, rows)
    print(f"area = {est.mean:.6f}  [{est.ci_lo:.6f}, {est.ci_hi:.6f}]")
    return EXIT_OK


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

CURVE_PRESETS = {
    # panel (a): area against K for several T at the scanner-data benchmark
    "fig3a": {"T_list": [10, 20, 30, 40, 50], "sigmas": [1.0], "K_grid": list(range(2, 26))},
    # panel (b): area against K for several sigma at T=25
    "fig3b": {"T_list": [25], "sigmas": [0.3, 0.5, 0.7, 0.9, 1.0, 1.1], "K_grid": list(range(5, 101, 5))},
}


def cmd_curve(args) -> int:
    if args.preset:
        if args.preset not in CURVE_PRESETS:
            print(f"error: unknown preset {args.preset!r}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        spec = CURVE_PRESETS[args.preset]
        T_list = spec["T_list"]
        sigmas = spec["sigmas"]
        K_grid = spec["K_grid"]
        draws = args.draws if args.full else max(100, args.draws // 10)
    else:
        T_list = [args.T]
        sigmas = [args.sigma]
        K_grid = args.K_grid or list(range(2, 26))
        draws = args.draws
    cfg = _config(args, max_draws=draws)
    run = Run(args, "curve", {
        "preset": args.preset, "T_list": T_list, "sigmas": sigmas, "K_grid": K_grid,
        "mu": args.mu, "mode": args.mode, "full": args.full, "estimator": asdict(cfg),
    })
    if args.dry_run:
        return EXIT_OK
    rows = []
    gi = 0
    for sigma in sigmas:
        dist = PriceDistribution(mu=args.mu, sigma=sigma)
        for T in T_list:
            for K in K_grid:
                est = estimate_area(K, T, dist, cfg, mode=args.mode, grid_index=gi)
                rows.append(_area_row(K, T, sigma, est, cfg.seed))
                gi += 1
    run.emit_table("curve", AREA_COLUMNS, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# separability
# ---------------------------------------------------------------------------

def cmd_separability(args) -> int:
    if args.preset:
        if args.preset != "fig4":
            print(f"error: unknown preset {args.preset!r}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        K, T = 24, 10
        group_sizes = [2, 3, 4, 6, 8, 12, 24]
        replications = 10
        n_partitions = args.partitions
        draws = args.draws if args.full else max(100, args.draws // 10)
    else:
        K, T = args.K, args.T
        group_sizes = args.group_sizes or [K]
        replications = args.replications
        n_partitions = args.partitions
        draws = args.draws
    cfg = _config(args, max_draws=draws, replications=replications)
    run = Run(args, "separability", {
        "preset": args.preset, "K": K, "T": T, "group_sizes": group_sizes,
        "partitions": n_partitions, "mu": args.mu, "sigma": args.sigma,
        "full": args.full, "estimator": asdict(cfg),
    })
    if args.dry_run:
        return EXIT_OK
    dist = _dist(args)
    columns = AREA_COLUMNS + ["group_size"]
    rows = []
    unrestricted = estimate_area(K, T, dist, cfg, mode="garp", grid_index=0)
    rows.append(_area_row(K, T, args.sigma, unrestricted, cfg.seed) + [""])
    gi = 1
    for G in group_sizes:
        for kind in ("weak-necessary", "additive"):
            est = estimate_separability_area(
                K, T, dist, kind, cfg, group_size=G, n_partitions=n_partitions, grid_index=gi,
            )
            rows.append(_area_row(K, T, args.sigma, est, cfg.seed) + [G])
            gi += 1
    run.emit_table("separability", columns, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------

DESIGN_PRESETS = {
    "fig5a": {"design": "choi", "T": 25, "K_grid": [4, 8, 12, 16, 20, 24, 28, 32, 36, 40],
              "benchmark_sigmas": [0.3, 0.5, 0.7, 0.9, 1.0, 1.1]},
    "fig5b": {"design": "smp", "T": 20, "K_grid": [2, 5, 10, 15, 20, 25], "benchmark_sigmas": [1.0]},
}


def cmd_design(args) -> int:
    if args.preset:
        if args.preset not in DESIGN_PRESETS:
            print(f"error: unknown preset {args.preset!r}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        spec = DESIGN_PRESETS[args.preset]
        design_name = spec["design"]
        T = spec["T"]
        K_grid = spec["K_grid"]
        benchmark_sigmas = spec["benchmark_sigmas"]
        draws = args.draws if args.full else max(100, args.draws // 10)
        replications = args.replications
    else:
        design_name = args.design
        T = args.T
        K_grid = args.K_grid or [args.K]
        benchmark_sigmas = args.benchmark_sigmas or []
        draws = args.draws
        replications = args.replications
    cfg = _config(args, max_draws=draws, replications=replications)
    run = Run(args, "design", {
        "design": design_name, "preset": args.preset, "T": T, "K_grid": K_grid,
        "benchmark_sigmas": benchmark_sigmas, "a": args.a, "b": args.b,
        "choi_rule": args.choi_rule, "mu": args.mu, "sigma": args.sigma,
        "full": args.full, "emit": args.emit, "estimator": asdict(cfg),
    })
    if args.dry_run:
        return EXIT_OK
    columns = ["series"] + AREA_COLUMNS
    rows = []
    for gi, K in enumerate(K_grid):
        if design_name == "choi":
            dcfg = ChoiConfig(K=K, T=T, a=args.a, b=args.b, rule=args.choi_rule)
        else:
            dcfg = SmpConfig(K=K, T=T, dist=_dist(args))
        est = estimate_design_area(dcfg, cfg)
        rows.append([design_name] + _area_row(K, T, None, est, cfg.seed))
    for sigma in benchmark_sigmas:
        dist = PriceDistribution(mu=args.mu, sigma=sigma)
        for gi, K in enumerate(K_grid):
            est = estimate_area(K, T, dist, cfg, mode="garp", grid_index=gi)
            rows.append([f"benchmark-logn-{sigma}"] + _area_row(K, T, sigma, est, cfg.seed))
    run.emit_table("design", columns, rows)
    if args.emit:
        root = RngStream(cfg.seed)
        for i in range(args.emit):
            stream = root.child(10_000 + i, 0, 3)
            if design_name == "smp":
                ds = smp_design(SmpConfig(K=K_grid[0], T=T, dist=_dist(args)), stream)
            else:
                r = choi_design(ChoiConfig(K=K_grid[0], T=T, a=args.a, b=args.b, rule=args.choi_rule), stream)
                w = sample_simplex(K_grid[0], stream.child(0, 1, 1), size=T)
                ds = Dataset(r=r, w=w)
            path = run.out / f"{design_name}_dataset_{i + 1:03d}.csv"
            write_dataset_csv(ds, path)
            run.files.append(str(path))
            run._write_manifest()
            print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def cmd_bounds(args) -> int:
    run = Run(args, "bounds", {
        "T": args.T, "a": args.a, "b": args.b, "eps": args.eps, "eta": args.eta,
        "K_grid": args.K_grid,
    })
    columns = ["K", "T", "C_T", "c1", "c2", "theorem1", "theorem2", "theorem1_raw", "theorem2_raw"]
    rows = []
    for K in args.K_grid:
        params = BoundParams(K=K, T=args.T, a=args.a, b=args.b, eps=args.eps, eta=args.eta)
        c1 = theorem1_rate(params) if args.eps else None
        c2 = theorem2_rate(params) if args.eta else None
        t1 = theorem1_area_bound(params) if args.eps else None
        t2 = theorem2_area_bound(params) if args.eta else None
        t1r = theorem1_area_bound(params, clamp=False) if args.eps else None
        t2r = theorem2_area_bound(params, clamp=False) if args.eta else None
        rows.append([K, args.T, enumerate_cycles(args.T), c1, c2, t1, t2, t1r, t2r])
    run.emit_table("bounds", columns, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--full", action="store_true", help="paper-scale draw caps (presets default to /10)")
    p.add_argument("--dry-run", action="store_true", help="write the manifest only")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rparea", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="GARP / Afriat-LP consistency of a dataset file")
    p.add_argument("dataset")
    p.add_argument("--method", choices=["garp", "lp", "both"], default="both")
    p.add_argument("--tol-edge", type=float, default=1e-9)
    p.add_argument("--tol-lp", type=float, default=1e-8)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("area", help="single-point area estimate")
    _add_common(p)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--T", type=int, default=5)
    p.add_argument("--prices", help="dataset file whose prices fix the budgets")
    p.add_argument("--mode", choices=["garp", "lp"], default="garp")
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--target-halfwidth", type=float, default=0.005)
    p.set_defaults(fn=cmd_area)

    p = sub.add_parser("curve", help="area against K")
    _add_common(p)
    p.add_argument("--preset", choices=sorted(CURVE_PRESETS))
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--K-grid", type=int, nargs="+")
    p.add_argument("--mode", choices=["garp", "lp"], default="garp")
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--target-halfwidth", type=float, default=0.005)
    p.set_defaults(fn=cmd_curve)

    p = sub.add_parser("separability", help="area under separability restrictions")
    _add_common(p)
    p.add_argument("--preset", choices=["fig4"])
    p.add_argument("--K", type=int, default=24)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--group-sizes", type=int, nargs="+")
    p.add_argument("--partitions", type=int, default=100)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--target-halfwidth", type=float, default=0.005)
    p.set_defaults(fn=cmd_separability)

    p = sub.add_parser("design", help="area of experimental designs")
    _add_common(p)
    p.add_argument("design", nargs="?", choices=["choi", "smp"], default="choi")
    p.add_argument("--preset", choices=sorted(DESIGN_PRESETS))
    p.add_argument("--K", type=int, default=20)
    p.add_argument("--T", type=int, default=25)
    p.add_argument("--K-grid", type=int, nargs="+")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=100.0)
    p.add_argument("--choi-rule", choices=["all", "any"], default="all")
    p.add_argument("--benchmark-sigmas", type=float, nargs="+")
    p.add_argument("--draws", type=int, default=50_000)
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--target-halfwidth", type=float, default=0.005)
    p.add_argument("--emit", type=int, default=0, help="also write N generated datasets as CSV")
    p.set_defaults(fn=cmd_design)

    p = sub.add_parser("bounds", help="closed-form bound table")
    _add_common(p)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--K-grid", type=int, nargs="+", required=True)
    p.set_defaults(fn=cmd_bounds)

    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors already use exit code 2
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
