"""Command-line front end.

Subcommands: dist | volume | converge | hausdorff | bounds | sweep.
Reports are machine-readable (JSON by default, CSV for row tables) and
deterministic for a fixed (config, seed).  Exit codes: 0 success, 2 config or
input error, 3 solver error, 4 invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import SCHEMA, ExperimentConfig, load_config
from .convergence import (
    completion_identity_check,
    continuity_modulus_check,
    pointwise_convergence_scan,
    uniform_gap,
)
from .errors import ConfigError, WarpGeoError
from .geometry import ConstantWarp, ExtremeWarp, Point, SequenceWarp
from .grid import GridGraph, GridSpec
from .measures import (
    hausdorff_dim_scan,
    limit_volume,
    volume,
    volume_convergence,
    volume_upper_bound,
)
from .bounds import diameter_bound
from .sampling import sample_pairs
from .solver import (
    calibrate_grid_error,
    distance_bracket,
    restriction_gap_estimate,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4


def _emit(report: dict, cfg: ExperimentConfig, rows: Optional[list] = None):
    """Write the report as JSON (or rows as CSV) to cfg.out or stdout."""
    if cfg.format == "csv" and rows is not None:
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _report_skeleton(command: str, cfg: ExperimentConfig) -> dict:
    # the output path is presentation, not an experiment parameter: keep the
    # echoed config byte-identical across output destinations
    echoed = {k: v for k, v in cfg.to_dict().items() if k != "out"}
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config": echoed,
    }


def _parse_point(text: str) -> Point:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected r,theta,phi, got {text!r}")
    return Point(*parts)


def _parse_pair(text: str) -> tuple[Point, Point]:
    try:
        left, right = text.split(":")
        return _parse_point(left), _parse_point(right)
    except ValueError as exc:
        raise ConfigError(f"bad pair {text!r}: {exc}") from exc


def _load_pairs_file(path: str) -> list[tuple[Point, Point]]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"pair file not found: {path}")
    pairs = []
    if p.suffix.lower() == ".json":
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, list):
            raise ConfigError(f"{path}: top level must be a list of pairs")
        for i, entry in enumerate(data):
            try:
                (a, b) = entry
                pairs.append((Point(*map(float, a)), Point(*map(float, b))))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}: entry {i}: {exc}") from exc
    else:
        for lineno, line in enumerate(p.read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                left, right = line.split()
                pairs.append((_parse_point(left), _parse_point(right)))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    if not pairs:
        raise ConfigError(f"{path}: no pairs found")
    return pairs


def _grid_spec(cfg: ExperimentConfig, tube: Optional[float] = None) -> GridSpec:
    return GridSpec(cfg.n_r, cfg.n_theta, cfg.n_phi, tube)


def _bracket_dict(b) -> dict:
    return {
        "pair": [list(b.pair[0]), list(b.pair[1])],
        "lower": b.lower,
        "upper": b.upper,
        "lower_provenance": b.lower_provenance,
        "upper_provenance": b.upper_provenance,
    }


# -- subcommands ---------------------------------------------------------------


def cmd_dist(cfg: ExperimentConfig, args) -> int:
    if getattr(args, "manifest", None):
        from .solver import run_batch_manifest

        path = Path(args.manifest)
        if not path.exists():
            raise ConfigError(f"manifest not found: {args.manifest}")
        try:
            manifest = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.manifest}:{exc.lineno}: {exc.msg}") from exc
        report = _report_skeleton("dist", cfg)
        batch = run_batch_manifest(manifest)
        report["results"] = batch
        ok = all(r["lower"] <= r["upper"] + 1e-9 for r in batch["results"])
        report["verdict"] = "ok" if ok else "fail"
        rows = [
            {"pair_id": k, "j": "", "lower": r["lower"], "upper": r["upper"],
             "bound": "", "verdict": report["verdict"]}
            for k, r in enumerate(batch["results"])
        ]
        _emit(report, cfg, rows)
        return EXIT_OK if ok else EXIT_INVARIANT

    pairs: list[tuple[Point, Point]] = []
    for text in args.pair or ():
        pairs.append(_parse_pair(text))
    if args.pairs_file:
        pairs.extend(_load_pairs_file(args.pairs_file))
    if not pairs:
        raise ConfigError("no pairs given (use --pair, --pairs-file or --manifest)")

    if not 0 <= args.j <= cfg.jmax:
        raise ConfigError(f"--j must lie in [0, {cfg.jmax}]")
    warp = SequenceWarp(a=cfg.a_schedule[args.j], beta=cfg.beta)
    graph = None
    if not args.analytic_only:
        graph = GridGraph(_grid_spec(cfg))
        graph.set_warp(warp)
    report = _report_skeleton("dist", cfg)
    rows = []
    ok = True
    brackets = []
    for k, (p, q) in enumerate(pairs):
        b = distance_bracket(warp, p, q, graph, refine_iters=cfg.refine_iters)
        brackets.append(_bracket_dict(b))
        ok = ok and b.lower <= b.upper
        rows.append(
            {
                "pair_id": k,
                "j": args.j,
                "lower": b.lower,
                "upper": b.upper,
                "bound": diameter_bound(cfg.beta),
                "verdict": "ok" if b.lower <= b.upper else "fail",
            }
        )
    report["results"] = {"brackets": brackets, "warp_a": warp.a, "beta": cfg.beta}
    report["verdict"] = "ok" if ok else "fail"
    _emit(report, cfg, rows)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_volume(cfg: ExperimentConfig, args) -> int:
    lim = volume(ExtremeWarp(beta=cfg.beta))
    target = limit_volume(cfg.beta)
    conv = volume_convergence(cfg.a_schedule, cfg.beta)
    calib = volume(ConstantWarp(1.0))
    ok = (
        abs(lim.value - target) <= cfg.tol_volume_abs
        and abs(calib.value - 8.0 * math.pi**2) <= cfg.tol_volume_abs
        and conv.strictly_increasing
        and conv.within_bound
        and conv.final_rel_gap <= cfg.tol_volume_rel
    )
    report = _report_skeleton("volume", cfg)
    report["results"] = {
        "limit_volume": lim.value,
        "limit_closed_form": target,
        "limit_abs_error": abs(lim.value - target),
        "calibration_volume": calib.value,
        "volume_bound": volume_upper_bound(cfg.beta),
        "sequence": [
            {"a": a, "volume": v} for a, v in zip(conv.a_schedule, conv.values)
        ],
        "strictly_increasing": conv.strictly_increasing,
        "within_bound": conv.within_bound,
        "final_rel_gap": conv.final_rel_gap,
    }
    report["verdict"] = "ok" if ok else "fail"
    rows = [
        {"j": j, "a": a, "volume": v, "bound": volume_upper_bound(cfg.beta),
         "verdict": report["verdict"]}
        for j, (a, v) in enumerate(zip(conv.a_schedule, conv.values))
    ]
    _emit(report, cfg, rows)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_converge(cfg: ExperimentConfig, args) -> int:
    graph = GridGraph(_grid_spec(cfg))
    sample = sample_pairs(
        cfg.n_pairs, cfg.seed, mode="stratified", n_sources=cfg.n_sources
    ).snapped(graph)
    scan = pointwise_convergence_scan(cfg.a_schedule, sample, graph, cfg.beta)
    gaps = uniform_gap(scan, cfg.tol_uniform)
    moduli = continuity_modulus_check(
        cfg.eps_list,
        [p for p, _ in sample.pairs[: cfg.n_base_points]],
        cfg.beta,
        n_probe=16,
        seed=cfg.seed,
    )
    ok = (
        scan.envelope_violations == 0
        and scan.diameter_ok
        and gaps.final_gap < cfg.tol_uniform
        and gaps.last_prelimit_gap < cfg.tol_uniform
        and moduli.all_ok
    )
    report = _report_skeleton("converge", cfg)
    report["results"] = {
        "envelope_violations": scan.envelope_violations,
        "diameter_ok": scan.diameter_ok,
        "cauchy_tail": scan.cauchy_tail,
        "gaps": list(gaps.rows()),
        "final_gap": gaps.final_gap,
        "last_prelimit_gap": gaps.last_prelimit_gap,
        "moduli_ok": moduli.all_ok,
    }
    if not ok:
        report["witnesses"] = {
            "modulus_failures": [r for r in moduli.rows() if r["verdict"] != "ok"],
        }
    report["verdict"] = "ok" if ok else "fail"
    rows = [
        {"pair_id": "", "j": r["j"], "lower": "", "upper": "",
         "bound": r["gap"], "verdict": report["verdict"]}
        for r in gaps.rows()
    ]
    _emit(report, cfg, rows)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_hausdorff(cfg: ExperimentConfig, args) -> int:
    verdict = hausdorff_dim_scan(
        cfg.p_grid, cfg.N_schedule, cfg.beta, cfg.a_schedule, cfg.N_partition
    )
    ok = verdict.consistent
    report = _report_skeleton("hausdorff", cfg)
    report["results"] = {
        "dimension": verdict.dimension,
        "h1_infinite": verdict.h1_infinite,
        "scans": [
            {
                "p": s.p,
                "m": s.m,
                "slope": s.slope,
                "exponent": s.exponent,
                "vanishing": s.vanishing,
                "entries": [
                    {"N": e.N, "r_N": e.r_N, "H_upper": e.H_upper,
                     "applicable": e.applicable}
                    for e in s.entries
                ],
            }
            for s in verdict.scans
        ],
        "partition": list(verdict.partition.rows()),
    }
    report["verdict"] = "dim=1,H1=inf" if ok else "fail"
    rows = [
        {"p": s.p, "m": s.m, "N": e.N, "value": e.H_upper, "error": "",
         "bound": e.r_N, "verdict": "ok" if s.vanishing else "fail"}
        for s in verdict.scans
        for e in s.entries
    ]
    _emit(report, cfg, rows)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_bounds(cfg: ExperimentConfig, args) -> int:
    spec = _grid_spec(cfg)
    full_graph = GridGraph(spec)
    calib_sample = sample_pairs(
        min(cfg.n_pairs, 128), cfg.seed + 1, mode="stratified",
        n_sources=min(cfg.n_sources, 12),
    ).snapped(full_graph)
    eps_grid = calibrate_grid_error(
        full_graph, calib_sample.pairs, refine_iters=cfg.refine_iters
    )
    warp = SequenceWarp(a=cfg.a_schedule[-1], beta=cfg.beta)
    entries = []
    ok = True
    diam = diameter_bound(cfg.beta)
    for R in cfg.R_schedule:
        restricted = GridGraph(_grid_spec(cfg, R))
        sample = sample_pairs(
            min(cfg.n_pairs, 128), cfg.seed + 2, mode="stratified",
            n_sources=min(cfg.n_sources, 12), rho_min=restricted.effective_tube_radius,
        ).snapped(restricted)
        rep = restriction_gap_estimate(
            warp, R, spec, sample.pairs,
            full_graph=full_graph, restricted_graph=restricted,
            refine_iters=cfg.refine_iters,
        )
        entry_ok = rep.estimate <= rep.bound + 2.0 * eps_grid
        diam_ok = all(u <= diam + eps_grid for u, _, _ in rep.per_pair)
        ok = ok and entry_ok and diam_ok
        entries.append(
            {
                "R": rep.R,
                "R_eff": rep.R_eff,
                "estimate": rep.estimate,
                "bound": rep.bound,
                "allowance": 2.0 * eps_grid,
                "ok": entry_ok and diam_ok,
            }
        )
    report = _report_skeleton("bounds", cfg)
    report["results"] = {
        "eps_grid": eps_grid,
        "diameter_bound": diam,
        "sweep": entries,
    }
    report["verdict"] = "ok" if ok else "fail"
    rows = [
        {"pair_id": "", "R": e["R"], "lower": e["estimate"], "upper": e["estimate"],
         "bound": e["bound"], "verdict": "ok" if e["ok"] else "fail"}
        for e in entries
    ]
    _emit(report, cfg, rows)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    pairs: list[tuple[Point, Point]] = []
    for text in args.pair or ():
        pairs.append(_parse_pair(text))
    if args.pairs_file:
        pairs.extend(_load_pairs_file(args.pairs_file))
    if not pairs:
        raise ConfigError("no pairs given (use --pair or --pairs-file)")
    from .solver import batch_lowers, batch_pair_uppers

    graph = None
    if not args.analytic_only:
        graph = GridGraph(_grid_spec(cfg))
    lowers = batch_lowers(pairs)
    rows = []
    table = []
    ok = True
    prev_uppers = None
    for j, a in enumerate(cfg.a_schedule):
        warp = SequenceWarp(a=a, beta=cfg.beta)
        if graph is not None:
            uppers = batch_pair_uppers(
                graph, warp, pairs, refine_iters=cfg.refine_iters
            ).uppers
        else:
            uppers = [
                distance_bracket(warp, p, q, None).upper for p, q in pairs
            ]
        for k, (p, q) in enumerate(pairs):
            rows.append(
                {"pair_id": k, "j": j, "lower": float(lowers[k]),
                 "upper": float(uppers[k]),
                 "bound": diameter_bound(cfg.beta), "verdict": "ok"}
            )
            table.append({"pair_id": k, "j": j, "a": a,
                          "lower": float(lowers[k]), "upper": float(uppers[k])})
        if prev_uppers is not None:
            ok = ok and all(u + 1e-9 >= v for u, v in zip(uppers, prev_uppers))
        prev_uppers = uppers
    report = _report_skeleton("sweep", cfg)
    report["results"] = {"table": table, "monotone": ok}
    report["verdict"] = "ok" if ok else "fail"
    _emit(report, cfg, rows)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_completion(cfg: ExperimentConfig, args) -> int:
    spec = _grid_spec(cfg)
    full_graph = GridGraph(spec)
    rho_min = max(cfg.R_schedule) + 0.05
    sample = sample_pairs(
        min(cfg.n_pairs, 128), cfg.seed + 3, mode="uniform",
        n_sources=min(cfg.n_sources, 12), rho_min=rho_min,
    ).snapped(full_graph)
    rep = completion_identity_check(
        cfg.R_schedule, sample, spec, cfg.beta, cfg.a_schedule[-1],
        full_graph=full_graph, refine_iters=cfg.refine_iters,
    )
    ok = rep.decreasing and all(
        e.discrepancy <= e.bound + e.allowance + 1e-9 for e in rep.entries
    )
    report = _report_skeleton("completion", cfg)
    report["results"] = {"entries": list(rep.rows()), "decreasing": rep.decreasing}
    report["verdict"] = "ok" if ok else "fail"
    rows = [
        {"pair_id": "", "R": r["R"], "lower": "", "upper": r["discrepancy"],
         "bound": r["bound"], "verdict": report["verdict"]}
        for r in rep.rows()
    ]
    _emit(report, cfg, rows)
    return EXIT_OK if ok else EXIT_INVARIANT


# -- driver ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warpgeo",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="TOML or JSON config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="write the report to this path")
    parser.add_argument("--format", choices=("json", "csv"), help="output format")
    parser.add_argument("--grid", help="resolution as NxNxN, e.g. 48x48x48")
    parser.add_argument("--beta", type=float, help="warp offset β ≥ 2")
    parser.add_argument("--a0", type=float, help="leading schedule value a_0")
    parser.add_argument("--jmax", type=int, help="last schedule index")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, needs_pairs in (
        ("dist", True), ("volume", False), ("converge", False),
        ("hausdorff", False), ("bounds", False), ("sweep", True),
        ("completion", False),
    ):
        cmd = sub.add_parser(name)
        if needs_pairs:
            cmd.add_argument("--pair", action="append",
                             help="pair as r,theta,phi:r,theta,phi (repeatable)")
            cmd.add_argument("--pairs-file", help="JSON or text pair file")
            cmd.add_argument("--manifest",
                             help="JSON batch manifest {warp, pairs, spec}")
            cmd.add_argument("--analytic-only", action="store_true",
                             help="skip the grid solver (closed-form bounds only)")
            cmd.add_argument("--j", type=int, default=0,
                             help="schedule index for the warp (dist only)")
    return parser


_HANDLERS = {
    "dist": cmd_dist,
    "volume": cmd_volume,
    "converge": cmd_converge,
    "hausdorff": cmd_hausdorff,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "completion": cmd_completion,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
        "beta": args.beta,
        "a0": args.a0,
        "jmax": args.jmax,
    }
    if args.grid:
        try:
            n_r, n_theta, n_phi = (int(x) for x in args.grid.lower().split("x"))
        except ValueError:
            print(f"error: bad --grid {args.grid!r}", file=sys.stderr)
            return EXIT_CONFIG
        overrides.update({"n_r": n_r, "n_theta": n_theta, "n_phi": n_phi})
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WarpGeoError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
