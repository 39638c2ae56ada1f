"""Command-line entry point: ``exterior-burgers <command> --config run.json``.

Exit codes: 0 when every check passes, 2 when checks ran and at least one
failed, 1 when the command could not run.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import pipeline, suite
from .config import RunConfig
from .errors import BurgersError, ConfigError
from .evolution import contamination_time, evolve, make_initial_data
from .io import Manifest, write_csv, write_json
from .problem import ProblemParams, classify_regime
from .stationary import solve_stationary
from .diagnostics import fit_exponential_rate

log = logging.getLogger("exterior_burgers")

EXIT_OK, EXIT_ERROR, EXIT_CHECKS = 0, 1, 2
COMMANDS = ("stationary", "weight", "evolve", "verify", "sweep")


def _finish(m: Manifest) -> int:
    m.write("passed" if m.passed else "checks_failed")
    return EXIT_OK if m.passed else EXIT_CHECKS


def _abort(m: Manifest, exc: Exception) -> int:
    m.error = f"{type(exc).__name__}: {exc}"
    m.write("error")
    print(f"error: {m.error}", file=sys.stderr)
    return EXIT_ERROR


def cmd_stationary(cfg: RunConfig, out: Path) -> int:
    m = Manifest(out, cfg, "stationary")
    try:
        pipeline.stationary_stage(cfg, m, out)
    except BurgersError as exc:
        return _abort(m, exc)
    return _finish(m)


def cmd_weight(cfg: RunConfig, out: Path) -> int:
    m = Manifest(out, cfg, "weight")
    try:
        sw = pipeline.stationary_stage(cfg, m, out)
        if sw is not None:
            pipeline.weight_stage(cfg, sw, m, out)
    except BurgersError as exc:
        return _abort(m, exc)
    return _finish(m)


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    m = Manifest(out, cfg, "evolve")
    try:
        sw = pipeline.stationary_stage(cfg, m, out)
        if sw is not None:
            pipeline.weight_stage(cfg, sw, m, out)
            pipeline.evolve_stage(cfg, m, out)
    except BurgersError as exc:
        return _abort(m, exc)
    return _finish(m)


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    m = Manifest(out, cfg, "verify")
    try:
        s = suite.run_suite(cfg)
    except BurgersError as exc:
        return _abort(m, exc)
    rows = [[c.name, c.passed, c.value, c.threshold] for c in s.checks]
    m.add(write_csv(out / "verify_checks.csv", ["check", "passed", "value", "threshold"],
                    list(zip(*rows))))
    for name, (header, table) in sorted(s.tables.items()):
        m.add(write_csv(out / f"{name}.csv", header, list(zip(*table))))
    m.add(write_json(out / "verify.json", suite.summary(s)))
    for c in s.checks:
        m.check(c.name, c.passed, value=c.value, threshold=c.threshold)
        log.info("%s %s value=%.6g threshold=%.6g", "PASS" if c.passed else "FAIL",
                 c.name, c.value, c.threshold)
    return _finish(m)


SWEEP_HEADER = ["cell", "n", "mu", "r0", "v_minus", "v_plus", "V_minus", "regime", "subcase",
                "simulated", "sup_diff_0", "sup_diff_T", "decay_ratio", "gamma_fit",
                "decaying", "note"]


def sweep_cell(args) -> list:
    """Classify one cell and, when admissible, measure bump decay. Runs in a worker."""
    index, cell, cfg_dict, out = args
    cfg = config_mod.from_dict(cfg_dict)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        params = ProblemParams.from_dict(cell)
    except BurgersError as exc:
        return [index, *cell.values(), "", "invalid", "", False, "", "", "", "", "", str(exc)]
    regime = classify_regime(params)
    row = [index, params.n, params.mu, params.r0, params.v_minus, params.v_plus,
           params.V_minus, regime.tag.value, regime.subcase or ""]
    if not regime.admissible:
        write_json(out / "cell.json", {"params": params.to_dict(), "regime": regime.tag.value,
                                       "simulated": False})
        return row + [False, "", "", "", "", "", "outside the solved regime; not simulated"]
    cell_cfg = dataclasses.replace(cfg, params=params, seed=cfg.seed + index)
    try:
        grid = cell_cfg.evolution_grid.build(params)
        sw = solve_stationary(params, grid, cell_cfg.stationary_tol)
        spec = pipeline.initial_spec(cell_cfg)
        v0 = make_initial_data(sw, spec)
        scheme = dataclasses.replace(cell_cfg.scheme,
                                     snapshot_times=pipeline.snapshot_times(cell_cfg))
        tr = evolve(params, sw, v0, cell_cfg.T_end, scheme)
    except BurgersError as exc:
        return row + [False, "", "", "", "", "", f"{type(exc).__name__}: {exc}"]
    t, s = tr.series()
    Tc = contamination_time(params, grid, spec)
    window = pipeline.fit_window(cell_cfg, Tc)
    gamma, note = "", ""
    try:
        gamma = fit_exponential_rate(t, s, window).exponent
    except BurgersError as exc:
        note = str(exc)
    write_csv(out / "sup_diff.csv", ["t", "value", "log_value"],
              [t, s, np.log(np.where(s > 0, s, np.nan))])
    write_json(out / "cell.json", {"params": params.to_dict(), "regime": regime.tag.value,
                                   "simulated": True, "window": list(window),
                                   "gamma_fit": gamma, "sup_diff_0": s[0], "sup_diff_T": s[-1]})
    ratio = s[-1] / s[0] if s[0] > 0 else 0.0
    return row + [True, s[0], s[-1], ratio, gamma, bool(s[-1] < s[0]), note]


def cmd_sweep(cfg: RunConfig, out: Path, workers: int | None = None) -> int:
    m = Manifest(out, cfg, "sweep")
    if cfg.sweep is None:
        return _abort(m, ConfigError("sweep needs a 'sweep' section"))
    cells = cfg.sweep.cells()
    jobs = [(i, cell, cfg.to_dict(), str(out / f"cell_{i:03d}")) for i, cell in enumerate(cells)]
    workers = workers or cfg.workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_cell, jobs))
    else:
        rows = [sweep_cell(job) for job in jobs]
    for i in range(len(cells)):
        for name in ("cell.json", "sup_diff.csv"):
            path = out / f"cell_{i:03d}" / name
            if path.exists():
                m.add(path)
    m.add(write_csv(out / "summary.csv", SWEEP_HEADER, list(zip(*rows))))
    for row in rows:
        if row[9] is True:
            m.check(f"cell_{row[0]:03d}_decaying", bool(row[14]), ratio=row[12])
    return _finish(m)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="exterior-burgers",
        description="Stationary waves, weights and decay measurements for the exterior "
                    "radial viscous Burgers problem.")
    sub = p.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} pipeline")
        sp.add_argument("--config", type=Path, help="JSON run configuration")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--workers", type=int, default=None, help="sweep worker processes")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None or args.config is None:
        parser.print_usage(sys.stderr)
        print("error: a command and --config are required", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_mod.load(args.config)
    except ConfigError as exc:
        if "is empty" in str(exc):
            parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "sweep":
        return cmd_sweep(cfg, out, args.workers)
    return {"stationary": cmd_stationary, "weight": cmd_weight, "evolve": cmd_evolve,
            "verify": cmd_verify}[args.command](cfg, out)


if __name__ == "__main__":
    sys.exit(main())
