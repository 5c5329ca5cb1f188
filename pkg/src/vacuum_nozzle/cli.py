"""Command-line experiment runner.

    python -m vacuum_nozzle {background,march,verify,ineq} [--config FILE]
        [--out DIR] [--seed N] [--refine L] [--plot-data]

Exit codes: 0 pass, 2 check failure, 3 aborted march, 64 usage or
configuration error, 74 I/O error.  Outputs go under ``<out>/<subcommand>/``
and are byte-identical for identical configuration and seed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import experiments as ex
from .background import background_csv_rows
from .config import ConfigError, ExperimentConfig, load_config
from .diagnostics import DECAY_HEADER, flux_drift
from .errors import AbortedAt
from .march import snapshot_rows

log = logging.getLogger("vacuum_nozzle")

EXIT_OK, EXIT_CHECK, EXIT_ABORT, EXIT_USAGE, EXIT_IO = 0, 2, 3, 64, 74


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="vacuum-nozzle", description="Supersonic conical-nozzle potential flow experiments.")
    ap.add_argument("command", choices=("background", "march", "verify", "ineq"))
    ap.add_argument("--config", help="INI configuration file")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--seed", type=int, help="seed for randomized test-function families")
    ap.add_argument("--refine", type=int, default=0, help="grid refinement level (-2..2); negative is coarser")
    ap.add_argument("--plot-data", action="store_true", help="also write two-column .dat files per figure")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


class _Writer:
    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def lines(self, name: str, lines) -> None:
        with open(os.path.join(self.root, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def series(self, name: str, x, y) -> None:
        self.lines(f"plot_{name}.dat", [f"{a:.16e} {b:.16e}" for a, b in zip(np.asarray(x), np.asarray(y))])

    def meta(self, name: str, items) -> None:
        self.lines(name, [f"{k} = {v}" for k, v in items])


def _report(checks) -> bool:
    ok = True
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        extra = f" ({c.detail})" if c.detail else ""
        print(f"{status} {c.name}: measured {c.measured:.6g}, threshold {c.threshold:.6g}{extra}")
        ok &= c.passed
    return ok


def _meta_items(cfg: ExperimentConfig, command: str, level: int, seed: int):
    # out_dir is where the run is written, not what it computes
    return [("command", command), ("refine", level), ("seed", seed)] + [kv for kv in cfg.as_items() if kv[0] != "out_dir"]


def run_background(cfg: ExperimentConfig, w: _Writer, plot: bool) -> int:
    states, checks, fits, series = ex.background_experiment(cfg)
    w.lines("background.csv", background_csv_rows(states))
    w.lines("decay_fits.csv", [DECAY_HEADER] + [f.csv_row() for f in fits])
    w.lines("checks.csv", [ex.CHECK_HEADER] + [c.row() for c in checks])
    if plot:
        for name, (x, y) in series.items():
            w.series(name, x, y)
    return EXIT_OK if _report(checks) else EXIT_CHECK


def run_march(cfg: ExperimentConfig, w: _Writer, plot: bool) -> int:
    p = cfg.gas_params()
    status = EXIT_OK
    checks = []
    for i, eps in enumerate(cfg.eps_list):
        tag = f"eps{i}"
        try:
            tr = ex.march_config(cfg, eps, cfg.r_max)
        except AbortedAt as exc:
            w.lines(f"abort_{tag}.txt", [f"eps = {eps!r}", f"r = {exc.r!r}", f"guard = {exc.guard}", f"detail = {exc.detail}"])
            print(f"ABORT eps={eps:g}: r={exc.r:.6g}, guard {exc.guard}")
            status = EXIT_ABORT
            continue
        hyp, cav = tr.guard_minima()
        drift = flux_drift(tr)
        w.lines(f"trace_{tag}.csv", snapshot_rows(tr))
        w.meta(
            f"trace_{tag}.meta.txt",
            [
                ("eps", repr(eps)),
                ("gamma", repr(p.gamma)),
                ("q0", repr(p.q0)),
                ("rho0", repr(p.rho0)),
                ("phi0", repr(p.phi0)),
                ("n_phi", cfg.n_phi),
                ("r_max", repr(cfg.r_max)),
                ("steps", tr.steps_taken),
                ("stored_slices", len(tr.slices)),
                ("min_hyperbolicity", repr(hyp)),
                ("min_cavitation", repr(cav)),
                ("flux_drift", repr(drift)),
            ],
        )
        checks.append(ex.check_ge(f"guard_hyperbolicity_{tag}", hyp, 1e-8))
        checks.append(ex.check_ge(f"guard_cavitation_{tag}", cav, 1e-10))
        if plot:
            r = np.array([g.r for g in tr.guard_log])
            w.series(f"guard_hyperbolicity_{tag}", r, [g.hyperbolicity for g in tr.guard_log])
            w.series(f"guard_cavitation_{tag}", r, [g.cavitation for g in tr.guard_log])
    w.lines("checks.csv", [ex.CHECK_HEADER] + [c.row() for c in checks])
    ok = _report(checks)
    if status == EXIT_OK and not ok:
        status = EXIT_CHECK
    return status


def run_verify(cfg: ExperimentConfig, w: _Writer, plot: bool, level: int, seed: int) -> int:
    checks = []
    _, bg_checks, fits, series = ex.background_experiment(cfg)
    checks += bg_checks
    checks += ex.certificate_checks(cfg)
    ns, errs, orders = ex.unperturbed_convergence(cfg, level)
    checks.append(ex.check_ge("unperturbed_order", min(orders), 2.0, f"n_phi {ns}, errors {', '.join(f'{e:.3e}' for e in errs)}"))
    try:
        _, pc = ex.perturbed_checks(cfg, level)
        checks += pc
        dfits, dchecks, dseries = ex.decay_checks(cfg, level)
        checks += dchecks
        fits += dfits
        series.update(dseries)
        reports, echecks = ex.energy_experiment(cfg, level)
        checks += echecks
    except AbortedAt as exc:
        print(f"ABORT during verification: r={exc.r:.6g}, guard {exc.guard}")
        return EXIT_ABORT
    lines = []
    for (lv, eps, k), rep in sorted(reports.items()):
        if lv == level:
            lines += rep.csv_rows(header=not lines)
    w.lines("energy.csv", lines)
    checks += ex.z_field_checks(cfg, seed)
    checks += ex.extension_checks(cfg)
    checks += ex.cnk_checks(cfg)
    rows, ichecks = ex.inequality_experiment(cfg, seed)
    checks += ichecks
    w.lines("inequality.csv", _ineq_lines(rows))
    w.lines("decay_fits.csv", [DECAY_HEADER] + [f.csv_row() for f in fits])
    w.lines("checks.csv", [ex.CHECK_HEADER] + [c.row() for c in checks])
    if plot:
        for name, (x, y) in series.items():
            w.series(name, x, y)
    return EXIT_OK if _report(checks) else EXIT_CHECK


def _ineq_lines(rows):
    return ["ineq_id,family_member,grid_level,ratio"] + [f"{i},{m},{lv},{r:.16e}" for i, m, lv, r in rows]


def run_ineq(cfg: ExperimentConfig, w: _Writer, plot: bool, seed: int) -> int:
    rows, checks = ex.inequality_experiment(cfg, seed)
    w.lines("inequality.csv", _ineq_lines(rows))
    w.lines("checks.csv", [ex.CHECK_HEADER] + [c.row() for c in checks])
    if plot:
        for wid in sorted({r[0] for r in rows}):
            sel = [r for r in rows if r[0] == wid and r[2] == max(cfg.ineq_levels)]
            w.series(f"ineq_{wid.replace('/', '_').replace('[', '_').replace(']', '')}", [r[1] for r in sel], [r[3] for r in sel])
    return EXIT_OK if _report(checks) else EXIT_CHECK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if not -2 <= args.refine <= 2:
        print("error: --refine must lie in -2..2", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        base = load_config(args.config, out_dir=args.out, seed=args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = args.refine
    # verify refines internally so the tolerance table applies; the others run on the refined grid
    cfg = base if args.command == "verify" else base.refined(level)
    log.info("seed %d", cfg.seed)
    try:
        w = _Writer(os.path.join(cfg.out_dir, args.command))
        w.meta("run.meta.txt", _meta_items(base, args.command, level, cfg.seed))
        if args.command == "background":
            return run_background(cfg, w, args.plot_data)
        if args.command == "march":
            return run_march(cfg, w, args.plot_data)
        if args.command == "verify":
            return run_verify(cfg, w, args.plot_data, level, cfg.seed)
        return run_ineq(cfg, w, args.plot_data, cfg.seed)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
