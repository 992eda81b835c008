"""``sensewall`` command line.

    sensewall wall|sweep|roc|validate [--config PATH] [--out PATH] [--seed N] [--trials N]

CSV goes to ``--out`` (or ``output.path`` in the config); without either it
is written to stdout and the human-readable report moves to stderr.
Exit codes: 0 ok, 2 config error, 3 quadrature did not converge,
4 validation failed.
"""

import argparse
import io
import json
import math
import sys

from .config import bundled_names, load_config
from .errors import ConfigError, ConvergenceError, UnsupportedClosedFormError
from .fusion import network_qd, network_qf
from .montecarlo import roc_points
from .validation import run_validation
from .wall import (
    default_lambda_grid,
    feasible_lambda,
    grid_reliability,
    wall_equal_snr,
    wall_report,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_VALIDATION = 4

CSV_HEADER = ("lambda", "qf", "qd", "source", "std_error")
DEFAULT_CONFIG = "default"
SWEEP_POINTS = 2000
ROC_POINTS = 20
RELIABILITY_TARGETS = (1e-3, 0.999)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def _db(x):
    return 10.0 * math.log10(x) if x > 0 else float("-inf")


class _Writer:
    def __init__(self, path):
        self.path = path
        self.buf = io.StringIO(newline="")

    def row(self, *cells):
        self.buf.write(",".join(_fmt(c) for c in cells) + "\n")

    def close(self, stdout):
        text = self.buf.getvalue()
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        else:
            stdout.write(text)


def _grid(cfg, net, points):
    if cfg.sweep is not None:
        return cfg.sweep.grid()
    return list(default_lambda_grid(net, points))


def _interval_line(net):
    try:
        iv = feasible_lambda(net)
    except UnsupportedClosedFormError:
        return "asymptotic lambda interval: no closed form (soft combining, p != 2)"
    verdict = "feasible" if iv.feasible else "infeasible"
    return f"asymptotic lambda interval: [{iv.lo:.6f}, {iv.hi:.6f}] ({verdict})"


def cmd_wall(cfg, args, out, report):
    net = cfg.network()
    w = wall_report(net)
    lines = [f"rule: {net.rule}  M={net.M}"]
    if w.sum_wall is not None:
        lines.append(f"sum wall (sum of linear SNRs, p=2): {w.sum_wall:.4f} ({_db(w.sum_wall):.3f} dB)")
        total = sum(s.snr for s in net.sensors)
        lines.append(f"configured sum SNR: {total:.4f} -> {'meets' if w.satisfied_by([s.snr for s in net.sensors]) else 'below'} wall")
    else:
        for i, (s, g) in enumerate(zip(net.sensors, w.per_sensor_walls)):
            mark = ">=" if s.snr >= g else "< "
            lines.append(
                f"sensor {i + 1}: L={s.L_dB:g} dB  wall={g:.4f} ({_db(g):.3f} dB)  snr={s.snr:.4f} {mark} wall"
            )
        lines.append(f"required_count k={w.required_count}")
        eq = wall_equal_snr([s.bound for s in net.sensors], net.rule)
        lines.append(f"equal-SNR wall: {eq:.4f} ({_db(eq):.3f} dB)")
    lines.append(_interval_line(net))
    text = "\n".join(lines) + "\n"
    report.write(text)
    path = args.out or cfg.output.path
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return EXIT_OK


def cmd_sweep(cfg, args, out, report):
    net = cfg.network()
    grid = _grid(cfg, net, SWEEP_POINTS)
    writer = _Writer(args.out or cfg.output.path)
    writer.row(*CSV_HEADER)
    flagged = 0
    qf_vals, qd_vals = [], []
    for lam in grid:
        try:
            qf = network_qf(net, lam)
            qd = network_qd(net, lam)
            source = "analytic"
        except ConvergenceError:
            qf = qd = float("nan")
            source = "analytic_unconverged"
            flagged += 1
        qf_vals.append(qf)
        qd_vals.append(qd)
        writer.row(lam, qf, qd, source, None)
    writer.close(out)
    report.write(_interval_line(net) + "\n")
    qf_max, qd_min = RELIABILITY_TARGETS
    hits = grid_reliability(qf_vals, qd_vals, qf_max, qd_min)
    if hits.size:
        report.write(
            f"grid lambdas with qf<={qf_max:g} and qd>={qd_min:g}: {hits.size} "
            f"[{grid[hits[0]]:.6f}, {grid[hits[-1]]:.6f}]\n"
        )
    else:
        report.write(f"no grid lambda has qf<={qf_max:g} and qd>={qd_min:g}\n")
    if flagged:
        report.write(f"{flagged} row(s) did not converge\n")
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_roc(cfg, args, out, report):
    net = cfg.network()
    grid = _grid(cfg, net, ROC_POINTS)
    mc = roc_points(net, grid, cfg.sim)
    writer = _Writer(args.out or cfg.output.path)
    writer.row(*CSV_HEADER)
    flagged = 0
    worst = 0.0
    for lam, (ef, ed) in zip(grid, mc):
        try:
            qf = network_qf(net, lam)
            qd = network_qd(net, lam)
            writer.row(lam, qf, qd, "analytic", None)
            worst = max(worst, abs(qf - ef.value), abs(qd - ed.value))
        except ConvergenceError:
            flagged += 1
            writer.row(lam, float("nan"), float("nan"), "analytic_unconverged", None)
        writer.row(lam, ef.value, ed.value, "mc", max(ef.std_error, ed.std_error))
    writer.close(out)
    report.write(f"trials={cfg.sim.trials} seed={cfg.sim.seed}  max |analytic - mc| = {worst:.4g}\n")
    return EXIT_CONVERGENCE if flagged else EXIT_OK


def cmd_validate(cfg, args, out, report):
    results = run_validation(cfg, args.trials)
    failed = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        out.write(f"{status} {r.name} margin={r.margin:.4g} {r.detail}".rstrip() + "\n")
        if not r.passed:
            failed.append(r.name)
    out.write(json.dumps({"passed": not failed, "failed": failed}) + "\n")
    return EXIT_VALIDATION if failed else EXIT_OK


COMMANDS = {"wall": cmd_wall, "sweep": cmd_sweep, "roc": cmd_roc, "validate": cmd_validate}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sensewall",
        description="SNR walls and detection performance for cooperative generalized energy detection.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument(
        "--config", default=DEFAULT_CONFIG,
        help=f"JSON config path or bundled name ({', '.join(bundled_names())})",
    )
    parser.add_argument("--out", help="output path (CSV for sweep/roc, report for wall)")
    parser.add_argument("--seed", type=int, help="override sim.seed")
    parser.add_argument("--trials", type=int, help="override sim.trials")
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer", "--seed")
            cfg = cfg.with_sim(seed=args.seed)
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("trials must be >= 1", "--trials")
            cfg = cfg.with_sim(trials=args.trials)
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    csv_to_stdout = not (args.out or cfg.output.path)
    report = stderr if csv_to_stdout and args.command in ("sweep", "roc") else stdout
    try:
        return COMMANDS[args.command](cfg, args, stdout, report)
    except ConvergenceError as exc:
        stderr.write(f"numeric error: {exc} (partial estimate {exc.estimate:.6g})\n")
        return EXIT_CONVERGENCE


def main_exit():
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
