"""Command-line front end.

Six subcommands map onto the library layers:

  reduce         Dirac reduction report for the configured trap
  spectrum       radial eigensolves over the configured sectors
  residual-scan  slow-branch ground-state residual along an omega_c sweep
  gauge-check    pure-gauge, circulation and J_z invariance diagnostics
  secular        RF benchmark trajectory plus extracted secular frequency
  verify-all     every acceptance criterion; nonzero exit unless all pass

Artifacts are byte-deterministic: rerunning a command with the same config
produces identical bytes, and every record carries the config hash so mixed
output directories stay attributable.  Without --out the primary document
goes to stdout; the secular trajectory CSV is only written under --out.

Exit codes: 0 success, 1 failed acceptance criteria (verify-all only),
2 configuration or usage error, 3 numerical failure, 4 reduction impossible.
"""

import argparse
import math
import os
import sys

from . import __version__
from .acceptance import verify_all
from .config import DEFAULT_CONFIG_TEXT, parse_config
from .core import TrapConfig
from .errors import AbtrapError, ConfigError, ReductionImpossible
from .gauge import gauge_block
from .reduction import perp_hamiltonian, reduce, reduction_report, \
    trap_constraints
from .reporting import attach_hash, config_hash, dump_lines, dumps, \
    records_csv, trajectory_csv
from .secular import ClassicalState, extract_secular_frequency, \
    integrate_trajectory
from .spectral import residual_scan, sector_records, solve_sectors

EXIT_OK = 0
EXIT_CRITERIA = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_REDUCTION = 4

_SPECTRUM_COLUMNS = ("m", "n", "E", "rho2", "Ek", "residual", "bound",
                     "model", "config_hash")
_SCAN_COLUMNS = ("ratio", "m", "E", "rho2", "Ek", "residual", "bound", "ok",
                 "config_hash")

_DEFAULT_SECTORS = (-2, -1, 0, 1, 2)
_DEFAULT_RATIOS = (10, 20, 50, 100)
_SECULAR_PERIODS = 24.0
_CSV_ROW_CAP = 4096


def _load_config(path):
    if path is None:
        return parse_config(DEFAULT_CONFIG_TEXT)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(
            f"cannot read config file {path!r}: {exc.strerror or exc}"
        ) from exc
    return parse_config(raw)


def _resolve_threads(value):
    if value is None:
        env = os.environ.get("ABTRAP_THREADS", "").strip()
        if not env:
            return None
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(
                f"ABTRAP_THREADS must be an integer, got {env!r}") from None
    if value < 1:
        raise ConfigError("thread count must be at least 1")
    return value


def _write_text(out_dir, name, text):
    path = os.path.join(out_dir, name)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit(args, name, text):
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write_text(args.out, name, text)


def _cmd_reduce(rc, digest, args, threads):
    model = reduce(perp_hamiltonian(), trap_constraints(), config=rc.trap)
    doc = dict(reduction_report(model), config_hash=digest)
    _emit(args, "reduction.json", dumps(doc))
    return EXIT_OK


def _cmd_spectrum(rc, digest, args, threads):
    sectors = rc.sweep.sectors or _DEFAULT_SECTORS
    results = solve_sectors(rc.trap, sectors, k=rc.solver.k, threads=threads,
                            model=rc.solver.model, R=rc.solver.R,
                            N=rc.solver.N)
    records = attach_hash(sector_records(rc.trap, results), digest)
    if args.format == "csv":
        _emit(args, "spectrum.csv", records_csv(records, _SPECTRUM_COLUMNS))
    else:
        _emit(args, "spectrum.jsonl", dump_lines(records))
    return EXIT_OK


def _cmd_residual_scan(rc, digest, args, threads):
    ratios = rc.sweep.ratios or _DEFAULT_RATIOS
    scan = residual_scan(rc.trap, ratios, sector=0, N=rc.solver.N,
                         R=rc.solver.R)
    scan["records"] = attach_hash(scan["records"], digest)
    if args.format == "csv":
        _emit(args, "residual_scan.csv",
              records_csv(scan["records"], _SCAN_COLUMNS))
    else:
        _emit(args, "residual_scan.json", dumps(dict(scan,
                                                     config_hash=digest)))
    return EXIT_OK


def _cmd_gauge_check(rc, digest, args, threads):
    doc = dict(gauge_block(rc.trap, k=rc.solver.k), config_hash=digest)
    _emit(args, "gauge.json", dumps(doc))
    return EXIT_OK


def _cmd_secular(rc, digest, args, threads):
    """Drive-isolation benchmark: the pseudo-potential frequency prediction
    applies to the RF drive alone, so the reference ion carries the
    configured mass but no magnetic terms."""
    if rc.drive is None:
        raise ConfigError("the secular command needs a [drive] section")
    drive = rc.drive
    mu = rc.trap.mu
    wp = drive.omega_P(mu)
    reference = TrapConfig(omega_P=wp, mu=mu, omega_c=0.0, omega_0=0.0,
                           a=rc.trap.a)
    state0 = ClassicalState(x1=0.1 * drive.d, x2=0.0, z=0.05 * drive.d)
    T = _SECULAR_PERIODS * 2.0 * math.pi / wp
    traj = integrate_trajectory(state0, reference, drive, T)
    est = extract_secular_frequency(traj)
    doc = {
        "config_hash": digest,
        "drive": {"V": drive.V, "d": drive.d, "omega_rf": drive.omega_rf,
                  "stability_ratio": drive.ratio(mu)},
        "omega_P_model": wp,
        "omega_secular": est.omega,
        "uncertainty": est.uncertainty,
        "relative_error": abs(est.omega - wp) / wp,
        "cutoff": est.cutoff,
        "n_samples": traj.n,
        "dt_sample": traj.dt_sample,
        "duration": traj.duration,
        "secular_periods": _SECULAR_PERIODS,
    }
    if args.out is not None:
        decimate = args.decimate
        if decimate is None:
            decimate = max(1, -(-traj.n // _CSV_ROW_CAP))
        _write_text(args.out, "trajectory.csv",
                    trajectory_csv(traj, decimate=decimate))
    _emit(args, "secular.json", dumps(doc))
    return EXIT_OK


def _cmd_verify_all(rc, digest, args, threads):
    """Criteria run on pinned internal grids; the config only stamps
    provenance on the artifacts."""
    report = verify_all(digest=digest)
    if args.out is not None:
        for name, text in sorted(report.files.items()):
            _write_text(args.out, name, text)
    sys.stdout.write("".join(line + "\n" for line in report.lines))
    return EXIT_OK if report.all_passed else EXIT_CRITERIA


_HANDLERS = {
    "reduce": _cmd_reduce,
    "spectrum": _cmd_spectrum,
    "residual-scan": _cmd_residual_scan,
    "gauge-check": _cmd_gauge_check,
    "secular": _cmd_secular,
    "verify-all": _cmd_verify_all,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="abtrap",
        description="combined-trap toolkit: exact Dirac reduction, radial "
                    "spectra, gauge diagnostics, classical secular dynamics")
    parser.add_argument("--version", action="version",
                        version=f"abtrap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", metavar="PATH", default=None,
                       help="config file (defaults to the shipped "
                            "configuration)")
        p.add_argument("--out", metavar="DIR", default=None,
                       help="write artifacts into DIR instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="record format where tabular output exists "
                            "(spectrum, residual-scan)")
        p.add_argument("--threads", type=int, default=None, metavar="N",
                       help="worker threads for sector solves (else "
                            "ABTRAP_THREADS, else serial)")
        return p

    add("reduce", "Dirac reduction report for the configured trap")
    add("spectrum", "radial eigensolve over the configured sectors")
    add("residual-scan",
        "slow-branch ground-state residual along an omega_c sweep")
    add("gauge-check",
        "pure-gauge, circulation and J_z invariance diagnostics")
    p = add("secular",
            "RF benchmark trajectory plus extracted secular frequency")
    p.add_argument("--decimate", type=int, default=None, metavar="K",
                   help="keep every K-th trajectory sample in the CSV "
                        "(default: size-capped)")
    add("verify-all",
        "run every acceptance criterion; nonzero exit unless all pass")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        rc = _load_config(args.config)
        digest = config_hash(rc.canonical)
        threads = _resolve_threads(args.threads)
        return _HANDLERS[args.command](rc, digest, args, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReductionImpossible as exc:
        print(f"reduction impossible: {exc}", file=sys.stderr)
        if exc.matrix is not None:
            print("constraint bracket matrix:", file=sys.stderr)
            for row in exc.matrix.entry_strings():
                print("  [" + ", ".join(row) + "]", file=sys.stderr)
        return EXIT_REDUCTION
    except AbtrapError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
