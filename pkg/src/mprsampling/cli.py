"""``mprsampling`` command line.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import kernels
from .errors import ConfigError, InvalidParameterError
from .experiments import (
    Z_FAIL,
    ExperimentKind,
    load_config,
    run_gamma_sweep,
    run_rte_curves,
    run_solve,
    run_validate,
    run_weight_sweep,
    spec_from_config,
    to_csv,
)

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mprsampling", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "rte-curves": "closed-form RTE versus update probability",
        "gamma-sweep": "weighted RTE of all policies versus sampling budget",
        "weight-sweep": "weighted RTE of all policies versus the weight of source 2",
        "validate": "closed forms versus Monte Carlo simulation",
        "solve": "table of the nine vertex candidates for one scenario",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="TOML scenario/experiment file (defaults used if omitted)")
        sp.add_argument("--out", help="CSV output path (stdout if omitted)")
        sp.add_argument("--seed", type=_seed, help="simulation seed, overrides [sim].seed")
        sp.add_argument("--backend", choices=kernels.BACKENDS, help="kernel backend override")
    return p


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.backend:
        kernels.set_backend(args.backend)
    try:
        cfg = load_config(args.config)
        spec = spec_from_config(args.command, cfg, args.out, args.seed)
        kind = spec.kind
        info = sys.stderr if not args.out else sys.stdout
        if kind is ExperimentKind.VALIDATE:
            report = run_validate(spec)
            _emit(to_csv(report.header, report.rows), args.out)
            for name in report.rejected:
                print(f"rejected {name}: no source is ever updated, nothing to compare", file=info)
            verdict = "PASS" if report.passed else "FAIL"
            print(f"{verdict}: max |z| = {report.max_abs_z:.3f} (threshold {Z_FAIL})", file=info)
            return EXIT_OK if report.passed else EXIT_VALIDATION
        if kind is ExperimentKind.SOLVE:
            header, rows, best = run_solve(spec)
            _emit(to_csv(header, rows), args.out)
            print(
                f"best vertex pair: a1={best.policy_1} a2={best.policy_2} "
                f"objective={best.objective_value:.12g} certificate={best.optimality_certificate.value}",
                file=info,
            )
            return EXIT_OK
        runner = {
            ExperimentKind.RTE_CURVES: run_rte_curves,
            ExperimentKind.GAMMA_SWEEP: run_gamma_sweep,
            ExperimentKind.WEIGHT_SWEEP: run_weight_sweep,
        }[kind]
        header, rows = runner(spec)
        _emit(to_csv(header, rows), args.out)
        if args.out:
            print(f"wrote {len(rows)} rows to {args.out}")
        return EXIT_OK
    except (ConfigError, InvalidParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
