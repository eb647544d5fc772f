"""Command line front end: estimate, replicates, hadamard, simulate.

Numeric output is printed with 12 significant digits so results can be
checked by hand against the underlying formulas.  Relative output paths are
resolved under $REPVAR_OUTPUT_DIR when that variable is set.

Exit codes: 0 on success, 2 for command line usage errors, and one distinct
code per error class (see errors.py); unexpected I/O failures exit 1.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .dof import DofRule
from .errors import ConfigError, RepvarError
from .hadamard import construct
from .io import build_report, parse_sample, write_hadamard_csv, write_replicates_csv
from .replication import (
    SchemeKind,
    SchemeSpec,
    jk1_weights,
    brr_weights,
    paired_jk_weights,
    zones_from_sample,
)
from .simulation import SimulationConfig, run_simulation

_CHECK_NAMES = ("coverage", "chi2", "deviation-covariance", "dof-calibration")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _resolve_output(path: str) -> Path:
    p = Path(path)
    base = os.environ.get("REPVAR_OUTPUT_DIR")
    if base and not p.is_absolute():
        return Path(base) / p
    return p


def _scheme_from_args(args) -> SchemeSpec:
    return SchemeSpec(SchemeKind(args.scheme), args.epsilon, args.order)


def _add_scheme_flags(sub, with_order=True):
    sub.add_argument(
        "--scheme",
        default=SchemeKind.BRR.value,
        choices=[k.value for k in SchemeKind],
        help="replicate scheme (default: brr)",
    )
    sub.add_argument(
        "--epsilon",
        type=float,
        default=None,
        help="Fay perturbation in (0, 1]; defaults to 0.5 for the fay schemes and 1 otherwise",
    )
    if with_order:
        sub.add_argument(
            "--order",
            type=int,
            default=None,
            help="Hadamard order for the brr family (default: smallest usable order)",
        )


def _print_report(report) -> None:
    sch = report.scheme
    detail = [f"replicates={sch['n_replicates']}", f"epsilon={_fmt(sch['epsilon'])}"]
    if sch["hadamard_order"] is not None:
        detail.append(f"hadamard_order={sch['hadamard_order']}")
    print(f"scheme             {sch['kind']} ({', '.join(detail)})")
    print(f"components         {report.n_components}")
    print(f"total              {_fmt(report.total)}")
    print(f"variance           {_fmt(report.variance['value'])}")
    print(f"std_error          {_fmt(math.sqrt(report.variance['value']))}")
    if report.dof is None:
        print("dof                undefined (degenerate)")
    else:
        print(f"dof_naive          {_fmt(report.dof['naive'])}")
        print(f"dof_corrected      {_fmt(report.dof['corrected'])}")
        print(f"dof_clamped        {_fmt(report.dof['corrected_clamped'])}")
    ci = report.ci
    used = "none" if ci["dof_used"] is None else _fmt(ci["dof_used"])
    print(f"ci_level           {_fmt(ci['level'])}")
    print(f"ci_rule            {ci['dof_rule']} (dof_used: {used})")
    print(f"ci_half_width      {_fmt(ci['half_width'])}")
    print(f"ci                 [{_fmt(ci['lower'])}, {_fmt(ci['upper'])}]")
    for note in report.warnings:
        print(f"note: {note}")


def cmd_estimate(args) -> int:
    sample = parse_sample(args.sample)
    spec = _scheme_from_args(args)
    report = build_report(
        sample,
        spec,
        level=args.level,
        dof_rule=DofRule(args.dof_rule),
        cap_at_h=args.cap_at_h,
    )
    if args.json == "-":
        sys.stdout.write(report.to_json())
        return 0
    if args.json is not None:
        path = _resolve_output(args.json)
        path.write_text(report.to_json())
        print(f"wrote {path}", file=sys.stderr)
    _print_report(report)
    return 0


def cmd_replicates(args) -> int:
    sample = parse_sample(args.sample)
    spec = _scheme_from_args(args)
    if spec.kind is SchemeKind.JK1:
        table = jk1_weights(zones_from_sample(sample), spec)
    elif spec.kind in (SchemeKind.BRR, SchemeKind.FAY_BRR):
        table = brr_weights(sample, spec)
    else:
        table = paired_jk_weights(sample, spec)
    if args.output is None:
        write_replicates_csv(sample, table, sys.stdout)
        return 0
    path = _resolve_output(args.output)
    with open(path, "w", newline="") as fh:
        write_replicates_csv(sample, table, fh)
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_hadamard(args) -> int:
    matrix = construct(args.order)
    if args.output is None:
        write_hadamard_csv(matrix, sys.stdout)
        return 0
    path = _resolve_output(args.output)
    with open(path, "w") as fh:
        write_hadamard_csv(matrix, fh)
    print(f"wrote {path}", file=sys.stderr)
    return 0


def _print_simulation_summary(report) -> None:
    def put(label: str, text: str) -> None:
        print(f"{label:<20} {text}")

    if report.coverage is not None:
        put("truth", _fmt(report.truth))
        for rule, row in report.coverage["rules"].items():
            se = row["mc_se"]
            se_text = _fmt(se) if se is not None else "n/a"
            put(
                f"coverage[{rule}]",
                f"{_fmt(row['coverage'])} (mc_se {se_text}, {row['covered']}/{row['n_used']})",
            )
        put("vhat_mean", f"{_fmt(report.vhat['mean'])} (theory {_fmt(report.vhat['mean_theory'])})")
        put("vhat_var", f"{_fmt(report.vhat['var'])} (theory {_fmt(report.vhat['var_theory'])})")
        put("cross_check", f"max_rel_mismatch {_fmt(report.cross_check['max_rel_mismatch'])}")
    for name, frag in report.fragments.items():
        if name == "chi2":
            put("chi2", f"max_ratio_error {_fmt(frag['max_ratio_error'])}")
        elif name == "deviation-covariance":
            put(
                "deviation_cov",
                f"max_z {_fmt(frag['max_z'])}, entries_beyond_band {frag['n_exceed_band']}",
            )
        elif name == "dof-calibration":
            put(
                "dof_calibration",
                f"naive_mean {_fmt(frag['naive_mean'])}, corrected_mean {_fmt(frag['corrected_mean'])}",
            )


def cmd_simulate(args) -> int:
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON: {exc}") from None
    config = SimulationConfig.from_dict(data)
    report = run_simulation(config, checks=tuple(args.checks))
    path = _resolve_output(args.output)
    path.write_text(report.to_json())
    print(f"wrote {path}", file=sys.stderr)
    _print_simulation_summary(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repvar",
        description="Replicate variance estimation for stratified two-PSU samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="full pipeline: variance, df, and interval")
    est.add_argument("sample", help="sample CSV (header: stratum,psu,weight,y)")
    _add_scheme_flags(est)
    est.add_argument("--level", type=float, default=0.95, help="confidence level (default 0.95)")
    est.add_argument(
        "--dof-rule",
        default=DofRule.CORRECTED.value,
        choices=[r.value for r in DofRule],
        help="degrees of freedom feeding the t quantile (default: corrected)",
    )
    est.add_argument(
        "--cap-at-h",
        action="store_true",
        help="cap the corrected df at the number of components",
    )
    est.add_argument(
        "--json",
        default=None,
        metavar="PATH",
        help="write the JSON report to PATH ('-' prints JSON instead of the summary)",
    )
    est.set_defaults(func=cmd_estimate)

    rep = sub.add_parser("replicates", help="export the replicate weight table as CSV")
    rep.add_argument("sample", help="sample CSV (header: stratum,psu,weight,y)")
    _add_scheme_flags(rep)
    rep.add_argument("--output", default=None, metavar="PATH", help="output file (default: stdout)")
    rep.set_defaults(func=cmd_replicates)

    had = sub.add_parser("hadamard", help="emit a verified Hadamard matrix as CSV")
    had.add_argument("order", type=int, help="matrix order (1, 2, or a constructible multiple of 4)")
    had.add_argument("--output", default=None, metavar="PATH", help="output file (default: stdout)")
    had.set_defaults(func=cmd_hadamard)

    sim = sub.add_parser("simulate", help="run the Monte Carlo harness from a JSON config")
    sim.add_argument("config", help="simulation config JSON")
    sim.add_argument(
        "--output",
        default="simulation_report.json",
        metavar="PATH",
        help="report file (default: simulation_report.json)",
    )
    sim.add_argument(
        "--checks",
        nargs="+",
        default=["coverage"],
        choices=list(_CHECK_NAMES),
        help="which checks to run (default: coverage)",
    )
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RepvarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
