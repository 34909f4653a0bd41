"""Command line entry point: ``recip analyze|spectrum|omegascan|selftest``."""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import moss
from .omegascan import GeometryNotClosedError, check_symmetry, find_symmetry_unitary, norm_mismatch
from .reciprocity import DEFAULT_TOL, ReciprocityInconsistencyError, find_reciprocity_unitary
from .scenario import (
    ScenarioError,
    analysis_potentials,
    build_sample,
    build_scenario,
    load_builtin,
    parse_scenario,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONSISTENT = 2

CSV_HEADER = (
    "energy",
    "intensity_normal",
    "intensity_reversed",
    "re_amp_normal",
    "im_amp_normal",
    "re_amp_reversed",
    "im_amp_reversed",
)


class UsageError(Exception):
    pass


def _default_tol() -> float:
    raw = os.environ.get("RECIP_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"RECIP_TOL={raw!r} is not a number") from None
    if not (tol > 0 and math.isfinite(tol)):
        raise UsageError(f"RECIP_TOL must be positive and finite, got {raw!r}")
    return tol


def _positive_float(text: str) -> float:
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _read(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ScenarioError(f"{path} is not UTF-8 text") from None
    return parse_scenario(text)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _axis(v) -> str:
    return " ".join(_fmt(c) for c in v)


def cmd_analyze(args, out) -> int:
    rec = _read(args.file)
    potentials = analysis_potentials(rec)
    verdict = find_reciprocity_unitary([p for _, p in potentials], args.tol)
    print(f"class: {verdict.kind.value}", file=out)
    print(f"potentials: {len(potentials)}", file=out)
    print(f"plane_rank: {verdict.plane.rank}", file=out)
    print(f"plane_residual: {_fmt(verdict.plane.residual)}", file=out)
    if verdict.unitary is not None:
        u, s = verdict.unitary, verdict.symmetrizer
        print(f"axis: {_axis(u.n)}", file=out)
        print(f"phi_deg: {_fmt(math.degrees(u.phi))}", file=out)
        print(f"delta_deg: {_fmt(math.degrees(u.delta))}", file=out)
        print(f"symmetrizer_axis: {_axis(s.n)}", file=out)
        print(f"symmetrizer_phi_deg: {_fmt(math.degrees(s.phi))}", file=out)
        if verdict.phase is not None:
            print(f"common_phase_deg: {_fmt(math.degrees(verdict.phase))}", file=out)
    print(f"residual: {_fmt(verdict.residual)}", file=out)
    return EXIT_OK


def write_csv(spec: moss.Spectrum, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in zip(
        spec.grid,
        spec.normal,
        spec.reversed,
        spec.amp_normal.real,
        spec.amp_normal.imag,
        spec.amp_reversed.real,
        spec.amp_reversed.imag,
    ):
        writer.writerow([_fmt(x) for x in row])


def cmd_spectrum(args, out) -> int:
    rec = _read(args.file)
    scenario = build_scenario(rec, args.grid)
    spec = moss.spectrum(scenario, threads=args.threads)
    if args.output in (None, "-"):
        write_csv(spec, out)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_csv(spec, fh)
    return EXIT_OK


def cmd_omegascan(args, out) -> int:
    rec = _read(args.file)
    sample = build_sample(rec)
    U = find_symmetry_unitary(sample, args.tol)
    if U is None:
        print("status: fail", file=out)
        cert = norm_mismatch(sample, args.tol)
        if cert is not None:
            print(
                f"certificate: |{cert.part} v({cert.region})| = {_fmt(cert.norm)} differs from "
                f"|{cert.part} v({cert.partner})| = {_fmt(cert.partner_norm)}",
                file=out,
            )
        return EXIT_OK
    report = check_symmetry(sample, U, args.tol)
    print(f"status: {'pass' if report.passed else 'fail'}", file=out)
    print(f"scalar_residual: {_fmt(report.scalar_residual)}", file=out)
    print(f"vector_residual: {_fmt(report.vector_residual)}", file=out)
    print(f"axis: {_axis(U.n)}", file=out)
    print(f"phi_deg: {_fmt(math.degrees(U.phi))}", file=out)
    print(f"delta_deg: {_fmt(math.degrees(U.delta))}", file=out)
    return EXIT_OK


@dataclass(frozen=True)
class GoldenCheck:
    name: str
    value: float
    bound: float
    below: bool

    @property
    def passed(self) -> bool:
        return self.value <= self.bound if self.below else self.value >= self.bound


def golden_checks(threads: int = 1) -> list:
    """The four shipped figure checks on the built-in scenarios."""

    def run(name):
        return moss.spectrum(build_scenario(load_builtin(name)), threads=threads)

    a, b, c = run("fig2a"), run("fig2b"), run("fig2c")
    f3a, f3b = run("fig3a"), run("fig3b")
    dev = moss.max_relative_deviation
    return [
        GoldenCheck("fig2 a equals c", dev(a.normal, c.normal), 1e-10, True),
        GoldenCheck("fig2 a differs from b", dev(a.normal, b.normal), 1e-2, False),
        GoldenCheck("fig3a normal equals reversed", dev(f3a.normal, f3a.reversed), 1e-8, True),
        GoldenCheck("fig3b normal differs from reversed", dev(f3b.normal, f3b.reversed), 1e-3, False),
    ]


def cmd_selftest(args, out) -> int:
    checks = golden_checks(args.threads)
    for check in checks:
        op = "<=" if check.below else ">="
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: {check.value:.3e} {op} {check.bound:.0e}", file=out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_INCONSISTENT


def build_parser(default_tol: float) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recip", description="Reciprocity analysis of polarized transmission setups.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=default_tol, help="relative tolerance (env RECIP_TOL)")
    common.add_argument("--grid", type=_positive_int, default=None, help="number of energy grid points")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads for spectra")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="reciprocity verdict for the layer potentials")
    p.add_argument("file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectrum", parents=[common], help="normal and reversed spectra as CSV")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("omegascan", parents=[common], help="omega-scan symmetry test")
    p.add_argument("file")
    p.set_defaults(func=cmd_omegascan)

    p = sub.add_parser("selftest", parents=[common], help="run the built-in figure checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        parser = build_parser(_default_tol())
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args, out)
    except (ScenarioError, GeometryNotClosedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ReciprocityInconsistencyError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
