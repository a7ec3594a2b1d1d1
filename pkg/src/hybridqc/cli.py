"""Command-line front end.

Exit codes: 0 success, 1 config error, 2 integration failure, 3 acceptance
failure (verify).
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config_or_preset, preset_names
from .integrate import IntegrationError
from .runner import RunSummary, run_single, sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTEGRATION = 2
EXIT_ACCEPTANCE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridqc",
        description=(
            "Simulate coupled qubit-oscillator dynamics and classify runs"
            " as regular or chaotic."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("config", help="path to a config TOML or a preset name")

    p_sweep = sub.add_parser(
        "sweep", help="run a config repeatedly over one model parameter"
    )
    p_sweep.add_argument("config", help="path to a config TOML or a preset name")
    p_sweep.add_argument("--axis", required=True, help="model parameter to vary")
    p_sweep.add_argument(
        "--values", required=True, nargs="+",
        help="parameter values (space or comma separated)",
    )
    p_sweep.add_argument(
        "--jobs", type=int, default=1,
        help="worker processes for the sweep (default 1)",
    )

    p_presets = sub.add_parser("presets", help="preset operations")
    p_presets.add_argument("action", choices=["list"])

    sub.add_parser("verify", help="run the acceptance suite")
    return parser


def _parse_values(tokens: list[str]) -> list[float]:
    values = []
    for token in tokens:
        for piece in token.split(","):
            piece = piece.strip()
            if not piece:
                continue
            try:
                values.append(float(piece))
            except ValueError:
                raise ConfigError(f"sweep value {piece!r} is not a number")
    return values


def _print_summary(summary: RunSummary) -> None:
    print(f"run {summary.config.label}: {summary.status}"
          f" ({summary.duration_seconds:.2f}s) -> {summary.output_dir}")
    for warning in summary.config.warnings:
        print(f"  warning: {warning}")
    for label, value in summary.drifts.items():
        print(f"  drift {label}: {value:.3e}")
    for label, value in summary.excursions.items():
        print(f"  excursion {label}: {value:.3e}")
    if summary.lyapunov is not None:
        lam = summary.lyapunov
        print(f"  lyapunov: {lam.value:.6e} +- {lam.std_error:.1e}")
    for label, verdict in summary.verdicts.items():
        print(f"  verdict[{label}]: {verdict}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            cfg = load_config_or_preset(args.config)
            try:
                summary = run_single(cfg)
            except IntegrationError as exc:
                print(f"integration failed: {exc}", file=sys.stderr)
                return EXIT_INTEGRATION
            _print_summary(summary)
            return EXIT_OK

        if args.command == "sweep":
            cfg = load_config_or_preset(args.config)
            values = _parse_values(args.values)
            summaries = sweep(cfg, args.axis, values, jobs=args.jobs)
            failed = 0
            for value, summary in zip(values, summaries):
                verdicts = summary.verdicts
                line = (f"{args.axis}={value:g}: {summary.status}"
                        f"  q={verdicts.get('q', '-')}"
                        f"  x1={verdicts.get('x1', '-')}")
                if summary.status != "ok":
                    failed += 1
                    line += f"  ({summary.error})"
                print(line)
            return EXIT_INTEGRATION if failed else EXIT_OK

        if args.command == "presets":
            for name in preset_names():
                print(name)
            return EXIT_OK

        if args.command == "verify":
            from .acceptance import run_all_criteria
            results = run_all_criteria()
            ok = True
            for result in results:
                print(result.line())
                ok = ok and result.passed
            return EXIT_OK if ok else EXIT_ACCEPTANCE

    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable command")


if __name__ == "__main__":
    sys.exit(main())
