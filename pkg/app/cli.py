"""Command-line front end.

    sqss run     one session, JSON report
    sqss sweep   detection sweep, CSV (or JSON) rows
    sqss attack  exact and estimated detection for one attack
    sqss table   qubit-efficiency comparison

Exit codes: 0 success, 1 usage or argument error, 2 protocol abort.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from pydantic import ValidationError

from app.core.config import get_settings
from app.core.errors import SimulationError
from app.services import efficiency, harness
from app.services.adversaries import AdversaryConfig, AdversaryKind, CollectiveSpec
from app.services.protocol import SessionConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ABORT = 2


class UsageError(Exception):
    """Bad flags or flag combinations."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {value!r}") from None


def _kind(value: str) -> AdversaryKind:
    try:
        return AdversaryKind.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = _Parser(prog="sqss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--participants", "-M", type=int, default=settings.default_participants)
    common.add_argument("--secret-len", "-N", type=int, default=settings.default_secret_len)
    common.add_argument("--seed", type=int, default=settings.default_seed)
    common.add_argument("--abort-threshold", type=float,
                        default=settings.default_abort_threshold)
    common.add_argument("--ue-spec", type=Path, help="collective-attack U_E spec (JSON)")
    common.add_argument("--dishonest", type=_int_list, help="colluding participants, e.g. 1,2")
    common.add_argument("--targets", type=_int_list, help="tapped participants (default all)")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")

    run = sub.add_parser("run", parents=[common], help="run one session")
    run.add_argument("--decoys", "-K", type=int, default=settings.default_decoys)
    run.add_argument("--adversary", type=_kind, default=AdversaryKind.NONE)
    run.add_argument("--secret", help="secret bit string (default: random)")
    run.add_argument("--output", choices=["json"], default="json")
    run.add_argument("--replay", type=Path, help="also write a replay file")

    sweep = sub.add_parser("sweep", parents=[common], help="detection sweep")
    sweep.add_argument("--adversary", type=_kind, action="append",
                       help="repeatable; default dcna")
    sweep.add_argument("--decoys", "-K", type=_int_list, default=[1, 2, 4])
    sweep.add_argument("--trials", "-T", type=_int_list, default=[settings.default_trials])
    sweep.add_argument("--workers", type=int, default=settings.sweep_workers)
    sweep.add_argument("--output", choices=["csv", "json"], default="csv")

    attack = sub.add_parser("attack", parents=[common], help="analyse one attack")
    attack.add_argument("--adversary", type=_kind, required=True)
    attack.add_argument("--decoys", "-K", type=int, default=settings.default_decoys)
    attack.add_argument("--trials", "-T", type=int, default=settings.default_trials)
    attack.add_argument("--workers", type=int, default=settings.sweep_workers)
    attack.add_argument("--output", choices=["json", "text"], default="json")

    table = sub.add_parser("table", help="qubit-efficiency table")
    table.add_argument("--participants", "-M", type=int, default=settings.default_participants)
    table.add_argument("--output", choices=["text", "csv", "json"], default="text")
    table.add_argument("--out", type=Path)

    return parser


# ── Helpers ──────────────────────────────────────────────────


def _adversary(args: argparse.Namespace, kind: AdversaryKind) -> AdversaryConfig:
    if (kind is AdversaryKind.COLLECTIVE) != (args.ue_spec is not None):
        raise UsageError("--ue-spec is required with, and only with, --adversary collective")
    spec = CollectiveSpec.load(args.ue_spec) if args.ue_spec is not None else None
    return AdversaryConfig(
        kind=kind, collective=spec, dishonest=args.dishonest, targets=args.targets
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


# ── Subcommands ──────────────────────────────────────────────


def cmd_run(args: argparse.Namespace) -> int:
    config = SessionConfig(
        participants=args.participants,
        secret_len=args.secret_len,
        decoys=args.decoys,
        abort_threshold=args.abort_threshold,
        seed=args.seed,
        secret=args.secret,
    )
    adversary = _adversary(args, args.adversary)
    report = harness.run_session(config, adversary)
    _emit(report.model_dump_json(indent=2) + "\n", args.out)
    if args.replay is not None:
        harness.write_replay(args.replay, report, adversary)
    return EXIT_OK if report.completed else EXIT_ABORT


def cmd_sweep(args: argparse.Namespace) -> int:
    if any(t < 1 for t in args.trials) or any(k < 1 for k in args.decoys):
        raise UsageError("trials and decoys must be at least 1")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    kinds = args.adversary or [AdversaryKind.DCNA]
    rows = harness.run_sweep(
        [_adversary(args, kind) for kind in kinds],
        args.decoys,
        args.trials,
        participants=args.participants,
        secret_len=args.secret_len,
        seed=args.seed,
        abort_threshold=args.abort_threshold,
        workers=args.workers,
    )
    if args.output == "json":
        _emit(harness.sweep_rows_json(rows) + "\n", args.out)
    elif args.out is not None:
        with args.out.open("w", encoding="utf-8", newline="") as stream:
            harness.write_sweep_csv(rows, stream)
    else:
        harness.write_sweep_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    adversary = _adversary(args, args.adversary)
    config = SessionConfig(
        participants=args.participants,
        secret_len=args.secret_len,
        decoys=args.decoys,
        abort_threshold=args.abort_threshold,
        seed=args.seed,
    )
    estimate = harness.monte_carlo_detection(config, adversary, args.trials, args.workers)
    summary: dict[str, object] = {"estimate": estimate.model_dump(mode="json")}
    kind, spec = adversary.kind, adversary.collective
    if kind in (AdversaryKind.DCNA, AdversaryKind.IR_MEASURE, AdversaryKind.IR_FAKE,
                AdversaryKind.COLLECTIVE):
        summary["detection_by_op"] = {
            str(op): p for op, p in harness.detection_by_op(kind, spec).items()
        }
    if kind in (AdversaryKind.DCNA, AdversaryKind.COLLECTIVE):
        summary["max_decoy_information"] = harness.max_decoy_information(kind, spec)
        summary["message_information"] = harness.holevo_information(
            harness.message_ancilla_ensemble(config.participants, kind, spec)
        )

    if args.output == "json":
        _emit(json.dumps(summary, indent=2) + "\n", args.out)
    else:
        lines = [f"adversary            {kind}"]
        lines += [f"{key:<20} {value}" for key, value in summary["estimate"].items()]
        lines += [
            f"{key:<20} {json.dumps(value)}" for key, value in summary.items() if key != "estimate"
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_table(args: argparse.Namespace) -> int:
    if args.participants < 2:
        raise UsageError("--participants must be at least 2")
    rows = efficiency.efficiency_table(args.participants)
    if args.output == "csv":
        text = efficiency.render_csv(rows)
    elif args.output == "json":
        text = json.dumps(
            [dict(zip(efficiency.CSV_COLUMNS, efficiency.render_row(r), strict=True))
             for r in rows],
            indent=2,
        ) + "\n"
    else:
        text = efficiency.render_text(rows)
    _emit(text, args.out)
    return EXIT_OK


_COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "attack": cmd_attack, "table": cmd_table}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=get_settings().log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sqss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, SimulationError, ValueError, OSError) as exc:
        print(f"sqss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
