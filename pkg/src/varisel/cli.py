"""Command-line interface.

Exit status: 0 on success (an EXHAUSTED run included), 1 on input errors,
2 on internal errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dataset import heart_failure_path, load_csv, profile
from .errors import VariselError
from .fm import Configuration, enumerate_configurations, parse, to_dot, validate_model
from .metrics import round_sig
from .pipeline import (
    DIGITS,
    PipelineSettings,
    QualityCriterion,
    TriggerRule,
    audit,
    load_settings,
    render_instance,
    run_pipeline,
)
from .selector import SelectorThresholds, explain, recommend

log = logging.getLogger("varisel")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _settings(args) -> PipelineSettings:
    s = load_settings(args.settings)
    changes = {}
    for name in ("target", "sensitive", "protected_value", "positive_label", "seed", "test_fraction"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    if getattr(args, "unlabeled", False):
        changes["target"] = None
    if getattr(args, "metric", None) is not None or getattr(args, "threshold", None) is not None:
        c = s.criterion
        changes["criterion"] = QualityCriterion(
            args.metric if args.metric is not None else c.metric,
            c.comparator,
            args.threshold if args.threshold is not None else c.threshold,
        )
    if getattr(args, "thresholds_file", None):
        try:
            changes["thresholds"] = SelectorThresholds.from_dict(_read_json(args.thresholds_file))
        except (TypeError, ValueError) as exc:
            raise InputError(f"{args.thresholds_file}: {exc}") from None
    if getattr(args, "triggers_file", None):
        data = _read_json(args.triggers_file)
        try:
            rules = data["triggers"] if isinstance(data, dict) else data
            changes["triggers"] = tuple(TriggerRule.from_dict(r) for r in rules)
        except (KeyError, TypeError) as exc:
            raise InputError(f"{args.triggers_file}: malformed trigger rules ({exc})") from None
    return dataclasses.replace(s, **changes)


def _dataset(args, settings: PipelineSettings):
    path = args.csv or heart_failure_path()
    text = tuple(args.text_columns.split(",")) if getattr(args, "text_columns", None) else ()
    return load_csv(path, target=settings.target, sensitive=settings.sensitive, text_columns=text)


def _emit(args, payload: dict | None, text: str) -> None:
    out = json.dumps(payload, indent=2, ensure_ascii=False) + "\n" if args.format == "json" else text
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)


def cmd_profile(args) -> int:
    s = _settings(args)
    prof = profile(_dataset(args, s), thresholds=s.thresholds, positive_label=s.positive_label)
    d = prof.to_dict()
    d["positive_fraction"] = round_sig(d["positive_fraction"], DIGITS)
    _emit(args, d, "".join(f"{k}: {v}\n" for k, v in d.items()))
    return 0


def cmd_select(args) -> int:
    s = _settings(args)
    prof = profile(_dataset(args, s), thresholds=s.thresholds, positive_label=s.positive_label)
    queue = recommend(prof, s.thresholds)
    lines = [f"{i}. {a.value}\n   {why}\n" for i, (a, why) in enumerate(zip(queue.items, explain(queue)), 1)]
    _emit(args, queue.to_dict(), "".join(lines))
    return 0


def cmd_run(args) -> int:
    s = _settings(args)
    report = run_pipeline(_dataset(args, s), s)
    if args.format == "json":
        out = report.to_json()
        if args.out:
            Path(args.out).write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
    else:
        _emit(args, None, report.to_text())
    if args.dot:
        if report.outcome.status == "ACCEPTED":
            Path(args.dot).write_text(render_instance(report), encoding="utf-8")
        else:
            log.warning("outcome %s: no instance to render", report.outcome)
    return 0


def cmd_audit(args) -> int:
    perf, fair = audit(args.predictions, args.protected_value, args.positive_label, args.group_column)
    payload = {
        "performance": perf.rounded(DIGITS).to_dict(),
        "fairness": fair.rounded(DIGITS).to_dict(),
    }
    text = "".join(
        f"{k}: {'n/a' if v is None else format(v, '.6g')}\n" for part in payload.values() for k, v in part.items()
    )
    _emit(args, payload, text)
    return 0


def _load_fm(path: str):
    return parse(Path(path).read_text(encoding="utf-8"))


def cmd_fm(args) -> int:
    model = _load_fm(args.file)
    if args.fm_command == "validate":
        result = validate_model(model)
        payload = {"ok": result.ok, "violations": [dataclasses.asdict(v) for v in result.violations]}
        text = "valid\n" if result.ok else "".join(f"{v}\n" for v in result.violations)
        _emit(args, payload, text)
        return 0 if result.ok else 1
    if args.fm_command == "enumerate":
        configs = enumerate_configurations(model, cap=args.cap)
        rows = [list(c.sort_key()) for c in configs]
        _emit(args, {"count": len(rows), "configurations": rows}, "".join(" ".join(r) + "\n" for r in rows))
        return 0
    highlight = None
    if args.highlight:
        highlight = Configuration(frozenset(x.strip() for x in args.highlight.split(",") if x.strip()))
    dot = to_dot(model, highlight=highlight, name=Path(args.file).stem)
    if args.out:
        Path(args.out).write_text(dot, encoding="utf-8")
    else:
        sys.stdout.write(dot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="varisel", description="Feature-model driven selection of classification algorithms.")
    p.add_argument("--version", action="version", version=f"varisel {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and timings to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", help="write output here instead of stdout")

    data = _Parser(add_help=False)
    data.add_argument("csv", nargs="?", help="input CSV (default: the bundled heart-failure records)")
    data.add_argument("--settings", help="settings JSON (default: bundled default.json)")
    data.add_argument("--target")
    data.add_argument("--unlabeled", action="store_true", help="treat the data as having no target")
    data.add_argument("--sensitive")
    data.add_argument("--positive-label")
    data.add_argument("--text-columns", help="comma-separated columns holding free text")
    data.add_argument("--thresholds-file", help="JSON with selector thresholds")

    sub.add_parser("profile", parents=[common, data], help="print the dataset profile")
    sub.add_parser("select", parents=[common, data], help="print the method queue with explanations")
    run = sub.add_parser("run", parents=[common, data], help="run the full selection pipeline")
    run.add_argument("--protected-value")
    run.add_argument("--seed", type=int)
    run.add_argument("--metric")
    run.add_argument("--threshold", type=float)
    run.add_argument("--test-fraction", type=float)
    run.add_argument("--triggers-file", help="JSON list of trigger rules")
    run.add_argument("--dot", help="also write the accepted instance as DOT here")

    au = sub.add_parser("audit", parents=[common], help="performance and fairness of a predictions file")
    au.add_argument("predictions")
    au.add_argument("--protected-value", required=True)
    au.add_argument("--positive-label")
    au.add_argument("--group-column", default="group")

    fm = sub.add_parser("fm", help="feature model tools")
    fm_sub = fm.add_subparsers(dest="fm_command", required=True, parser_class=_Parser)
    fm_sub.add_parser("validate", parents=[common]).add_argument("file")
    en = fm_sub.add_parser("enumerate", parents=[common])
    en.add_argument("file")
    en.add_argument("--cap", type=int, default=24, help="refuse models with more features than this")
    rd = fm_sub.add_parser("render")
    rd.add_argument("file")
    rd.add_argument("--highlight", help="comma-separated feature ids to highlight")
    rd.add_argument("--out")
    return p


COMMANDS = {"profile": cmd_profile, "select": cmd_select, "run": cmd_run, "audit": cmd_audit, "fm": cmd_fm}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (VariselError, InputError, OSError) as exc:
        print(f"varisel: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"varisel: internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
