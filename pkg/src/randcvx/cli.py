"""Command line entry point: ``randcvx gen | check <suite> | report <path>``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage,
configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import SUITES, ConfigError, ExperimentConfig, check_instance, generate_instances, run_suite
from .serialization import SchemaError, dumps_report, instance_from_json, load_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    p.add_argument("--atoms", type=int, default=4, help="maximum number of F-atoms")
    p.add_argument("--dims", type=int, default=3, help="maximum coordinates per F-atom")
    p.add_argument("--count", type=int, default=None, help="number of instances (default: suite specific)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="randcvx", description="Random convex analysis on finite stratified spaces.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write random instance files")
    _common(g)

    c = sub.add_parser("check", help="run an acceptance suite or check instance files")
    c.add_argument("suite", choices=SUITES + ("all", "instance"))
    _common(c)
    c.add_argument("--tol", type=float, default=None, help="override the suite tolerance")
    c.add_argument("--config", default=None, help="JSON file with ExperimentConfig fields")
    c.add_argument("--instance", default=None, help="instance file for 'check instance'")

    r = sub.add_parser("report", help="summarize a saved report")
    r.add_argument("path")
    return ap


def _emit(text: str, out: str | None):
    if out is None:
        print(text)
    else:
        Path(out).write_text(text + "\n")


def _config(args) -> ExperimentConfig:
    fields = {}
    if args.config:
        try:
            fields = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(fields, dict):
            raise ConfigError("config file must hold a JSON object")
    fields.setdefault("suite", args.suite)
    fields.setdefault("seed", args.seed)
    fields.setdefault("max_atoms", args.atoms)
    fields.setdefault("max_dims", args.dims)
    if args.count is not None:
        fields["count"] = args.count
    if args.out is not None:
        fields["out"] = args.out
    tol = dict(fields.get("tol") or {})
    if args.tol is not None:
        for s in SUITES if fields["suite"] == "all" else (fields["suite"],):
            tol[s] = args.tol
    fields["tol"] = tol
    try:
        return ExperimentConfig(**fields)
    except TypeError as e:
        raise ConfigError(f"bad config: {e}") from e


def _print_summary(report: dict, stream=None):
    stream = stream or sys.stderr
    for name, rep in report.get("suites", {}).items():
        status = "PASS" if rep["ok"] else "FAIL"
        print(f"{status} {name}: {rep['n_passed']}/{rep['n_instances']} passed, worst gap {rep['worst_gap']}", file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "gen":
            if args.count is not None and args.count < 1:
                raise ConfigError("instance count must be at least 1")
            inst = generate_instances(args.seed, args.count or 1, args.atoms, args.dims)
            _emit(json.dumps({"seed": args.seed, "instances": inst}, indent=2), args.out)
            return EXIT_OK
        if args.cmd == "check":
            if args.suite == "instance":
                if not args.instance:
                    raise ConfigError("'check instance' needs --instance FILE")
                try:
                    data = json.loads(Path(args.instance).read_text())
                except OSError as e:
                    raise SchemaError(f"cannot read {args.instance}: {e}") from e
                except json.JSONDecodeError as e:
                    raise SchemaError(f"{args.instance}: invalid JSON ({e})") from e
                items = data["instances"] if isinstance(data, dict) and "instances" in data else [data]
                results = [check_instance(instance_from_json(d)) for d in items]
                report = {"instances": results, "ok": all(r["ok"] for r in results)}
                _emit(dumps_report(report), args.out)
                return EXIT_OK if report["ok"] else EXIT_FAIL
            cfg = _config(args)
            report = run_suite(cfg)
            _emit(dumps_report(report), cfg.out)
            _print_summary(report)
            return EXIT_OK if report["ok"] else EXIT_FAIL
        if args.cmd == "report":
            report = load_report(args.path)
            if not isinstance(report, dict) or "ok" not in report:
                raise SchemaError(f"{args.path}: not a report")
            _print_summary(report, sys.stdout)
            print("overall:", "PASS" if report["ok"] else "FAIL")
            return EXIT_OK if report["ok"] else EXIT_FAIL
    except (ConfigError, SchemaError) as e:
        print(f"randcvx: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"randcvx: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
