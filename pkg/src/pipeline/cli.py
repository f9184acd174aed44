"""
Command-line front end.

Precedence for every field: dataclass defaults < LPQ_* environment variables
< the JSON document given with --config < command-line flags.
"""
import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src.config import config
from src.logger import logging
from src.pipeline.run_pipeline import RunConfig, RunPipeline
from src.utils import read_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpq-audit",
                                     description="Lorentz-scale norms, theorem predicates and interpolation audits")
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="seed for banks and scans")
    parser.add_argument("--workers", type=int, help="worker threads")
    parser.add_argument("--out", dest="out_dir", help="artifact directory")
    parser.add_argument("--format", dest="fmt", choices=("json", "csv"), help="report format")

    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("--input", dest="input_path", help="function container written by save_function")
        p.add_argument("--bank", dest="bank_family", help="bank family to draw the function from")
        p.add_argument("--index", type=int, help="bank member")
        p.add_argument("--n", type=int, help="dimension")
        p.add_argument("--family", choices=("inhomogeneous", "homogeneous", "necessity"))
        p.add_argument("--epsilon", help="necessity family epsilon")

    norm = sub.add_parser("norm", help="evaluate a space norm on one function")
    add_input(norm)
    norm.add_argument("--space", choices=("F", "B", "H", "W", "L"))
    norm.add_argument("--s")
    norm.add_argument("--p")
    norm.add_argument("--q")
    norm.add_argument("--r")
    norm.add_argument("--k", type=int)
    norm.add_argument("--homogeneous", action="store_true", default=None)

    decompose = sub.add_parser("decompose", help="write the Littlewood-Paley bands of a function")
    add_input(decompose)

    predicates = sub.add_parser("predicates", help="evaluate or scan the theorem catalog")
    predicates.add_argument("--tuple", dest="params", type=json.loads, help="parameter tuple as JSON")
    predicates.add_argument("--theorem")
    predicates.add_argument("--scan", type=int, help="random consistency scan of this many tuples")
    predicates.add_argument("--n", type=int)

    audit = sub.add_parser("audit", help="interpolation ratio audits")
    audit.add_argument("--fixture")
    audit.add_argument("--count", type=int, help="bank size")

    witness = sub.add_parser("witness", help="necessity witnesses")
    witness.add_argument("--tuple", dest="params", type=json.loads, help="parameter tuple as JSON")
    witness.add_argument("--fixture")
    witness.add_argument("--witness-family", dest="witness_family", choices=("dilation", "modulation"))
    witness.add_argument("--scale", dest="witness_scale", choices=("F", "B"))
    witness.add_argument("--homogeneous", action="store_true", default=None)
    witness.add_argument("--embedding", action="store_true", default=None)
    witness.add_argument("--steps", type=int)
    witness.add_argument("--force", action="store_true", default=None)

    selftest = sub.add_parser("selftest", help="run the acceptance suite")
    selftest.add_argument("--quick", action="store_true", default=None)
    return parser


def _set(payload: Dict[str, Any], key: str, value: Any):
    if value is not None:
        payload[key] = value


def load_run_config(args: argparse.Namespace) -> RunConfig:
    payload: Dict[str, Any] = dict(read_json(args.config)) if args.config else {}
    payload["command"] = args.command
    flags = vars(args)

    for key in ("seed", "workers", "out_dir", "fmt", "input_path", "family", "epsilon", "params", "theorem",
                "scan", "fixture", "witness_family", "witness_scale", "homogeneous", "embedding", "steps",
                "force", "quick"):
        if key == "homogeneous" and args.command == "norm":
            continue
        _set(payload, key, flags.get(key))

    if flags.get("n") is not None:
        payload.setdefault("grid", {})["n"] = flags["n"]
    bank = payload.setdefault("bank", {})
    _set(bank, "family", flags.get("bank_family"))
    _set(bank, "index", flags.get("index"))
    _set(bank, "count", flags.get("count"))

    if args.command == "norm":
        space = payload.setdefault("space", {})
        _set(space, "scale", flags.get("space"))
        for key in ("s", "p", "q", "r", "k", "homogeneous"):
            _set(space, key, flags.get(key))
    return RunConfig.model_validate(payload)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run_config = load_run_config(args)
    except ValidationError as e:
        print(f"invalid configuration:\n{e}", file=sys.stderr)
        return 2
    outcome = RunPipeline(run_config).run()
    print(json.dumps({"status": outcome.status, "out": run_config.out_dir,
                      "summary": outcome.summary}, sort_keys=True, default=str))
    if outcome.status:
        logging.error(f"run failed; see {run_config.out_dir}/{config.output.failed_marker}")
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
