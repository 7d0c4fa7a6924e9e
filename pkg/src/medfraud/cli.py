"""``medfraud`` command line.

Every flag overrides a key of the JSON config; ``MEDFRAUD_OUT``,
``MEDFRAUD_SEED``, ``MEDFRAUD_STRICT`` and ``MEDFRAUD_CONFIG`` sit between the
config file and explicit flags. Exit codes: 0 ok, 2 usage, 3 data, 4 missing
dependency. Failures print one JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import pipeline
from .errors import FingerprintMismatchError, ModelFileError, UsageError
from .features import OrphanClaimError
from .resample import ResampleError
from .schema import RowError, SchemaError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEPENDENCY = 0, 2, 3, 4

VERBS = ("synth", "prep", "train", "eval", "stats", "score", "retrain")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for split, resampling, synthesis and models")
    common.add_argument("--strict", action="store_true", default=None, help="abort on the first bad row")
    common.add_argument("--resample", choices=["smote", "smote-enn", "ros", "rus", "none"])
    common.add_argument("--k", type=int, help="neighbours used by SMOTE/ENN")
    common.add_argument("--ratio", type=float, help="target minority/majority ratio")
    common.add_argument("--split-by-provider", action="store_true", default=None,
                        help="provider-disjoint validation split")
    common.add_argument("--models", help="comma-separated subset of rf,knn,lda,dt,ada")

    p = argparse.ArgumentParser(prog="medfraud", description="Medicare claims fraud detection pipeline.")
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("synth", parents=[common], help="generate synthetic claim tables")
    sub.add_parser("prep", parents=[common], help="parse, join, split and fit transforms")
    sub.add_parser("train", parents=[common], help="resample and fit the configured models")
    sub.add_parser("eval", parents=[common], help="metrics, ROC and confusion matrices")
    sub.add_parser("stats", parents=[common], help="descriptive statistics of joined claims")
    s = sub.add_parser("score", parents=[common], help="score claims with a saved model")
    s.add_argument("--model", required=True, help="model JSON file")
    s.add_argument("--fitstate", help="FitState JSON (default: next to the model)")
    s.add_argument("--beneficiary", help="beneficiary CSV (default: the configured one)")
    s.add_argument("--inpatient")
    s.add_argument("--outpatient")
    s.add_argument("--output", help="scores CSV path")
    r = sub.add_parser("retrain", parents=[common], help="refit on training claims plus new claims")
    r.add_argument("--new-inpatient")
    r.add_argument("--new-outpatient")
    r.add_argument("--new-beneficiary")
    r.add_argument("--new-labels")
    return p


def _overrides(args) -> dict:
    over: dict = {}
    if args.out is not None:
        over["out"] = args.out
    if args.seed is not None:
        over["seed"] = args.seed
    if args.strict:
        over["strict"] = True
    res = {}
    if args.resample is not None:
        res["method"] = args.resample
    if args.k is not None:
        res["k_neighbors"] = args.k
    if args.ratio is not None:
        res["target_ratio"] = args.ratio
    if res:
        over["resample"] = res
    if args.split_by_provider:
        over["split"] = {"by_provider": True}
    if args.models:
        over["models"] = [m.strip() for m in args.models.split(",") if m.strip()]
    return over


def _classify(exc: BaseException) -> int:
    if isinstance(exc, pipeline.DependencyError):
        return EXIT_DEPENDENCY
    if isinstance(exc, (pipeline.ConfigError, UsageError)):
        return EXIT_USAGE
    if isinstance(exc, (SchemaError, RowError, OrphanClaimError, ResampleError, ModelFileError,
                        FingerprintMismatchError, ValueError, AssertionError, OSError)):
        return EXIT_DATA
    return 1


def _run(args, cfg: dict) -> dict:
    if args.verb == "synth":
        paths = pipeline.run_synth(cfg)
        return {"written": sorted(paths.values())}
    if args.verb == "prep":
        return pipeline.run_prep(cfg)
    if args.verb == "train":
        return pipeline.run_train(cfg)
    if args.verb == "eval":
        report = pipeline.run_eval(cfg)
        return {k: {"validation": r.validation.metrics.as_dict(), "auc": r.roc.auc}
                for k, r in report.results.items()}
    if args.verb == "stats":
        return {k: {"count": s.count, "mean": s.mean, "std": s.std} for k, s in pipeline.run_stats(cfg).items()}
    if args.verb == "score":
        return {"written": pipeline.run_score(cfg, args.model, args.inpatient, args.outpatient,
                                              args.beneficiary, args.fitstate, args.output)}
    doc = pipeline.run_retrain(cfg, args.new_inpatient, args.new_outpatient,
                               args.new_beneficiary, args.new_labels)
    return {"version": doc["version"], "new_claims": doc["new_claims"]}


def _one_line_warning(message, category, filename, lineno, line=None):
    return f"{category.__name__}: {message}\n"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)  # argparse exits with 2 on usage errors
    warnings.formatwarning = _one_line_warning
    try:
        cfg = pipeline.load_config(args.config, _overrides(args))
        summary = _run(args, cfg)
    except Exception as exc:  # noqa: BLE001 - mapped to an exit code below
        code = _classify(exc)
        if code == 1:
            raise
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, "verb": args.verb}
        if isinstance(exc, pipeline.DependencyError):
            record["missing"] = exc.path
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return code
    print(json.dumps(summary, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
