"""Stage functions behind the command-line verbs.

Output layout under ``out``::

    data/                      synthetic tables + manifest.json      (synth)
    prep/                      fitstate.json, train.csv, validation.csv,
                               split.json, summary.json              (prep)
    models/lineage.json        version history                       (train, retrain)
    models/v<N>/               <kind>.json, fitstate.json [, train.csv, validation.csv]
    report/                    metrics.csv, report.json, roc_<kind>.csv,
                               confusion_<kind>.json, stats/         (eval, stats)
    retrain/report_v<N>.json   before/after evaluation               (retrain)
    scores/                    per-claim score CSVs                  (score)

Every directory written gets a ``provenance.json`` naming, for each file, the
config hash, the seeds in force and the file's sha256.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import os
from typing import Optional

import numpy as np

from . import features as F
from .classifiers import MODEL_KINDS, MODEL_NAMES, dumps_model, fit_model, load_model
from .evaluation import describe, evaluate, round3
from .resample import ResamplePlan, resample
from .schema import INPATIENT, OUTPATIENT, parse_beneficiaries, parse_claims, parse_labels
from .synth import TABLE_FILES, SynthConfig, write_tables

ENV_PREFIX = "MEDFRAUD_"

DEFAULT_CONFIG = {
    "seed": 0,
    "strict": False,
    "out": "medfraud-run",
    "inputs": None,
    "synth": {},
    "split": {"fraction": 0.1, "seed": None, "stratified": True, "by_provider": False},
    "resample": {"method": "smote", "k_neighbors": 5, "target_ratio": 1.0, "seed": None},
    "models": list(MODEL_KINDS),
    "hyperparams": {},
    "features": {"include_physicians": False, "normalize": "all"},
}

FINANCIAL_COLUMNS = (
    "reimbursed_amount", "deductible_paid", "ip_annual_reimb", "ip_annual_deductible",
    "op_annual_reimb", "op_annual_deductible", "prov_mean_reimbursed", "prov_mean_deductible",
)

SUMMARY_COLUMNS = (
    "potential_fraud", "reimbursed_amount", "deductible_paid", "admitted", "duration_of_claim",
    "number_of_days_admitted", "renal_disease", "months_part_a", "months_part_b",
)
SUMMARY_LABELS = {
    "potential_fraud": "Potential Fraud",
    "reimbursed_amount": "Insurance Claim Amt Reimbursed",
    "deductible_paid": "Deductible Amt Paid",
    "admitted": "Admitted",
    "duration_of_claim": "Duration of Claim",
    "number_of_days_admitted": "Number of Days Admitted",
    "renal_disease": "Renal Disease Indicator",
    "months_part_a": "No. of Months Part A Cov",
    "months_part_b": "No. of Months Part B Cov",
}
SETTING_COLUMNS = ("reimbursed_amount", "deductible_paid", "duration_of_claim",
                   "number_of_days_admitted", "admit_diag_code")


class DependencyError(RuntimeError):
    """A stage's prerequisite artifact is missing."""

    def __init__(self, path: str, stage: str = ""):
        self.path = path
        hint = f" (run `{stage}` first)" if stage else ""
        super().__init__(f"missing required artifact {path}{hint}")


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _env_overrides(env) -> dict:
    over = {}
    if f"{ENV_PREFIX}OUT" in env:
        over["out"] = env[f"{ENV_PREFIX}OUT"]
    if f"{ENV_PREFIX}SEED" in env:
        over["seed"] = int(env[f"{ENV_PREFIX}SEED"])
    if f"{ENV_PREFIX}STRICT" in env:
        over["strict"] = env[f"{ENV_PREFIX}STRICT"].strip().lower() in ("1", "true", "yes", "on")
    return over


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None, env=None) -> dict:
    """Defaults < config file < ``MEDFRAUD_*`` environment < explicit overrides."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    env = os.environ if env is None else env
    path = path or env.get(f"{ENV_PREFIX}CONFIG")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = _merge(cfg, json.load(fh))
        except FileNotFoundError:
            raise DependencyError(path) from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    cfg = _merge(cfg, _env_overrides(env))
    cfg = _merge(cfg, overrides or {})
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    bad = [m for m in cfg["models"] if m not in MODEL_KINDS]
    if bad or not cfg["models"]:
        raise ConfigError(f"models must be a non-empty subset of {MODEL_KINDS}, got {cfg['models']}")
    frac = cfg["split"]["fraction"]
    if not 0 < frac < 1:
        raise ConfigError(f"split.fraction must be in (0, 1), got {frac}")
    try:
        plan(cfg)
        SynthConfig.from_dict({**cfg["synth"], "seed": seeds(cfg)["synth"]})
        for kind in cfg["models"]:
            from .classifiers import make_params
            make_params(kind, cfg["hyperparams"].get(kind))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    norm = cfg["features"].get("normalize", "all")
    if not (norm in ("all", "financial", "none") or isinstance(norm, list)):
        raise ConfigError("features.normalize must be 'all', 'financial', 'none' or a column list")


def seeds(cfg: dict) -> dict:
    base = int(cfg["seed"])
    pick = lambda v: base if v is None else int(v)  # noqa: E731
    return {
        "global": base,
        "split": pick(cfg["split"].get("seed")),
        "resample": pick(cfg["resample"].get("seed")),
        "synth": pick(cfg["synth"].get("seed")),
        "model": base,
    }


def plan(cfg: dict) -> ResamplePlan:
    r = cfg["resample"]
    return ResamplePlan(method=r["method"], k_neighbors=int(r["k_neighbors"]),
                        target_ratio=float(r["target_ratio"]), seed=seeds(cfg)["resample"])


def config_hash(cfg: dict) -> str:
    content = {k: v for k, v in cfg.items() if k != "out"}
    return hashlib.sha256(json.dumps(content, sort_keys=True).encode("utf-8")).hexdigest()[:16]


# --------------------------------------------------------------------------
# file helpers
# --------------------------------------------------------------------------

def _path(cfg, *parts) -> str:
    return os.path.join(cfg["out"], *parts)


def atomic_write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1)


def _require(path: str, stage: str = "") -> str:
    if not os.path.exists(path):
        raise DependencyError(path, stage)
    return path


def _record_provenance(cfg: dict, directory: str, files: list) -> None:
    prov_path = os.path.join(directory, "provenance.json")
    doc = {"config_hash": config_hash(cfg), "seeds": seeds(cfg), "files": {}}
    if os.path.exists(prov_path):
        with open(prov_path, encoding="utf-8") as fh:
            doc["files"] = json.load(fh).get("files", {})
    for f in files:
        with open(f, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        doc["files"][os.path.relpath(f, directory)] = {
            "config_hash": config_hash(cfg), "seeds": seeds(cfg), "sha256": digest}
    doc["files"] = dict(sorted(doc["files"].items()))
    atomic_write(prov_path, _dump(doc))


def _write_all(cfg: dict, directory: str, named: dict) -> list:
    paths = []
    for name, text in named.items():
        p = os.path.join(directory, name)
        atomic_write(p, text)
        paths.append(p)
    _record_provenance(cfg, directory, paths)
    return paths


# --------------------------------------------------------------------------
# synth
# --------------------------------------------------------------------------

def run_synth(cfg: dict) -> dict:
    sc = SynthConfig.from_dict({**cfg["synth"], "seed": seeds(cfg)["synth"]})
    directory = _path(cfg, "data")
    paths = write_tables(sc, directory)
    _record_provenance(cfg, directory, list(paths.values()))
    return paths


# --------------------------------------------------------------------------
# loading + joining
# --------------------------------------------------------------------------

def input_paths(cfg: dict) -> dict:
    if cfg.get("inputs"):
        paths = dict(cfg["inputs"])
        missing = {"beneficiary", INPATIENT, OUTPATIENT, "labels"} - set(paths)
        if missing:
            raise ConfigError(f"inputs must name all four tables; missing {sorted(missing)}")
        return {k: _require(paths[k]) for k in ("beneficiary", INPATIENT, OUTPATIENT, "labels")}
    return {k: _require(_path(cfg, "data", TABLE_FILES[k]), "synth")
            for k in ("beneficiary", INPATIENT, OUTPATIENT, "labels")}


def load_claims(cfg: dict):
    """Parse, join and encode-check the four tables; returns (claims, summary dict)."""
    paths = input_paths(cfg)
    strict = bool(cfg["strict"])
    benes = parse_beneficiaries(paths["beneficiary"], strict)
    inp = parse_claims(paths[INPATIENT], INPATIENT, strict)
    outp = parse_claims(paths[OUTPATIENT], OUTPATIENT, strict)
    labels = parse_labels(paths["labels"], strict)
    claims, join_summary = F.join_and_label(benes.records, inp.records, outp.records, labels.records, strict)
    claims, enc_errors = F.filter_encodable(claims, _encoding(cfg), strict)
    summary = {
        "parse": {p.summary.table: {k: v for k, v in p.summary.as_dict().items() if k != "duplicate_ids"}
                  | {"duplicate_claim_ids": len(p.summary.duplicate_ids)}
                  for p in (benes, inp, outp, labels)},
        "join": join_summary.as_dict(),
        "encoding_rejects": len(enc_errors),
        "rows": len(claims),
    }
    return claims, summary, (benes.records, labels.records)


def _encoding(cfg: dict) -> F.EncodingMaps:
    enc = cfg["features"].get("encoding")
    return F.EncodingMaps.from_dict(enc) if enc else F.EncodingMaps()


def _normalize_columns(cfg: dict):
    norm = cfg["features"].get("normalize", "all")
    if norm == "all":
        return None
    if norm == "financial":
        return FINANCIAL_COLUMNS
    if norm == "none":
        return ()
    return tuple(norm)


def _fit(cfg: dict, train_claims) -> F.FitState:
    return F.fit_state(
        train_claims,
        encoding=_encoding(cfg),
        normalize_columns=_normalize_columns(cfg),
        include_physicians=bool(cfg["features"].get("include_physicians", False)),
    )


def _dataset_csv(ds: F.LabeledDataset) -> str:
    buf = io.StringIO()
    ds.to_csv(buf)
    return buf.getvalue()


def _read_dataset(path: str, fingerprint: str) -> F.LabeledDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return F.LabeledDataset.from_csv(fh, fingerprint)


def _read_fitstate(path: str, stage: str = "prep") -> F.FitState:
    with open(_require(path, stage), encoding="utf-8") as fh:
        return F.FitState.from_json(fh.read())


# --------------------------------------------------------------------------
# prep
# --------------------------------------------------------------------------

def run_prep(cfg: dict) -> dict:
    claims, summary, _ = load_claims(cfg)
    s = cfg["split"]
    y = np.fromiter((uc.potential_fraud for uc in claims), dtype=np.int64, count=len(claims))
    groups = [uc.provider for uc in claims] if s.get("by_provider") else None
    train_idx, val_idx = F.split_indices(y, s["fraction"], seeds(cfg)["split"], s["stratified"], groups)
    state = _fit(cfg, [claims[i] for i in train_idx])
    train = F.build_dataset([claims[i] for i in train_idx], state)
    val = F.build_dataset([claims[i] for i in val_idx], state)
    split_doc = {
        "n_rows": len(claims),
        "train_idx": train_idx.tolist(),
        "validation_idx": val_idx.tolist(),
        "train_counts": train.class_counts(),
        "validation_counts": val.class_counts(),
        "fitstate_fingerprint": state.fingerprint,
    }
    summary["split"] = {"train_rows": len(train), "validation_rows": len(val),
                        "train_counts": train.class_counts(), "validation_counts": val.class_counts()}
    _write_all(cfg, _path(cfg, "prep"), {
        "fitstate.json": state.to_json(),
        "train.csv": _dataset_csv(train),
        "validation.csv": _dataset_csv(val),
        "split.json": _dump(split_doc),
        "summary.json": _dump(summary),
    })
    return summary


# --------------------------------------------------------------------------
# train
# --------------------------------------------------------------------------

def _lineage_path(cfg):
    return _path(cfg, "models", "lineage.json")


def read_lineage(cfg: dict) -> dict:
    with open(_require(_lineage_path(cfg), "train"), encoding="utf-8") as fh:
        return json.load(fh)


def _train_models(cfg: dict, train: F.LabeledDataset) -> dict:
    balanced = resample(train, plan(cfg))
    seed = seeds(cfg)["model"]
    return {kind: fit_model(kind, balanced, cfg["hyperparams"].get(kind), seed) for kind in cfg["models"]}


def _write_version(cfg, version: int, state: F.FitState, models: dict, extra: Optional[dict] = None):
    files = {"fitstate.json": state.to_json()}
    files.update({f"{kind}.json": dumps_model(m) for kind, m in models.items()})
    files.update(extra or {})
    _write_all(cfg, _path(cfg, "models", f"v{version}"), files)


def run_train(cfg: dict) -> dict:
    state = _read_fitstate(_path(cfg, "prep", "fitstate.json"))
    train = _read_dataset(_require(_path(cfg, "prep", "train.csv"), "prep"), state.fingerprint)
    models = _train_models(cfg, train)
    _write_version(cfg, 1, state, models)
    lineage = {"current": 1, "versions": [{
        "version": 1, "parent": None, "fitstate_fingerprint": state.fingerprint,
        "train_rows": len(train), "new_claims": 0, "sources": [], "models": sorted(models),
    }]}
    _write_all(cfg, _path(cfg, "models"), {"lineage.json": _dump(lineage)})
    return lineage


# --------------------------------------------------------------------------
# eval
# --------------------------------------------------------------------------

def _split_doc(cfg) -> dict:
    with open(_require(_path(cfg, "prep", "split.json"), "prep"), encoding="utf-8") as fh:
        return json.load(fh)


def _version_artifacts(cfg: dict, version: int):
    vdir = _path(cfg, "models", f"v{version}")
    state = _read_fitstate(os.path.join(vdir, "fitstate.json"), "train")
    if os.path.exists(os.path.join(vdir, "train.csv")):
        base = vdir
    else:
        base = _path(cfg, "prep")
    train = _read_dataset(_require(os.path.join(base, "train.csv"), "prep"), state.fingerprint)
    val = _read_dataset(_require(os.path.join(base, "validation.csv"), "prep"), state.fingerprint)
    lineage = read_lineage(cfg)
    listed = next(v["models"] for v in lineage["versions"] if v["version"] == version)
    kinds = [k for k in MODEL_KINDS if k in listed]
    models = {k: load_model(_require(os.path.join(vdir, f"{k}.json"), "train"), state.fingerprint)
              for k in kinds}
    return state, train, val, models


def _report_metadata(cfg: dict, train, val, version: int, state) -> dict:
    return {
        "config_hash": config_hash(cfg),
        "seeds": seeds(cfg),
        "model_version": version,
        "fitstate_fingerprint": state.fingerprint,
        "resample_plan": plan(cfg).as_dict(),
        "hyperparams": {k: cfg["hyperparams"].get(k, {}) for k in cfg["models"]},
        "split": {"fraction": cfg["split"]["fraction"], "stratified": cfg["split"]["stratified"],
                  "by_provider": cfg["split"]["by_provider"], "train_rows": len(train),
                  "validation_rows": len(val), "train_counts": train.class_counts(),
                  "validation_counts": val.class_counts()},
        "train_metrics_on": "un-resampled training split",
    }


def _evaluate_version(cfg: dict, version: int):
    state, train, val, models = _version_artifacts(cfg, version)
    expected = {int(k): v for k, v in _split_doc(cfg)["validation_counts"].items()}
    return evaluate(models, train, val, names=MODEL_NAMES, expected_validation_counts=expected,
                    metadata=_report_metadata(cfg, train, val, version, state))


def run_eval(cfg: dict):
    version = read_lineage(cfg)["current"]
    report = _evaluate_version(cfg, version)
    files = {"report.json": report.to_json(), "metrics.csv": report.metrics_csv()}
    for kind, r in report.results.items():
        files[f"roc_{kind}.csv"] = r.roc.to_csv()
        files[f"confusion_{kind}.json"] = _dump({
            "model": r.name, "split": "validation", **r.validation.confusion.as_dict(),
            "metrics": r.validation.metrics.as_dict(), "auc": r.roc.auc,
            "config_hash": config_hash(cfg), "seeds": seeds(cfg)})
    _write_all(cfg, _path(cfg, "report"), files)
    return report


# --------------------------------------------------------------------------
# stats
# --------------------------------------------------------------------------

def claim_columns(claims, encoding: F.EncodingMaps = F.EncodingMaps()) -> dict:
    """Summary-statistics variables per joined claim, before normalization (missing -> 0)."""
    base = F.impute(F.raw_columns(claims, encoding),
                    {"deductible_paid": F.ZERO, "number_of_days_admitted": F.ZERO})
    cols = {k: base[k] for k in SUMMARY_COLUMNS if k in base}
    cols["potential_fraud"] = np.fromiter((uc.potential_fraud for uc in claims), dtype=np.float64,
                                          count=len(claims))
    admit = F.frequency_rank(uc.claim.admit_diagnosis_code for uc in claims)
    cols["admit_diag_code"] = np.array([admit.get(uc.claim.admit_diagnosis_code, 0) for uc in claims],
                                       dtype=np.float64)
    return cols


def summary_csv(cols: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Variable", "Count", "Mean", "Std"])
    for name in SUMMARY_COLUMNS:
        st = describe(cols[name])
        w.writerow([SUMMARY_LABELS[name], st.count, f"{round3(st.mean):.3f}",
                    "" if st.std is None else f"{round3(st.std):.3f}"])
    return buf.getvalue()


def run_stats(cfg: dict) -> dict:
    claims, _, _ = load_claims(cfg)
    cols = claim_columns(claims, _encoding(cfg))
    tag = {"config_hash": config_hash(cfg), "seeds": seeds(cfg)}
    files = {"summary_stats.csv": summary_csv(cols)}
    out = {}
    for name in SUMMARY_COLUMNS:
        st = describe(cols[name])
        out[name] = st
        files[f"{name}.json"] = _dump({"column": name, "scope": "all", **st.as_dict(), **tag})
    admitted = cols["admitted"] == 1
    for scope, mask in ((INPATIENT, admitted), (OUTPATIENT, ~admitted)):
        if not mask.any():
            continue
        for name in SETTING_COLUMNS:
            if scope == OUTPATIENT and name == "number_of_days_admitted":
                continue
            st = describe(cols[name][mask])
            files[f"{scope}_{name}.json"] = _dump({"column": name, "scope": scope, **st.as_dict(), **tag})
    _write_all(cfg, _path(cfg, "report", "stats"), files)
    return out


# --------------------------------------------------------------------------
# score
# --------------------------------------------------------------------------

def run_score(cfg: dict, model_path: str, inpatient: Optional[str] = None, outpatient: Optional[str] = None,
              beneficiary: Optional[str] = None, fitstate: Optional[str] = None,
              output: Optional[str] = None) -> str:
    if not inpatient and not outpatient:
        raise ConfigError("score needs at least one claims file (--inpatient/--outpatient)")
    fitstate = fitstate or os.path.join(os.path.dirname(os.path.abspath(model_path)), "fitstate.json")
    state = _read_fitstate(fitstate, "train")
    model = load_model(_require(model_path, "train"), state.fingerprint)
    strict = bool(cfg["strict"])
    beneficiary = beneficiary or input_paths(cfg)["beneficiary"]
    benes = parse_beneficiaries(_require(beneficiary), strict).records
    inp = parse_claims(_require(inpatient), INPATIENT, strict).records if inpatient else []
    outp = parse_claims(_require(outpatient), OUTPATIENT, strict).records if outpatient else []
    claims, _ = F.join_and_label(benes, inp, outp, None, strict)
    claims, _ = F.filter_encodable(claims, state.encoding, strict)
    if not claims:
        raise ValueError("no scorable claims after joining with beneficiaries")
    ds = F.build_dataset(claims, state)
    scores = model.score(ds)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["claim_id", "provider", "score", "predicted"])
    for cid, prov, s in zip(ds.claim_ids, ds.providers, scores):
        w.writerow([cid, prov, repr(float(s)), int(s >= 0.5)])
    if output is None:
        stem = os.path.splitext(os.path.basename(model_path))[0]
        output = _path(cfg, "scores", f"scores_{stem}.csv")
    atomic_write(output, buf.getvalue())
    _record_provenance(cfg, os.path.dirname(os.path.abspath(output)), [output])
    return output


# --------------------------------------------------------------------------
# retrain
# --------------------------------------------------------------------------

def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def run_retrain(cfg: dict, new_inpatient: Optional[str] = None, new_outpatient: Optional[str] = None,
                new_beneficiary: Optional[str] = None, new_labels: Optional[str] = None) -> dict:
    """Full refit on prior training claims plus new claims; validation rows stay held out."""
    lineage = read_lineage(cfg)
    prev = lineage["current"]
    split_doc = _split_doc(cfg)
    claims, _, (benes, labels) = load_claims(cfg)
    if len(claims) != split_doc["n_rows"]:
        raise ValueError(f"inputs now join to {len(claims)} rows; split.json was made for {split_doc['n_rows']}")
    strict = bool(cfg["strict"])
    sources = []
    if new_beneficiary:
        benes = benes + parse_beneficiaries(_require(new_beneficiary), strict).records
        sources.append({"table": "beneficiary", "file": os.path.basename(new_beneficiary),
                        "sha256": _digest(new_beneficiary)})
    if new_labels:
        labels = labels + parse_labels(_require(new_labels), strict).records
        sources.append({"table": "labels", "file": os.path.basename(new_labels), "sha256": _digest(new_labels)})
    inp = outp = []
    if new_inpatient:
        inp = parse_claims(_require(new_inpatient), INPATIENT, strict).records
        sources.append({"table": INPATIENT, "file": os.path.basename(new_inpatient),
                        "sha256": _digest(new_inpatient)})
    if new_outpatient:
        outp = parse_claims(_require(new_outpatient), OUTPATIENT, strict).records
        sources.append({"table": OUTPATIENT, "file": os.path.basename(new_outpatient),
                        "sha256": _digest(new_outpatient)})
    new_claims, _ = F.join_and_label(benes, inp, outp, labels, strict)
    new_claims, _ = F.filter_encodable(new_claims, _encoding(cfg), strict)

    train_claims = [claims[i] for i in split_doc["train_idx"]] + new_claims
    val_claims = [claims[i] for i in split_doc["validation_idx"]]
    state = _fit(cfg, train_claims)
    train = F.build_dataset(train_claims, state)
    val = F.build_dataset(val_claims, state)
    models = _train_models(cfg, train)
    version = prev + 1
    _write_version(cfg, version, state, models, {
        "train.csv": _dataset_csv(train), "validation.csv": _dataset_csv(val)})
    lineage["versions"].append({
        "version": version, "parent": prev, "fitstate_fingerprint": state.fingerprint,
        "train_rows": len(train), "new_claims": len(new_claims), "sources": sources,
        "models": sorted(models),
    })
    lineage["current"] = version
    _write_all(cfg, _path(cfg, "models"), {"lineage.json": _dump(lineage)})

    before = _evaluate_version(cfg, prev)
    after = _evaluate_version(cfg, version)
    doc = {
        "previous_version": prev, "version": version, "new_claims": len(new_claims),
        "before": json.loads(before.to_json()), "after": json.loads(after.to_json()),
        "config_hash": config_hash(cfg), "seeds": seeds(cfg),
    }
    _write_all(cfg, _path(cfg, "retrain"), {f"report_v{version}.json": _dump(doc)})
    return doc
