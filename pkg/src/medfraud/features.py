"""Join, encode and featurize claims into a numeric matrix.

Every statistic that shapes the matrix (imputation means, code ranks, one-hot
vocabulary, provider aggregates, z-score parameters) is learned from training
rows only and frozen in a :class:`FitState`.

Column order of the produced matrix::

    BASE_COLUMNS
    race_<code> ...                    one per training race value
    state_idx, county_idx              frequency-rank indices
    [attending_idx, operating_idx, other_physician_idx]   only if include_physicians
    diag_code_1..10, proc_code_1..6, admit_diag_code
    PROVIDER_COLUMNS
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataWarning, UsageError
from .schema import (
    CHRONIC_FIELDS, INPATIENT, BeneficiaryRecord, ClaimRecord, ProviderLabel, RowError,
)

FITSTATE_FORMAT = "medfraud.fitstate"
FITSTATE_VERSION = 1

ZERO = "zero"
TRAIN_MEAN = "train_mean"

BASE_COLUMNS = (
    "reimbursed_amount", "deductible_paid", "admitted", "duration_of_claim",
    "number_of_days_admitted", "age", "deceased", "gender", "renal_disease",
    "months_part_a", "months_part_b",
    *(f"chronic_{c}" for c in CHRONIC_FIELDS),
    "ip_annual_reimb", "ip_annual_deductible", "op_annual_reimb", "op_annual_deductible",
)
CODE_COLUMNS = (
    *(f"diag_code_{i}" for i in range(1, 11)),
    *(f"proc_code_{i}" for i in range(1, 7)),
    "admit_diag_code",
)
PHYSICIAN_COLUMNS = ("attending_idx", "operating_idx", "other_physician_idx")
PROVIDER_COLUMNS = (
    "prov_mean_reimbursed", "prov_mean_deductible", "prov_mean_duration",
    "prov_claim_count", "prov_admitted_frac",
)

DEFAULT_IMPUTE_RULES = {
    "deductible_paid": ZERO,
    "number_of_days_admitted": ZERO,
    "reimbursed_amount": TRAIN_MEAN,
    "ip_annual_reimb": TRAIN_MEAN,
    "ip_annual_deductible": TRAIN_MEAN,
    "op_annual_reimb": TRAIN_MEAN,
    "op_annual_deductible": TRAIN_MEAN,
}


# --------------------------------------------------------------------------
# joined rows
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class UnifiedClaim:
    claim: ClaimRecord
    beneficiary: BeneficiaryRecord
    potential_fraud: bool
    admitted: int
    duration_of_claim: int
    number_of_days_admitted: int

    @property
    def claim_id(self) -> str:
        return self.claim.claim_id

    @property
    def provider(self) -> str:
        return self.claim.provider


@dataclass
class JoinSummary:
    rows_in: int = 0
    rows_out: int = 0
    orphans: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"rows_in": self.rows_in, "rows_out": self.rows_out,
                "orphans": len(self.orphans), "orphan_examples": self.orphans[:20]}


class OrphanClaimError(ValueError):
    pass


def derive(claim: ClaimRecord, bene: BeneficiaryRecord, fraud: bool) -> UnifiedClaim:
    admitted = 1 if claim.setting == INPATIENT else 0
    days = 0
    if admitted and claim.admission_date is not None and claim.discharge_date is not None:
        days = (claim.discharge_date - claim.admission_date).days
    return UnifiedClaim(
        claim=claim,
        beneficiary=bene,
        potential_fraud=fraud,
        admitted=admitted,
        duration_of_claim=(claim.claim_end - claim.claim_start).days,
        number_of_days_admitted=days,
    )


def join_and_label(
    beneficiaries: Iterable[BeneficiaryRecord],
    inpatient: Iterable[ClaimRecord],
    outpatient: Iterable[ClaimRecord],
    labels: Optional[Iterable[ProviderLabel]],
    strict: bool = False,
):
    """Attach beneficiary details and the provider's fraud flag to every claim.

    Inpatient rows come first, then outpatient, each in source order. Claims
    whose beneficiary or provider cannot be resolved are dropped and counted.
    ``labels=None`` joins unlabeled claims (scoring); every row then carries
    ``potential_fraud=False``.
    """
    bene_by_id = {b.bene_id: b for b in beneficiaries}
    label_by_provider = None if labels is None else {l.provider: l.potential_fraud for l in labels}
    summary = JoinSummary()
    out = []
    for claim in (*inpatient, *outpatient):
        summary.rows_in += 1
        bene = bene_by_id.get(claim.bene_id)
        reason = None
        if bene is None:
            reason = f"unknown beneficiary {claim.bene_id!r}"
        elif label_by_provider is not None and claim.provider not in label_by_provider:
            reason = f"unlabeled provider {claim.provider!r}"
        if reason is not None:
            if strict:
                raise OrphanClaimError(f"claim {claim.claim_id}: {reason}")
            summary.orphans.append(f"{claim.claim_id}: {reason}")
            continue
        fraud = False if label_by_provider is None else label_by_provider[claim.provider]
        out.append(derive(claim, bene, fraud))
        summary.rows_out += 1
    return out, summary


# --------------------------------------------------------------------------
# binary flag encoding
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EncodingMaps:
    chronic: tuple = (("1", 1), ("2", 0))
    renal: tuple = (("Y", 1), ("0", 0))
    gender: tuple = (("1", 0), ("2", 1))

    def as_dict(self) -> dict:
        return {"chronic": dict(self.chronic), "renal": dict(self.renal), "gender": dict(self.gender)}

    @classmethod
    def from_dict(cls, d: dict) -> "EncodingMaps":
        return cls(**{k: tuple(sorted(v.items())) for k, v in d.items()})


def _lookup(table: tuple, token: str, name: str, row: int) -> int:
    for key, value in table:
        if key == token:
            return value
    raise RowError(row, name, f"unrecognised token {token!r}")


def encode_binary_flags(uc: UnifiedClaim, maps: EncodingMaps = EncodingMaps(), row: int = -1) -> dict:
    """Map the raw gender, renal and chronic-condition tokens to 0/1."""
    b = uc.beneficiary
    out = {
        "gender": _lookup(maps.gender, b.gender, "Gender", row),
        "renal_disease": _lookup(maps.renal, b.renal_disease_indicator, "RenalDiseaseIndicator", row),
    }
    for name, token in zip(CHRONIC_FIELDS, b.chronic_flags):
        out[f"chronic_{name}"] = _lookup(maps.chronic, token, f"chronic_{name}", row)
    return out


def filter_encodable(claims: Sequence[UnifiedClaim], maps: EncodingMaps = EncodingMaps(), strict: bool = False):
    """Drop claims whose tokens fall outside ``maps``; returns (kept, errors)."""
    kept, errors = [], []
    for i, uc in enumerate(claims):
        try:
            encode_binary_flags(uc, maps, row=i)
        except RowError as exc:
            if strict:
                raise
            errors.append(str(exc))
            continue
        kept.append(uc)
    return kept, errors


# --------------------------------------------------------------------------
# raw numeric columns + imputation
# --------------------------------------------------------------------------

def _f(v) -> float:
    return float("nan") if v is None else float(v)


def raw_columns(claims: Sequence[UnifiedClaim], maps: EncodingMaps = EncodingMaps()) -> dict:
    """Base numeric columns, with NaN where the source cell was missing."""
    cols = {name: np.empty(len(claims)) for name in BASE_COLUMNS}
    for i, uc in enumerate(claims):
        c, b = uc.claim, uc.beneficiary
        cols["reimbursed_amount"][i] = c.reimbursed_amount
        cols["deductible_paid"][i] = _f(c.deductible_paid)
        cols["admitted"][i] = uc.admitted
        cols["duration_of_claim"][i] = uc.duration_of_claim
        cols["number_of_days_admitted"][i] = uc.number_of_days_admitted
        cols["age"][i] = (c.claim_start - b.dob).days / 365.25
        cols["deceased"][i] = 0.0 if b.dod is None else 1.0
        cols["months_part_a"][i] = b.months_part_a
        cols["months_part_b"][i] = b.months_part_b
        cols["ip_annual_reimb"][i] = _f(b.ip_annual_reimb)
        cols["ip_annual_deductible"][i] = _f(b.ip_annual_deductible)
        cols["op_annual_reimb"][i] = _f(b.op_annual_reimb)
        cols["op_annual_deductible"][i] = _f(b.op_annual_deductible)
        for name, v in encode_binary_flags(uc, maps, row=i).items():
            cols[name][i] = v
    return cols


def fit_impute(columns: dict, rules: dict) -> dict:
    """Training means for every TRAIN_MEAN column (0.0 if entirely missing)."""
    means = {}
    for name, policy in sorted(rules.items()):
        if policy != TRAIN_MEAN:
            continue
        vals = columns[name]
        present = vals[~np.isnan(vals)]
        if present.size == 0:
            warnings.warn(f"column {name!r} is entirely missing; imputing 0.0", DataWarning, stacklevel=2)
            means[name] = 0.0
        else:
            means[name] = float(present.mean())
    return means


def impute(columns: dict, rules: dict, means: Optional[dict] = None) -> dict:
    """Fill missing cells per rule: ZERO -> 0.0, TRAIN_MEAN -> fitted training mean."""
    out = dict(columns)
    for name, policy in rules.items():
        if name not in columns:
            continue
        vals = columns[name]
        missing = np.isnan(vals)
        if policy == ZERO:
            fill = 0.0
        elif policy == TRAIN_MEAN:
            if means is None or name not in means:
                raise UsageError(f"TRAIN_MEAN imputation for {name!r} requested before fitting")
            fill = means[name]
        else:
            raise ValueError(f"unknown imputation policy {policy!r}")
        if missing.any():
            vals = vals.copy()
            vals[missing] = fill
        out[name] = vals
    return out


# --------------------------------------------------------------------------
# frequency-rank indices (diagnosis / procedure codes, state, county)
# --------------------------------------------------------------------------

def frequency_rank(values: Iterable[Optional[str]]) -> dict:
    """Map each non-missing value to 1..K by descending count, ties lexicographic."""
    counts = Counter(v for v in values if v is not None and v != "")
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {code: i for i, (code, _) in enumerate(ordered, start=1)}


@dataclass
class CodeIndexMap:
    diagnosis: dict
    procedure: dict
    admit: dict

    def as_dict(self) -> dict:
        return {"diagnosis": self.diagnosis, "procedure": self.procedure, "admit": self.admit}


def fit_code_index(claims: Sequence[UnifiedClaim]) -> CodeIndexMap:
    return CodeIndexMap(
        diagnosis=frequency_rank(code for uc in claims for code in uc.claim.diagnosis_codes),
        procedure=frequency_rank(code for uc in claims for code in uc.claim.procedure_codes),
        admit=frequency_rank(uc.claim.admit_diagnosis_code for uc in claims),
    )


def apply_code_index(cmap: CodeIndexMap, uc: UnifiedClaim) -> tuple:
    """17 integer features: 10 diagnosis slots, 6 procedure slots, admit code."""
    c = uc.claim
    return (
        *(cmap.diagnosis.get(code, 0) for code in c.diagnosis_codes),
        *(cmap.procedure.get(code, 0) for code in c.procedure_codes),
        cmap.admit.get(c.admit_diagnosis_code, 0),
    )


# --------------------------------------------------------------------------
# one-hot race
# --------------------------------------------------------------------------

def _natural_key(v: str):
    return (0, int(v), v) if v.isdigit() else (1, 0, v)


def fit_race_vocabulary(claims: Sequence[UnifiedClaim]) -> list:
    return sorted({uc.beneficiary.race for uc in claims}, key=_natural_key)


def one_hot(vocabulary: Sequence[str], value: str) -> tuple:
    """Indicator vector over ``vocabulary``; an unseen value maps to all zeros."""
    return tuple(1 if v == value else 0 for v in vocabulary)


# --------------------------------------------------------------------------
# provider aggregates
# --------------------------------------------------------------------------

def provider_averages(providers: Sequence[str], reimbursed, deductible, duration, admitted):
    """Per-provider means over training rows.

    Returns ``(table, fallback)`` where ``table[provider]`` is
    ``[mean_reimbursed, mean_deductible, mean_duration, claim_count, admitted_frac]``
    and ``fallback`` holds the global training means used for unseen providers
    (the count entry is the mean claim count per provider).
    """
    keys, inverse = np.unique(np.asarray(providers, dtype=object), return_inverse=True)
    counts = np.bincount(inverse, minlength=len(keys)).astype(np.float64)
    stats = np.column_stack([
        np.bincount(inverse, weights=np.asarray(v, dtype=np.float64), minlength=len(keys)) / counts
        for v in (reimbursed, deductible, duration)
    ] + [counts, np.bincount(inverse, weights=np.asarray(admitted, dtype=np.float64),
                             minlength=len(keys)) / counts])
    table = {str(k): [float(x) for x in row] for k, row in zip(keys, stats)}
    fallback = [
        float(np.mean(reimbursed)), float(np.mean(deductible)), float(np.mean(duration)),
        float(counts.mean()), float(np.mean(admitted)),
    ]
    return table, fallback


# --------------------------------------------------------------------------
# fitted state
# --------------------------------------------------------------------------

@dataclass
class FitState:
    columns: list
    impute_rules: dict
    impute_means: dict
    encoding: EncodingMaps
    race_vocab: list
    state_index: dict
    county_index: dict
    code_index: CodeIndexMap
    provider_table: dict
    provider_fallback: list
    norm_mean: list = field(default_factory=list)
    norm_std: list = field(default_factory=list)
    normalized: list = field(default_factory=list)
    include_physicians: bool = False
    physician_index: dict = field(default_factory=dict)

    def payload(self) -> dict:
        return {
            "columns": list(self.columns),
            "impute_rules": dict(sorted(self.impute_rules.items())),
            "impute_means": dict(sorted(self.impute_means.items())),
            "encoding": self.encoding.as_dict(),
            "race_vocab": list(self.race_vocab),
            "state_index": self.state_index,
            "county_index": self.county_index,
            "code_index": self.code_index.as_dict(),
            "provider_table": self.provider_table,
            "provider_fallback": self.provider_fallback,
            "norm_mean": self.norm_mean,
            "norm_std": self.norm_std,
            "normalized": self.normalized,
            "include_physicians": self.include_physicians,
            "physician_index": self.physician_index,
        }

    @property
    def fingerprint(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_json(self) -> str:
        doc = {"format": FITSTATE_FORMAT, "version": FITSTATE_VERSION,
               "fingerprint": self.fingerprint, "state": self.payload()}
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "FitState":
        doc = json.loads(text)
        if doc.get("format") != FITSTATE_FORMAT:
            raise ValueError("not a FitState document")
        if doc.get("version") != FITSTATE_VERSION:
            raise ValueError(f"unsupported FitState version {doc.get('version')!r}")
        s = doc["state"]
        state = cls(
            columns=s["columns"], impute_rules=s["impute_rules"], impute_means=s["impute_means"],
            encoding=EncodingMaps.from_dict(s["encoding"]), race_vocab=s["race_vocab"],
            state_index=s["state_index"], county_index=s["county_index"],
            code_index=CodeIndexMap(**s["code_index"]), provider_table=s["provider_table"],
            provider_fallback=s["provider_fallback"], norm_mean=s["norm_mean"],
            norm_std=s["norm_std"], normalized=s["normalized"],
            include_physicians=s["include_physicians"], physician_index=s["physician_index"],
        )
        if state.fingerprint != doc.get("fingerprint"):
            raise ValueError("FitState fingerprint does not match its content")
        return state


def fit_normalizer(matrix: np.ndarray, columns: Sequence[str], designated: Optional[Iterable[str]] = None):
    """Population mean/std per column; constant designated columns pass through.

    Returns ``(mean, std, normalized_flags)`` as lists aligned with ``columns``.
    """
    designated = set(columns) if designated is None else set(designated)
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    flags = []
    for j, name in enumerate(columns):
        use = name in designated
        if use and not std[j] > 0:
            warnings.warn(f"column {name!r} is constant on training rows; left unnormalized",
                          DataWarning, stacklevel=2)
            use = False
        flags.append(use)
    return [float(m) for m in mean], [float(s) for s in std], flags


def normalize(state: FitState, matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=np.float64, copy=True)
    flags = np.asarray(state.normalized, dtype=bool)
    if flags.any():
        mean = np.asarray(state.norm_mean)[flags]
        std = np.asarray(state.norm_std)[flags]
        out[:, flags] = (out[:, flags] - mean) / std
    return out


def _assemble(claims: Sequence[UnifiedClaim], state: FitState, base: dict) -> np.ndarray:
    n = len(claims)
    blocks = [np.column_stack([base[c] for c in BASE_COLUMNS]) if n else np.empty((0, len(BASE_COLUMNS)))]
    race = np.zeros((n, len(state.race_vocab)))
    race_pos = {v: j for j, v in enumerate(state.race_vocab)}
    cat = np.zeros((n, 2 + (3 if state.include_physicians else 0)))
    codes = np.zeros((n, len(CODE_COLUMNS)))
    prov = np.empty((n, len(PROVIDER_COLUMNS)))
    for i, uc in enumerate(claims):
        b, c = uc.beneficiary, uc.claim
        j = race_pos.get(b.race)
        if j is not None:
            race[i, j] = 1.0
        cat[i, 0] = state.state_index.get(b.state, 0)
        cat[i, 1] = state.county_index.get(b.county, 0)
        if state.include_physicians:
            for k, p in enumerate((c.attending_physician, c.operating_physician, c.other_physician)):
                cat[i, 2 + k] = state.physician_index.get(p, 0) if p is not None else 0
        codes[i] = apply_code_index(state.code_index, uc)
        prov[i] = state.provider_table.get(c.provider, state.provider_fallback)
    blocks += [race, cat, codes, prov]
    return np.hstack(blocks)


def _column_names(race_vocab, include_physicians) -> list:
    cols = list(BASE_COLUMNS) + [f"race_{v}" for v in race_vocab] + ["state_idx", "county_idx"]
    if include_physicians:
        cols += list(PHYSICIAN_COLUMNS)
    return cols + list(CODE_COLUMNS) + list(PROVIDER_COLUMNS)


def fit_state(
    train: Sequence[UnifiedClaim],
    impute_rules: Optional[dict] = None,
    encoding: EncodingMaps = EncodingMaps(),
    normalize_columns: Optional[Iterable[str]] = None,
    include_physicians: bool = False,
) -> FitState:
    """Learn every transform from training claims only."""
    if not train:
        raise ValueError("cannot fit transforms on an empty training set")
    rules = dict(DEFAULT_IMPUTE_RULES if impute_rules is None else impute_rules)
    base = raw_columns(train, encoding)
    means = fit_impute(base, rules)
    base = impute(base, rules, means)
    table, fallback = provider_averages(
        [uc.provider for uc in train], base["reimbursed_amount"], base["deductible_paid"],
        base["duration_of_claim"], base["admitted"])
    physicians = {}
    if include_physicians:
        physicians = frequency_rank(
            p for uc in train for p in (uc.claim.attending_physician, uc.claim.operating_physician,
                                         uc.claim.other_physician))
    race_vocab = fit_race_vocabulary(train)
    state = FitState(
        columns=_column_names(race_vocab, include_physicians),
        impute_rules=rules,
        impute_means=means,
        encoding=encoding,
        race_vocab=race_vocab,
        state_index=frequency_rank(uc.beneficiary.state for uc in train),
        county_index=frequency_rank(uc.beneficiary.county for uc in train),
        code_index=fit_code_index(train),
        provider_table=table,
        provider_fallback=fallback,
        include_physicians=include_physicians,
        physician_index=physicians,
    )
    raw = _assemble(train, state, base)
    state.norm_mean, state.norm_std, state.normalized = fit_normalizer(raw, state.columns, normalize_columns)
    return state


# --------------------------------------------------------------------------
# labeled matrix
# --------------------------------------------------------------------------

@dataclass
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    columns: tuple
    claim_ids: np.ndarray
    providers: np.ndarray
    fingerprint: Optional[str] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        self.columns = tuple(self.columns)
        self.claim_ids = np.asarray(self.claim_ids, dtype=object)
        self.providers = np.asarray(self.providers, dtype=object)
        n = self.X.shape[0]
        if self.X.ndim != 2 or self.X.shape[1] != len(self.columns):
            raise ValueError(f"matrix shape {self.X.shape} does not match {len(self.columns)} columns")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("column names must be unique")
        if not (len(self.y) == len(self.claim_ids) == len(self.providers) == n):
            raise ValueError("labels and row ids must match the row count")

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx)
        return LabeledDataset(self.X[idx], self.y[idx], self.columns, self.claim_ids[idx],
                              self.providers[idx], self.fingerprint)

    def class_counts(self) -> dict:
        return {0: int((self.y == 0).sum()), 1: int((self.y == 1).sum())}

    def to_csv(self, sink) -> None:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow([*self.columns, "label", "claim_id", "provider"])
        for row, label, cid, prov in zip(self.X.tolist(), self.y.tolist(), self.claim_ids, self.providers):
            w.writerow([*(repr(v) for v in row), label, cid, prov])

    @classmethod
    def from_csv(cls, source, fingerprint: Optional[str] = None) -> "LabeledDataset":
        reader = csv.reader(source)
        header = next(reader)
        if header[-3:] != ["label", "claim_id", "provider"]:
            raise ValueError("dataset CSV must end with label, claim_id, provider columns")
        rows = list(reader)
        ncol = len(header) - 3
        X = np.array([[float(v) for v in r[:ncol]] for r in rows]).reshape(len(rows), ncol)
        return cls(X, [int(r[ncol]) for r in rows], header[:ncol],
                   [r[ncol + 1] for r in rows], [r[ncol + 2] for r in rows], fingerprint)


def build_dataset(claims: Sequence[UnifiedClaim], state: FitState) -> LabeledDataset:
    base = impute(raw_columns(claims, state.encoding), state.impute_rules, state.impute_means)
    X = normalize(state, _assemble(claims, state, base))
    bad = ~np.isfinite(X)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise RuntimeError(f"non-finite value in column {state.columns[j]!r} at row {i}")
    return LabeledDataset(
        X=X,
        y=np.fromiter((uc.potential_fraud for uc in claims), dtype=np.int64, count=len(claims)),
        columns=state.columns,
        claim_ids=[uc.claim_id for uc in claims],
        providers=[uc.provider for uc in claims],
        fingerprint=state.fingerprint,
    )


# --------------------------------------------------------------------------
# splitting
# --------------------------------------------------------------------------

def _allocate(total: int, sizes: dict) -> dict:
    """Split ``total`` across classes proportionally (largest remainder)."""
    n = sum(sizes.values())
    quotas = {c: total * s / n for c, s in sizes.items()}
    alloc = {c: math.floor(q) for c, q in quotas.items()}
    rest = total - sum(alloc.values())
    for c in sorted(sizes, key=lambda c: (-(quotas[c] - alloc[c]), c))[:rest]:
        alloc[c] += 1
    return alloc


def validation_size(n: int, fraction: float) -> int:
    if not 0 < fraction < 1:
        raise ValueError(f"validation fraction must be in (0, 1), got {fraction}")
    size = math.ceil(fraction * n - 1e-9)
    if not 0 < size < n:
        raise ValueError(f"fraction {fraction} of {n} rows leaves an empty partition")
    return size


def split_indices(labels, fraction: float, seed: int, stratified: bool = True, groups=None):
    """Row indices ``(train, validation)``, each sorted ascending.

    The validation size is ``ceil(fraction * n)``. Stratification allocates it
    across classes by largest remainder, so each class lands within one row of
    its exact proportional share. With ``groups`` (provider ids) whole groups
    are assigned to one side; groups are drawn per class until each class's
    validation quota is met.
    """
    y = np.asarray(labels)
    n = y.shape[0]
    n_val = validation_size(n, fraction)
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(y, return_counts=True)
    if stratified and (counts < 2).any():
        bad = classes[counts < 2][0]
        raise ValueError(f"class {bad!r} has fewer than 2 rows; cannot stratify")

    if groups is not None:
        return _group_split(y, np.asarray(groups, dtype=object), n_val, rng, stratified)

    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[n_val:]), np.sort(perm[:n_val])

    alloc = _allocate(n_val, {c.item(): int(k) for c, k in zip(classes, counts)})
    val = []
    for c in classes:
        members = np.flatnonzero(y == c)
        val.append(rng.permutation(members)[:alloc[c.item()]])
    val = np.sort(np.concatenate(val))
    mask = np.ones(n, dtype=bool)
    mask[val] = False
    return np.flatnonzero(mask), val


def _group_split(y, groups, n_val, rng, stratified):
    keys, inverse = np.unique(groups, return_inverse=True)
    sizes = np.bincount(inverse)
    # A group's class is the majority label of its rows (constant for provider labels).
    group_pos = np.bincount(inverse, weights=y.astype(np.float64))
    group_label = (group_pos * 2 >= sizes).astype(np.int64)
    if stratified:
        totals = {int(c): int(sizes[group_label == c].sum()) for c in np.unique(group_label)}
        quota = _allocate(n_val, totals)
    else:
        group_label = np.zeros_like(group_label)
        quota = {0: n_val}
    chosen = np.zeros(len(keys), dtype=bool)
    for c in sorted(quota):
        taken = 0
        for g in rng.permutation(np.flatnonzero(group_label == c)):
            if taken >= quota[c]:
                break
            chosen[g] = True
            taken += sizes[g]
    in_val = chosen[inverse]
    return np.flatnonzero(~in_val), np.flatnonzero(in_val)


def split(dataset: LabeledDataset, validation_fraction: float = 0.1, seed: int = 0,
          stratified: bool = True, by_provider: bool = False):
    train, val = split_indices(dataset.y, validation_fraction, seed, stratified,
                               groups=dataset.providers if by_provider else None)
    return dataset.subset(train), dataset.subset(val)


def three_way_split(labels, validation_fraction: float, test_fraction: float, seed: int,
                    stratified: bool = True, groups=None):
    """``(train, validation, test)`` indices: test carved first, validation from the rest."""
    labels = np.asarray(labels)
    rest, test = split_indices(labels, test_fraction, seed, stratified, groups)
    sub_groups = None if groups is None else np.asarray(groups, dtype=object)[rest]
    frac = validation_fraction / (1.0 - test_fraction)
    tr, va = split_indices(labels[rest], frac, seed + 1, stratified, sub_groups)
    return rest[tr], rest[va], test
