"""Deterministic synthetic beneficiary/claim/label tables with planted fraud.

Fraud is assigned per provider and shows up in that provider's claims as

* upcoding: reimbursements multiplied by ``upcoding_multiplier``;
* duplicate claims: rows that resubmit an earlier ClaimID of the same provider;
* prolonged stays: inpatient stays extended by a heavy tail;
* elevated admissions: inpatient share multiplied by ``fraud_admission_boost``.

Reimbursements are log-normal (inpatient location above outpatient), stays
and claim durations are geometric with rare long tails, and diagnosis /
procedure codes follow a Zipf law so a few codes dominate.
"""
from __future__ import annotations

import io
import json
import os
from dataclasses import asdict, dataclass, replace
from datetime import date, timedelta

import numpy as np

from .schema import (
    INPATIENT, OUTPATIENT, BeneficiaryRecord, ClaimRecord, ProviderLabel, write_csv,
)

TABLE_FILES = {
    "beneficiary": "beneficiary.csv",
    INPATIENT: "inpatient.csv",
    OUTPATIENT: "outpatient.csv",
    "labels": "labels.csv",
}

_YEAR_START = date(2009, 1, 1)
_RACES = ("1", "2", "3", "5")
_RACE_P = (0.85, 0.10, 0.02, 0.03)
_CHRONIC_P = (0.33, 0.5, 0.39, 0.15, 0.31, 0.36, 0.6, 0.68, 0.28, 0.26, 0.08)


@dataclass(frozen=True)
class SynthConfig:
    n_beneficiaries: int = 4000
    n_providers: int = 300
    n_claims: int = 20000
    fraud_provider_fraction: float = 0.38
    upcoding_multiplier: float = 1.8
    duplicate_claim_rate: float = 0.03
    prolonged_stay_rate: float = 0.25
    inpatient_rate: float = 0.06
    fraud_admission_boost: float = 2.0
    n_diagnosis_codes: int = 2000
    n_procedure_codes: int = 400
    zipf_exponent: float = 1.2
    seed: int = 0

    def __post_init__(self):
        for name in ("n_beneficiaries", "n_providers", "n_claims", "n_diagnosis_codes", "n_procedure_codes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("fraud_provider_fraction", "duplicate_claim_rate", "prolonged_stay_rate", "inpatient_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.upcoding_multiplier <= 0 or self.fraud_admission_boost <= 0:
            raise ValueError("multipliers must be positive")
        if self.inpatient_rate * self.fraud_admission_boost > 1.0:
            raise ValueError("inpatient_rate * fraud_admission_boost exceeds 1")
        if self.duplicate_claim_rate > 0 and self.n_claims < 2:
            raise ValueError("duplicate claims need n_claims >= 2")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        return cls(**d)


def _zipf_sampler(rng, n_codes, exponent):
    p = 1.0 / np.arange(1, n_codes + 1) ** exponent
    p /= p.sum()
    return lambda size: rng.choice(n_codes, size=size, p=p)


def _money(x: float) -> float:
    return float(max(10, int(round(x / 10.0)) * 10))


def _beneficiaries(cfg: SynthConfig, rng) -> list:
    out = []
    n = cfg.n_beneficiaries
    dob_days = rng.integers(0, 60 * 365, size=n)
    died = rng.random(n) < 0.01
    death_day = rng.integers(0, 365, size=n)
    gender = rng.choice(["1", "2"], size=n, p=[0.43, 0.57])
    race = rng.choice(_RACES, size=n, p=_RACE_P)
    renal = rng.random(n) < 0.16
    state_w = 1.0 / np.arange(1, 55)
    state = rng.choice(54, size=n, p=state_w / state_w.sum()) + 1
    county = rng.integers(0, 100, size=n) * 10
    full_a = rng.random(n) < 0.97
    full_b = rng.random(n) < 0.97
    short = rng.integers(0, 12, size=(n, 2))
    chronic = rng.random((n, 11)) < np.asarray(_CHRONIC_P)
    ip_any = rng.random(n) < 0.3
    ip_amt = rng.lognormal(8.5, 0.8, size=n)
    op_amt = rng.lognormal(7.0, 0.9, size=n)
    op_ded = rng.lognormal(5.0, 0.8, size=n)
    for i in range(n):
        dob = date(1915, 1, 1) + timedelta(days=int(dob_days[i]))
        out.append(BeneficiaryRecord(
            bene_id=f"BENE{11001 + i}",
            dob=dob,
            dod=_YEAR_START + timedelta(days=int(death_day[i])) if died[i] else None,
            gender=str(gender[i]),
            race=str(race[i]),
            renal_disease_indicator="Y" if renal[i] else "0",
            state=str(int(state[i])),
            county=str(int(county[i])),
            months_part_a=12 if full_a[i] else int(short[i, 0]),
            months_part_b=12 if full_b[i] else int(short[i, 1]),
            chronic_flags=tuple("1" if c else "2" for c in chronic[i]),
            ip_annual_reimb=_money(ip_amt[i]) if ip_any[i] else 0.0,
            ip_annual_deductible=1068.0 if ip_any[i] else 0.0,
            op_annual_reimb=_money(op_amt[i]),
            op_annual_deductible=_money(op_ded[i]),
        ))
    return out


def generate(cfg: SynthConfig):
    """Build the four tables in memory.

    Returns ``(tables, manifest)``: ``tables`` maps ``beneficiary``,
    ``inpatient``, ``outpatient`` and ``labels`` to record lists; ``manifest``
    lists the planted claim and provider ids plus realized class counts.
    """
    rng = np.random.default_rng(cfg.seed)
    benes = _beneficiaries(cfg, rng)

    providers = [f"PRV{51001 + i}" for i in range(cfg.n_providers)]
    n_fraud = int(round(cfg.fraud_provider_fraction * cfg.n_providers))
    fraud = np.zeros(cfg.n_providers, dtype=bool)
    fraud[rng.choice(cfg.n_providers, size=n_fraud, replace=False)] = True
    activity = rng.lognormal(0.0, 0.8, size=cfg.n_providers)
    activity /= activity.sum()

    n = cfg.n_claims
    prov = rng.choice(cfg.n_providers, size=n, p=activity)
    bene = rng.integers(0, cfg.n_beneficiaries, size=n)
    is_fraud = fraud[prov]
    ip_rate = np.where(is_fraud, cfg.inpatient_rate * cfg.fraud_admission_boost, cfg.inpatient_rate)
    inpatient = rng.random(n) < ip_rate
    start_day = rng.integers(0, 365, size=n)
    stay = rng.geometric(0.2, size=n)
    prolonged = inpatient & is_fraud & (rng.random(n) < cfg.prolonged_stay_rate)
    stay = stay + np.where(prolonged, rng.integers(10, 36, size=n), 0)
    op_days = rng.geometric(0.7, size=n) - 1
    op_days = op_days + np.where(rng.random(n) < 0.01, rng.integers(5, 25, size=n), 0)
    amount = np.where(inpatient, rng.lognormal(8.6, 0.7, size=n), rng.lognormal(4.8, 1.2, size=n))
    amount = amount * np.where(is_fraud, cfg.upcoding_multiplier, 1.0)
    op_deductible = np.where(rng.random(n) < 0.9, 0.0, rng.integers(1, 21, size=n) * 10.0)
    deductible_missing = rng.random(n) < 0.02
    diag = _zipf_sampler(rng, cfg.n_diagnosis_codes, cfg.zipf_exponent)
    proc = _zipf_sampler(rng, cfg.n_procedure_codes, cfg.zipf_exponent)
    n_diag = np.where(inpatient, rng.integers(6, 11, size=n), rng.integers(1, 4, size=n))
    n_proc = np.where(inpatient, (rng.random(n) < 0.6) * rng.integers(1, 3, size=n),
                      (rng.random(n) < 0.02).astype(np.int64))
    diag_codes = diag(n * 10).reshape(n, 10)
    proc_codes = proc(n * 6).reshape(n, 6)
    admit_code = diag(n)
    has_admit = inpatient | (rng.random(n) < 0.25)
    attending = rng.integers(0, 4000, size=n)
    operating = np.where(rng.random(n) < 0.2, rng.integers(0, 4000, size=n), -1)
    other = np.where(rng.random(n) < 0.35, rng.integers(0, 4000, size=n), -1)

    claims = []
    for i in range(n):
        start = _YEAR_START + timedelta(days=int(start_day[i]))
        if inpatient[i]:
            discharge = start + timedelta(days=int(stay[i]))
            end, adm, dis, ded = discharge, start, discharge, 1068.0
        else:
            end, adm, dis, ded = start + timedelta(days=int(op_days[i])), None, None, float(op_deductible[i])
        claims.append(ClaimRecord(
            claim_id=f"CLM{100001 + i}",
            bene_id=benes[bene[i]].bene_id,
            provider=providers[prov[i]],
            claim_start=start,
            claim_end=end,
            reimbursed_amount=_money(amount[i]),
            deductible_paid=None if deductible_missing[i] else ded,
            attending_physician=f"PHY{330001 + attending[i]}",
            operating_physician=f"PHY{330001 + operating[i]}" if operating[i] >= 0 else None,
            other_physician=f"PHY{330001 + other[i]}" if other[i] >= 0 else None,
            diagnosis_codes=tuple(f"{4000 + c}" if k < n_diag[i] else None
                                  for k, c in enumerate(diag_codes[i])),
            procedure_codes=tuple(f"{8100 + c}" if k < n_proc[i] else None
                                  for k, c in enumerate(proc_codes[i])),
            admit_diagnosis_code=f"{4000 + admit_code[i]}" if has_admit[i] else None,
            admission_date=adm,
            discharge_date=dis,
            setting=INPATIENT if inpatient[i] else OUTPATIENT,
        ))

    duplicated = []
    replaced = set()
    if cfg.duplicate_claim_rate > 0:
        by_provider = {}
        for i in np.flatnonzero(is_fraud):
            by_provider.setdefault(int(prov[i]), []).append(int(i))
        flips = rng.random(n) < cfg.duplicate_claim_rate
        shifts = rng.integers(1, 30, size=n)
        for rows in by_provider.values():
            for pos, i in enumerate(rows[1:], start=1):
                if not flips[i]:
                    continue
                src = claims[rows[int(rng.integers(0, pos))]]
                delta = timedelta(days=int(shifts[i]))
                claims[i] = replace(
                    src,
                    claim_start=src.claim_start + delta,
                    claim_end=src.claim_end + delta,
                    admission_date=None if src.admission_date is None else src.admission_date + delta,
                    discharge_date=None if src.discharge_date is None else src.discharge_date + delta,
                )
                duplicated.append(src.claim_id)
                replaced.add(i)

    labels = [ProviderLabel(p, bool(f)) for p, f in zip(providers, fraud)]
    fraud_ids = {providers[i] for i in np.flatnonzero(fraud)}
    tables = {
        "beneficiary": benes,
        INPATIENT: [c for c in claims if c.setting == INPATIENT],
        OUTPATIENT: [c for c in claims if c.setting == OUTPATIENT],
        "labels": labels,
    }
    fraud_claims = sum(1 for c in claims if c.provider in fraud_ids)
    manifest = {
        "config": asdict(cfg),
        "fraud_providers": sorted(fraud_ids),
        "patterns": {
            "upcoding": list(dict.fromkeys(c.claim_id for c in claims if c.provider in fraud_ids))
            if cfg.upcoding_multiplier != 1 else [],
            "duplicate_claim": sorted(set(duplicated)),
            "prolonged_stay": [claims[i].claim_id for i in np.flatnonzero(prolonged) if i not in replaced],
        },
        "class_counts": {"fraud_claims": fraud_claims, "legit_claims": len(claims) - fraud_claims,
                         "fraud_providers": int(n_fraud), "providers": cfg.n_providers},
    }
    return tables, manifest


def render(tables: dict) -> dict:
    """CSV text for each table, in the layout the schema parsers read."""
    out = {}
    for kind, records in tables.items():
        buf = io.StringIO()
        write_csv(records, buf, kind)
        out[kind] = buf.getvalue()
    return out


def write_tables(cfg: SynthConfig, out_dir: str) -> dict:
    """Generate and write the four CSVs plus ``manifest.json``; returns the paths."""
    tables, manifest = generate(cfg)
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for kind, text in render(tables).items():
        path = os.path.join(out_dir, TABLE_FILES[kind])
        _atomic_write(path, text)
        paths[kind] = path
    path = os.path.join(out_dir, "manifest.json")
    _atomic_write(path, json.dumps(manifest, sort_keys=True, indent=1))
    paths["manifest"] = path
    return paths


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
