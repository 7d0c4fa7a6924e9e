"""Record types for the beneficiary, claim and label tables, and their CSV codecs.

Column names follow the public Kaggle "Healthcare Provider Fraud Detection"
release. A few chronic-condition headers are spelled differently in its
documentation table, so those alternate spellings are accepted on input.
"""
from __future__ import annotations

import csv
import io
import os
import re
from collections import Counter
from dataclasses import dataclass, field, fields
from datetime import date
from typing import IO, Iterable, NamedTuple, Optional, Union

Source = Union[str, os.PathLike, bytes, IO[bytes], IO[str]]

INPATIENT = "inpatient"
OUTPATIENT = "outpatient"

CHRONIC_FIELDS = (
    "alzheimer", "heart_failure", "kidney_disease", "cancer", "obstr_pulmonary",
    "depression", "diabetes", "ischemic_heart", "osteoporosis",
    "rheumatoid_arthritis", "stroke",
)

CHRONIC_COLUMNS = (
    "ChronicCond_Alzheimer", "ChronicCond_Heartfailure", "ChronicCond_KidneyDisease",
    "ChronicCond_Cancer", "ChronicCond_ObstrPulmonary", "ChronicCond_Depression",
    "ChronicCond_Diabetes", "ChronicCond_IschemicHeart", "ChronicCond_Osteoporasis",
    "ChronicCond_rheumatoidarthritis", "ChronicCond_stroke",
)

HEADER_ALIASES = {
    "ChronicCond_Osteoporosis": "ChronicCond_Osteoporasis",
    "ChronicCond_RheumatoidArthritis": "ChronicCond_rheumatoidarthritis",
    "ChronicCond_Stroke": "ChronicCond_stroke",
    "BenID": "BeneID",
}

BENEFICIARY_COLUMNS = (
    "BeneID", "DOB", "DOD", "Gender", "Race", "RenalDiseaseIndicator", "State", "County",
    "NoOfMonths_PartACov", "NoOfMonths_PartBCov", *CHRONIC_COLUMNS,
    "IPAnnualReimbursementAmt", "IPAnnualDeductibleAmt",
    "OPAnnualReimbursementAmt", "OPAnnualDeductibleAmt",
)

DIAGNOSIS_COLUMNS = tuple(f"ClmDiagnosisCode_{i}" for i in range(1, 11))
PROCEDURE_COLUMNS = tuple(f"ClmProcedureCode_{i}" for i in range(1, 7))

OUTPATIENT_COLUMNS = (
    "BeneID", "ClaimID", "ClaimStartDt", "ClaimEndDt", "Provider", "InscClaimAmtReimbursed",
    "AttendingPhysician", "OperatingPhysician", "OtherPhysician",
    *DIAGNOSIS_COLUMNS, *PROCEDURE_COLUMNS, "DeductibleAmtPaid", "ClmAdmitDiagnosisCode",
)

INPATIENT_COLUMNS = (
    "BeneID", "ClaimID", "ClaimStartDt", "ClaimEndDt", "Provider", "InscClaimAmtReimbursed",
    "AttendingPhysician", "OperatingPhysician", "OtherPhysician", "AdmissionDt",
    "ClmAdmitDiagnosisCode", "DeductibleAmtPaid", "DischargeDt",
    *DIAGNOSIS_COLUMNS, *PROCEDURE_COLUMNS,
)

LABEL_COLUMNS = ("Provider", "PotentialFraud")

_ISO_DATE = re.compile(r"\d{4}-\d{2}-\d{2}")


class SchemaError(ValueError):
    """A required header column is absent."""

    def __init__(self, column: str, table: str = ""):
        self.column = column
        self.table = table
        where = f" in {table} table" if table else ""
        super().__init__(f"missing required column {column!r}{where}")


class RowError(ValueError):
    """A data row could not be turned into a record."""

    def __init__(self, row: int, field: str, message: str):
        self.row = row
        self.field = field
        super().__init__(f"row {row}: field {field!r}: {message}")


@dataclass(frozen=True)
class BeneficiaryRecord:
    bene_id: str
    dob: date
    dod: Optional[date]
    gender: str
    race: str
    renal_disease_indicator: str
    state: str
    county: str
    months_part_a: int
    months_part_b: int
    chronic_flags: tuple
    ip_annual_reimb: Optional[float]
    ip_annual_deductible: Optional[float]
    op_annual_reimb: Optional[float]
    op_annual_deductible: Optional[float]


@dataclass(frozen=True)
class ClaimRecord:
    claim_id: str
    bene_id: str
    provider: str
    claim_start: date
    claim_end: date
    reimbursed_amount: float
    deductible_paid: Optional[float]
    attending_physician: Optional[str]
    operating_physician: Optional[str]
    other_physician: Optional[str]
    diagnosis_codes: tuple
    procedure_codes: tuple
    admit_diagnosis_code: Optional[str]
    admission_date: Optional[date]
    discharge_date: Optional[date]
    setting: str


@dataclass(frozen=True)
class ProviderLabel:
    provider: str
    potential_fraud: bool


@dataclass
class ParseSummary:
    table: str
    rows_in: int = 0
    records_out: int = 0
    rejected_rows: int = 0
    errors: list = field(default_factory=list)
    duplicate_ids: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "table": self.table,
            "rows_in": self.rows_in,
            "records_out": self.records_out,
            "rejected_rows": self.rejected_rows,
            "errors": [str(e) for e in self.errors],
            "duplicate_ids": dict(sorted(self.duplicate_ids.items())),
        }


class Parsed(NamedTuple):
    records: list
    summary: ParseSummary


# --------------------------------------------------------------------------
# cell parsers
# --------------------------------------------------------------------------

def parse_date(text: str) -> date:
    """Parse exactly ``YYYY-MM-DD``."""
    if not _ISO_DATE.fullmatch(text):
        raise ValueError(f"expected YYYY-MM-DD, got {text!r}")
    return date.fromisoformat(text)


def format_date(d: Optional[date]) -> str:
    return "" if d is None else d.isoformat()


def _opt(text: str) -> Optional[str]:
    return text if text != "" else None


def _money(text: str) -> float:
    v = float(text)
    if v != v or v in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite amount {text!r}")
    return v


def _opt_money(text: str) -> Optional[float]:
    return None if text == "" else _money(text)


def _format_money(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def _months(text: str) -> int:
    v = int(text)
    if not 0 <= v <= 12:
        raise ValueError(f"coverage months {v} outside [0, 12]")
    return v


class _Row:
    """Field accessor that tags conversion failures with row and column."""

    def __init__(self, cells: dict, row: int):
        self.cells = cells
        self.row = row

    def raw(self, column: str) -> str:
        return (self.cells.get(column) or "").strip()

    def get(self, column: str, conv=None, required: bool = True):
        text = self.raw(column)
        if text == "":
            if required:
                raise RowError(self.row, column, "required value is empty")
            return None
        if conv is None:
            return text
        try:
            return conv(text)
        except (ValueError, TypeError) as exc:
            raise RowError(self.row, column, str(exc)) from None


def _open_text(source: Source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _iter_rows(source: Source, required: Iterable[str], table: str):
    fh = _open_text(source)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(next(iter(required)), table) from None
        if header and header[0].startswith("﻿"):
            header[0] = header[0][1:]
        header = [HEADER_ALIASES.get(h.strip(), h.strip()) for h in header]
        for col in required:
            if col not in header:
                raise SchemaError(col, table)
        for i, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and cells[0] == ""):
                continue
            yield i, dict(zip(header, cells)), len(cells) == len(header)
    finally:
        if isinstance(source, (str, os.PathLike, bytes)):
            fh.close()
        elif isinstance(fh, io.TextIOWrapper) and not isinstance(source, io.TextIOBase):
            fh.detach()


def _run(source, required, table, build, strict, post=None):
    summary = ParseSummary(table=table)
    records = []
    for i, cells, width_ok in _iter_rows(source, required, table):
        summary.rows_in += 1
        try:
            if not width_ok:
                raise RowError(i, "*", "cell count does not match header")
            rec = build(_Row(cells, i))
            if post is not None:
                post(rec, i)
        except RowError as exc:
            if strict:
                raise
            summary.rejected_rows += 1
            summary.errors.append(exc)
            continue
        records.append(rec)
        summary.records_out += 1
    return Parsed(records, summary)


# --------------------------------------------------------------------------
# table parsers
# --------------------------------------------------------------------------

def _build_beneficiary(r: _Row) -> BeneficiaryRecord:
    dob = r.get("DOB", parse_date)
    dod = r.get("DOD", parse_date, required=False)
    if dod is not None and dod < dob:
        raise RowError(r.row, "DOD", "date of death precedes date of birth")
    return BeneficiaryRecord(
        bene_id=r.get("BeneID"),
        dob=dob,
        dod=dod,
        gender=r.get("Gender"),
        race=r.get("Race"),
        renal_disease_indicator=r.get("RenalDiseaseIndicator"),
        state=r.get("State"),
        county=r.get("County"),
        months_part_a=r.get("NoOfMonths_PartACov", _months),
        months_part_b=r.get("NoOfMonths_PartBCov", _months),
        chronic_flags=tuple(r.get(c) for c in CHRONIC_COLUMNS),
        ip_annual_reimb=r.get("IPAnnualReimbursementAmt", _money, required=False),
        ip_annual_deductible=r.get("IPAnnualDeductibleAmt", _money, required=False),
        op_annual_reimb=r.get("OPAnnualReimbursementAmt", _money, required=False),
        op_annual_deductible=r.get("OPAnnualDeductibleAmt", _money, required=False),
    )


def parse_beneficiaries(source: Source, strict: bool = False) -> Parsed:
    """Parse the beneficiary table. Duplicate ``BeneID`` rows are rejected."""
    seen: set = set()

    def unique(rec, i):
        if rec.bene_id in seen:
            raise RowError(i, "BeneID", f"duplicate beneficiary id {rec.bene_id!r}")
        seen.add(rec.bene_id)

    return _run(source, BENEFICIARY_COLUMNS, "beneficiary", _build_beneficiary, strict, unique)


def _claim_builder(setting: str):
    inpatient = setting == INPATIENT

    def build(r: _Row) -> ClaimRecord:
        start = r.get("ClaimStartDt", parse_date)
        end = r.get("ClaimEndDt", parse_date)
        if end < start:
            raise RowError(r.row, "ClaimEndDt", "claim end precedes claim start")
        admission = discharge = None
        if inpatient:
            admission = r.get("AdmissionDt", parse_date, required=False)
            discharge = r.get("DischargeDt", parse_date, required=False)
            if admission is not None and discharge is not None and discharge < admission:
                raise RowError(r.row, "DischargeDt", "discharge precedes admission")
        return ClaimRecord(
            claim_id=r.get("ClaimID"),
            bene_id=r.get("BeneID"),
            provider=r.get("Provider"),
            claim_start=start,
            claim_end=end,
            reimbursed_amount=r.get("InscClaimAmtReimbursed", _money),
            deductible_paid=r.get("DeductibleAmtPaid", _money, required=False),
            attending_physician=_opt(r.raw("AttendingPhysician")),
            operating_physician=_opt(r.raw("OperatingPhysician")),
            other_physician=_opt(r.raw("OtherPhysician")),
            diagnosis_codes=tuple(_opt(r.raw(c)) for c in DIAGNOSIS_COLUMNS),
            procedure_codes=tuple(_opt(r.raw(c)) for c in PROCEDURE_COLUMNS),
            admit_diagnosis_code=_opt(r.raw("ClmAdmitDiagnosisCode")),
            admission_date=admission,
            discharge_date=discharge,
            setting=setting,
        )

    return build


def parse_claims(source: Source, setting: str, strict: bool = False) -> Parsed:
    """Parse an inpatient or outpatient claim table.

    Repeated ``ClaimID`` values are kept; ``summary.duplicate_ids`` maps each
    repeated id to its occurrence count.
    """
    if setting not in (INPATIENT, OUTPATIENT):
        raise ValueError(f"setting must be {INPATIENT!r} or {OUTPATIENT!r}, got {setting!r}")
    columns = INPATIENT_COLUMNS if setting == INPATIENT else OUTPATIENT_COLUMNS
    parsed = _run(source, columns, setting, _claim_builder(setting), strict)
    counts = Counter(rec.claim_id for rec in parsed.records)
    parsed.summary.duplicate_ids = {cid: n for cid, n in counts.items() if n > 1}
    return parsed


_LABEL_TOKENS = {"Yes": True, "No": False}


def _build_label(r: _Row) -> ProviderLabel:
    token = r.get("PotentialFraud")
    if token not in _LABEL_TOKENS:
        raise RowError(r.row, "PotentialFraud", f"expected 'Yes' or 'No', got {token!r}")
    return ProviderLabel(provider=r.get("Provider"), potential_fraud=_LABEL_TOKENS[token])


def parse_labels(source: Source, strict: bool = False) -> Parsed:
    seen: set = set()

    def unique(rec, i):
        if rec.provider in seen:
            raise RowError(i, "Provider", f"duplicate provider {rec.provider!r}")
        seen.add(rec.provider)

    return _run(source, LABEL_COLUMNS, "labels", _build_label, strict, unique)


# --------------------------------------------------------------------------
# writers
# --------------------------------------------------------------------------

def _beneficiary_row(b: BeneficiaryRecord) -> list:
    return [
        b.bene_id, format_date(b.dob), format_date(b.dod), b.gender, b.race,
        b.renal_disease_indicator, b.state, b.county, str(b.months_part_a), str(b.months_part_b),
        *b.chronic_flags,
        _format_money(b.ip_annual_reimb), _format_money(b.ip_annual_deductible),
        _format_money(b.op_annual_reimb), _format_money(b.op_annual_deductible),
    ]


def _claim_row(c: ClaimRecord) -> list:
    cells = {
        "BeneID": c.bene_id, "ClaimID": c.claim_id,
        "ClaimStartDt": format_date(c.claim_start), "ClaimEndDt": format_date(c.claim_end),
        "Provider": c.provider, "InscClaimAmtReimbursed": _format_money(c.reimbursed_amount),
        "AttendingPhysician": c.attending_physician or "",
        "OperatingPhysician": c.operating_physician or "",
        "OtherPhysician": c.other_physician or "",
        "AdmissionDt": format_date(c.admission_date),
        "ClmAdmitDiagnosisCode": c.admit_diagnosis_code or "",
        "DeductibleAmtPaid": _format_money(c.deductible_paid),
        "DischargeDt": format_date(c.discharge_date),
    }
    cells.update(zip(DIAGNOSIS_COLUMNS, (x or "" for x in c.diagnosis_codes)))
    cells.update(zip(PROCEDURE_COLUMNS, (x or "" for x in c.procedure_codes)))
    columns = INPATIENT_COLUMNS if c.setting == INPATIENT else OUTPATIENT_COLUMNS
    return [cells[k] for k in columns]


def write_csv(records: list, sink: IO[str], kind: str) -> None:
    """Serialise records back to the table layout they were parsed from.

    ``kind`` is one of ``beneficiary``, ``inpatient``, ``outpatient``, ``labels``.
    """
    w = csv.writer(sink, lineterminator="\n")
    if kind == "beneficiary":
        w.writerow(BENEFICIARY_COLUMNS)
        w.writerows(_beneficiary_row(r) for r in records)
    elif kind in (INPATIENT, OUTPATIENT):
        w.writerow(INPATIENT_COLUMNS if kind == INPATIENT else OUTPATIENT_COLUMNS)
        w.writerows(_claim_row(r) for r in records)
    elif kind == "labels":
        w.writerow(LABEL_COLUMNS)
        w.writerows([r.provider, "Yes" if r.potential_fraud else "No"] for r in records)
    else:
        raise ValueError(f"unknown table kind {kind!r}")


def record_fields(cls) -> tuple:
    return tuple(f.name for f in fields(cls))
