"""
Record Files

Reading and writing of shot records, Hamiltonians and reports.

Shot record schema (also the ingestion format for exported hardware data):

    {"n": 4, "basis": "Z", "shots": 16384, "counts": {"0101": 812, ...}}
    {"n": 4, "basis": "Z", "outcomes": ["0101", "1000", ...]}

Bitstrings are qubit-0-first. Validation collects every problem and reports
it with the line number of the offending key or row.
"""

import json
import logging
import os
import re
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr, ValidationError
from slugify import slugify

from certification.certify import CertificationReport
from certification.errors import InputError, SchemaError, SchemaIssue
from certification.pauli import BASES, PauliSum
from certification.sim import MAX_RECORD_QUBITS, ShotRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

_STRING_TOKEN = re.compile(r'"((?:[^"\\]|\\.)*)"')
_KEY_TOKEN = re.compile(r'"((?:[^"\\]|\\.)*)"\s*:')


class ShotRecordFile(BaseModel):
    """Top-level shape of a record file; bitstring checks happen afterwards."""

    model_config = ConfigDict(extra="ignore")

    n: StrictInt = Field(..., ge=1, le=MAX_RECORD_QUBITS)
    basis: Literal["X", "Y", "Z"]
    shots: Optional[StrictInt] = Field(None, ge=1)
    counts: Optional[Dict[str, StrictInt]] = None
    outcomes: Optional[List[StrictStr]] = None


def _key_line(text: str, key: str) -> Optional[int]:
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _section_token_lines(text: str, section: str, pattern: re.Pattern) -> List[int]:
    """Line number of each token matching `pattern` after the `section` key, in order."""
    start = _key_line(text, section)
    if start is None:
        return []
    lines: List[int] = []
    for number, line in enumerate(text.splitlines()[start - 1:], start=start):
        if number == start:
            line = line.split(f'"{section}"', 1)[1]
        lines.extend(number for _ in pattern.finditer(line))
    return lines


def _validation_issues(error: ValidationError, text: str) -> List[SchemaIssue]:
    issues = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "$"
        line = _key_line(text, str(item["loc"][0])) if item["loc"] else None
        if len(item["loc"]) == 2 and item["loc"][0] == "counts":
            line = _key_line(text, str(item["loc"][1])) or line
        issues.append(SchemaIssue(location, item["msg"], line))
    return issues


def parse_shot_record(text: str, source: str = "<record>") -> ShotRecord:
    """
    Validate a JSON shot record.

    Args:
        text: File contents
        source: Name used in error messages

    Raises:
        SchemaError: listing every problem found, with line numbers where known
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(source, [SchemaIssue("$", f"invalid JSON: {exc.msg}", exc.lineno)]) from None
    try:
        parsed = ShotRecordFile.model_validate(payload)
    except ValidationError as exc:
        raise SchemaError(source, _validation_issues(exc, text)) from None

    issues: List[SchemaIssue] = []
    if (parsed.counts is None) == (parsed.outcomes is None):
        issues.append(SchemaIssue("$", "exactly one of 'counts' or 'outcomes' is required"))
        raise SchemaError(source, issues)

    def check_bits(bits: str, location: str, line: Optional[int]) -> bool:
        if len(bits) != parsed.n:
            issues.append(SchemaIssue(location, f"bitstring {bits!r} has length {len(bits)}, expected n={parsed.n}", line))
            return False
        if set(bits) - {"0", "1"}:
            issues.append(SchemaIssue(location, f"bitstring {bits!r} contains characters other than 0/1", line))
            return False
        return True

    if parsed.counts is not None:
        lines = _section_token_lines(text, "counts", _KEY_TOKEN)
        for i, (bits, count) in enumerate(parsed.counts.items()):
            line = lines[i] if i < len(lines) else None
            location = f"counts.{bits}"
            if check_bits(bits, location, line) and count < 0:
                issues.append(SchemaIssue(location, f"negative count {count}", line))
        total = sum(parsed.counts.values())
    else:
        lines = _section_token_lines(text, "outcomes", _STRING_TOKEN)
        for i, bits in enumerate(parsed.outcomes):
            check_bits(bits, f"outcomes[{i}]", lines[i] if i < len(lines) else None)
        total = len(parsed.outcomes)

    if total < 1:
        issues.append(SchemaIssue("counts" if parsed.counts is not None else "outcomes", "record holds no shots"))
    if parsed.shots is not None and parsed.shots != total:
        issues.append(SchemaIssue("shots", f"declared {parsed.shots} shots but data holds {total}", _key_line(text, "shots")))
    if issues:
        raise SchemaError(source, issues)

    if parsed.counts is not None:
        return ShotRecord.from_counts(parsed.basis, parsed.n, parsed.counts)
    return ShotRecord.from_outcomes(parsed.basis, parsed.n, [int(bits, 2) for bits in parsed.outcomes])


def read_shot_record(path: PathLike) -> ShotRecord:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read record file {path}: {exc}") from None
    return parse_shot_record(text, source=str(path))


def shot_record_payload(record: ShotRecord, form: Literal["counts", "outcomes"] = "counts") -> Dict[str, object]:
    payload: Dict[str, object] = {"n": record.n, "basis": record.basis, "shots": record.shots}
    if form == "counts":
        payload["counts"] = record.counts_dict()
    else:
        payload["outcomes"] = [format(int(i), f"0{record.n}b") for i in record.expanded()]
    return payload


def write_shot_record(record: ShotRecord, path: PathLike, form: Literal["counts", "outcomes"] = "counts") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(shot_record_payload(record, form), indent=2) + "\n", encoding="utf-8")
    return path


def run_label(n: int, k: int, seed: int, noise_p: float = 0.0, noise_lambda: float = 0.0) -> str:
    """File-name safe label of one simulated point."""
    return slugify(f"n{n} k{k} seed{seed} p{noise_p:g} lambda{noise_lambda:g}")


def record_filename(label: str, basis: str) -> str:
    return f"{slugify(label)}-{basis.lower()}.json"


def write_record_set(records: Mapping[str, ShotRecord], directory: PathLike, label: str,
                     form: Literal["counts", "outcomes"] = "counts") -> Dict[str, Path]:
    directory = Path(directory)
    return {
        basis: write_shot_record(records[basis], directory / record_filename(label, basis), form)
        for basis in BASES
        if basis in records
    }


def read_record_set(paths: Iterable[PathLike]) -> Dict[str, ShotRecord]:
    """One record per basis, keyed by the basis stored in each file."""
    records: Dict[str, ShotRecord] = {}
    for path in paths:
        record = read_shot_record(path)
        if record.basis in records:
            raise InputError(f"two record files for basis {record.basis} (second: {path})")
        records[record.basis] = record
    ns = {r.n for r in records.values()}
    if len(ns) > 1:
        raise InputError(f"record files disagree on n: {sorted(ns)}")
    return records


def find_record_files(directory: PathLike) -> List[Path]:
    """Record files in `directory`: names ending in -x.json, -y.json or -z.json."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"record directory {directory} does not exist")
    files = sorted(p for p in directory.glob("*.json") if re.search(r"-[xyz]\.json$", p.name, re.IGNORECASE))
    if not files:
        raise InputError(f"no record files (*-x.json, *-y.json, *-z.json) in {directory}")
    return files


def write_hamiltonian(h: PauliSum, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(h.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


def read_hamiltonian(path: PathLike) -> PauliSum:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
        payload = json.loads(text)
    except OSError as exc:
        raise InputError(f"cannot read Hamiltonian file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), [SchemaIssue("$", f"invalid JSON: {exc.msg}", exc.lineno)]) from None
    return PauliSum.from_dict(payload, source=str(path))


def write_report(report: CertificationReport, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_report(path: PathLike) -> CertificationReport:
    return CertificationReport.model_validate_json(Path(path).read_text(encoding="utf-8"))
