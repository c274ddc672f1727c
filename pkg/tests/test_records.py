import json

import pytest

from certification.certify import RunMetadata, build_report
from certification.dicke import DickeSpec
from certification.errors import InputError, SchemaError
from certification.estimate import EnergyEstimate
from certification.parent_ham import build_pauli, hamiltonian_spec
from certification.records import (
    find_record_files,
    parse_shot_record,
    read_hamiltonian,
    read_record_set,
    read_report,
    read_shot_record,
    record_filename,
    run_label,
    write_hamiltonian,
    write_record_set,
    write_report,
    write_shot_record,
)
from certification.sim import MAX_RECORD_QUBITS, ShotRecord, random_state, sample_shots

COUNTS_WITH_BAD_KEY = """{
  "n": 3,
  "basis": "Z",
  "shots": 10,
  "counts": {
    "010": 4,
    "0110": 6
  }
}
"""

OUTCOMES_WITH_BAD_ROW = """{
  "n": 2,
  "basis": "X",
  "outcomes": [
    "01",
    "0a"
  ]
}
"""


def issue_at(error, location):
    matches = [issue for issue in error.issues if issue.location == location]
    assert matches, f"no issue at {location}: {error}"
    return matches[0]


def test_parse_counts_form():
    record = parse_shot_record('{"n": 2, "basis": "Y", "shots": 3, "counts": {"01": 1, "11": 2}}')
    assert record == ShotRecord.from_counts("Y", 2, {"01": 1, "11": 2})


def test_parse_outcomes_form():
    record = parse_shot_record('{"n": 2, "basis": "Z", "outcomes": ["11", "01", "11"]}')
    assert record.counts_dict() == {"01": 1, "11": 2}


def test_wrong_length_key_is_reported_with_line():
    with pytest.raises(SchemaError) as info:
        parse_shot_record(COUNTS_WITH_BAD_KEY, source="bad.json")
    issue = issue_at(info.value, "counts.0110")
    assert issue.line == 7
    assert "expected n=3" in issue.message
    assert "0110" in str(info.value)
    assert str(info.value).startswith("bad.json")


def test_bad_character_row_is_reported_with_line():
    with pytest.raises(SchemaError) as info:
        parse_shot_record(OUTCOMES_WITH_BAD_ROW)
    assert issue_at(info.value, "outcomes[1]").line == 6


def test_every_problem_is_collected():
    text = '{"n": 2, "basis": "Z", "shots": 5, "counts": {"01": 2, "2x": 1, "10": -1}}'
    with pytest.raises(SchemaError) as info:
        parse_shot_record(text)
    locations = {issue.location for issue in info.value.issues}
    assert {"counts.2x", "counts.10", "shots"} <= locations


def test_schema_shape_errors():
    with pytest.raises(SchemaError) as info:
        parse_shot_record('{\n  "n": "3",\n  "counts": {"000": 1}\n}')
    assert issue_at(info.value, "n").line == 2
    issue_at(info.value, "basis")

    with pytest.raises(SchemaError):
        parse_shot_record('{"n": 1, "basis": "Z", "counts": {"0": 1}, "outcomes": ["0"]}')
    with pytest.raises(SchemaError):
        parse_shot_record('{"n": 1, "basis": "Z", "counts": {}}')


def test_record_width_is_capped_at_index_range():
    wide = json.dumps({"n": 64, "basis": "Z", "counts": {"1" * 64: 3}}, indent=2)
    with pytest.raises(SchemaError) as info:
        parse_shot_record(wide)
    assert issue_at(info.value, "n").line == 2

    widest = "1" * MAX_RECORD_QUBITS
    record = parse_shot_record(json.dumps({"n": MAX_RECORD_QUBITS, "basis": "X", "counts": {widest: 2}}))
    assert record.bitstrings() == [widest]
    with pytest.raises(InputError):
        ShotRecord.from_counts("Z", 63, {"1" * 63: 1})


def test_invalid_json_reports_line():
    with pytest.raises(SchemaError) as info:
        parse_shot_record('{\n  "n": 2,\n  "basis": \n}')
    assert info.value.issues[0].line == 4


def test_counts_and_outcomes_files_are_equivalent(tmp_path):
    record = sample_shots(random_state(3, 0), "X", 300, seed=1)
    counts_path = write_shot_record(record, tmp_path / "c-x.json", form="counts")
    outcomes_path = write_shot_record(record, tmp_path / "o-x.json", form="outcomes")
    assert read_shot_record(counts_path) == record
    assert read_shot_record(outcomes_path) == record
    assert len(json.loads(outcomes_path.read_text())["outcomes"]) == 300


def test_record_set_round_trip(tmp_path):
    records = {b: sample_shots(random_state(3, 0), b, 50, seed=2) for b in ("X", "Y", "Z")}
    label = run_label(3, 1, 2)
    paths = write_record_set(records, tmp_path, label)
    assert paths["Y"].name == record_filename(label, "Y") == "n3-k1-seed2-p0-lambda0-y.json"
    found = find_record_files(tmp_path)
    assert len(found) == 3
    assert read_record_set(found) == records


def test_record_set_errors(tmp_path):
    record = sample_shots(random_state(2, 0), "Z", 20, seed=0)
    first = write_shot_record(record, tmp_path / "a-z.json")
    second = write_shot_record(record, tmp_path / "b-z.json")
    with pytest.raises(InputError):
        read_record_set([first, second])
    with pytest.raises(InputError):
        find_record_files(tmp_path / "missing")
    with pytest.raises(InputError):
        read_shot_record(tmp_path / "nope.json")
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(InputError):
        find_record_files(empty)


def test_hamiltonian_file_round_trip(tmp_path):
    h = build_pauli(4, 2)
    path = write_hamiltonian(h, tmp_path / "h.json")
    assert read_hamiltonian(path) == h
    path.write_text('{"n": 2, "terms": [{"coeff": 1.0, "paulis": "XYZ"}]}')
    with pytest.raises(SchemaError):
        read_hamiltonian(path)


def test_report_file_round_trip(tmp_path):
    estimate = EnergyEstimate(mean=0.05, sem=0.01, per_basis={}, constant=2.75)
    report = build_report(
        estimate, hamiltonian_spec(4, 1), DickeSpec(4, 1), meta=RunMetadata(source="ingested", seeds=[1])
    )
    path = write_report(report, tmp_path / "reports" / "r.json")
    assert read_report(path) == report
