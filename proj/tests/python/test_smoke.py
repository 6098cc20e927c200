import json
import os
from pathlib import Path

import pytest

import sorryforge

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def examples():
    return sorryforge.load_database(FIXTURES / "db" / "examples.json")


def test_examples_round_trip(examples, tmp_path):
    assert len(examples["sorries"]) == 3
    for record in examples["sorries"]:
        assert sorryforge.validate_record(record) == []
        assert sorryforge.compute_id(record) == record["id"]
    out = tmp_path / "copy.json"
    sorryforge.save_database(out, examples)
    assert out.read_bytes() == (FIXTURES / "db" / "examples.json").read_bytes()


def test_tampered_record_is_reported(examples):
    record = dict(examples["sorries"][0])
    record["location"] = dict(record["location"], start_line=1)
    assert any("id" in problem for problem in sorryforge.validate_record(record))


def test_scan_and_normalize():
    hits = sorryforge.scan_for_sorries("theorem t : True := by sorry -- sorry\n")
    assert [h["location"]["start_column"] for h in hits] == [23]
    assert sorryforge.normalize_goal("⊢  True\n") == sorryforge.normalize_goal("⊢ True")


def test_dedup_and_select(examples):
    records = examples["sorries"]
    twin = dict(records[0], location=dict(records[0]["location"], start_line=7))
    twin["id"] = sorryforge.compute_id(twin)
    assert len(sorryforge.deduplicate(records + [twin])) == 3
    slice_ = sorryforge.select_test_slice(examples, 2)
    assert len(slice_["sorries"]) == 2


def test_errors_carry_a_code(examples):
    with pytest.raises(sorryforge.SorryforgeError) as info:
        sorryforge.select_test_slice(examples, 0)
    assert info.value.code == "UsageError"


def test_splice_and_mock_verify(tmp_path):
    source = "theorem t : True := by sorry\n"
    (tmp_path / "ws").mkdir()
    (tmp_path / "ws" / "A.lean").write_text(source)
    location = {"path": "A.lean", "start_line": 1, "start_column": 23, "end_line": 1, "end_column": 28}
    assert sorryforge.splice_proposal(source, location, "trivial")["text"] == "theorem t : True := by trivial\n"

    sorry = {"pos": {"line": 1, "column": 23}, "goal": "⊢ True", "proofState": 0}
    rules = {"rules": [
        {"expect_substring": "True := by sorry", "response": {"env": 0, "sorries": [sorry]}},
        {"expect_substring": "True := by trivial", "response": {"env": 1, "sorries": []}},
        {"expect_substring": "#print axioms", "response": {"env": 2, "messages": []}},
        {"expect_substring": "", "response": {"env": 1, "messages": [
            {"severity": "error", "pos": {"line": 1, "column": 0}, "data": "failed"}]}},
    ]}
    (tmp_path / "repl.json").write_text(json.dumps(rules))
    record = {
        "repo": {"remote": "https://example.org/r", "branch": "main", "commit": "a" * 40, "lean_version": "v4.24.0"},
        "location": location,
        "debug_info": {"goal": "⊢ True", "url": "https://example.org/r/blob/x/A.lean"},
        "metadata": {"blame_email_hash": sorryforge.hash_email("dev@example.org"),
                     "blame_date": "2025-01-01T00:00:00Z", "inclusion_date": "2025-07-01T00:00:00Z"},
    }
    record["id"] = sorryforge.compute_id(record)
    ok = sorryforge.verify_proposal(tmp_path / "ws", record, "trivial", mock_script=tmp_path / "repl.json")
    assert ok["status"] == "Accepted"
    bad = sorryforge.verify_proposal(tmp_path / "ws", record, "simp", mock_script=tmp_path / "repl.json")
    assert bad["status"] == "BuildFailure"
    assert sorted(os.listdir(tmp_path / "ws")) == ["A.lean"]


def test_metrics_and_report():
    assert sorryforge.pass_at_k([[False, True], [False, False]], 1) == 0.0
    assert sorryforge.pass_at_k([[False, True], [False, False]], 2) == 0.5
    provers = [{"id": "tactics", "kind": "tactic", "label": "Tactics", "tactics": ["simp"]}]
    runs = []
    for t in range(4):
        solved = t == 0
        runs.append({
            "sorry_id": f"{t:064x}",
            "prover_id": "tactics",
            "solved": solved,
            "attempts": [],
            "diagnostics": [],
        })
    metrics = sorryforge.compute_metrics(runs, provers)
    assert metrics["combined_count"] == 1
    assert "| Tactics | 25.0% | n/a |" in sorryforge.emit_report(metrics)


def test_cli_in_process():
    code, out, _ = sorryforge.run_cli(["select", "--db", FIXTURES / "db" / "examples.json", "--n", "1"])
    assert code == 0
    assert len(json.loads(out)["sorries"]) == 1
    assert sorryforge.run_cli(["no-such-command"])[0] == 2
