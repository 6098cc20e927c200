"""Python access to the sorryforge core: records, scanning, dedup, selection,
verification and metrics. Structured values are plain dicts and lists."""

import json as _json

from . import _core
from ._core import SorryforgeError, hash_email, normalize_goal, pass_at_k

__all__ = [
    "SorryforgeError",
    "compute_id",
    "validate_record",
    "normalize_goal",
    "hash_email",
    "scan_for_sorries",
    "deduplicate",
    "select_test_slice",
    "load_database",
    "save_database",
    "splice_proposal",
    "verify_proposal",
    "pass_at_k",
    "compute_metrics",
    "emit_report",
    "run_cli",
]


def _dump(value):
    return _json.dumps(value, ensure_ascii=False)


def compute_id(record):
    return _core.compute_id(_dump(record))


def validate_record(record):
    return _core.validate_record(_dump(record))


def scan_for_sorries(source):
    return _json.loads(_core.scan_for_sorries(source))


def deduplicate(records):
    return _json.loads(_core.deduplicate(_dump(records)))


def select_test_slice(snapshot, n):
    return _json.loads(_core.select_test_slice(_dump(snapshot), n))


def load_database(path):
    return _json.loads(_core.load_database(str(path)))


def save_database(path, snapshot):
    _core.save_database(str(path), _dump(snapshot))


def splice_proposal(source, location, proposal):
    return _json.loads(_core.splice_proposal(source, _dump(location), proposal))


def verify_proposal(workspace_root, record, proposal, mock_script=None, timeout_seconds=300):
    """Checks a proposal inside an already built workspace. With mock_script the
    REPL is replaced by a scripted one."""
    script = None if mock_script is None else str(mock_script)
    return _json.loads(
        _core.verify_proposal(str(workspace_root), _dump(record), proposal, script, timeout_seconds)
    )


def compute_metrics(runs, provers):
    if isinstance(provers, list):
        provers = {"provers": provers}
    return _json.loads(_core.compute_metrics(_dump(runs), _dump(provers)))


def emit_report(metrics, fmt="markdown"):
    return _core.emit_report(_dump(metrics), fmt)


def run_cli(args):
    """Runs the command-line tool in process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
