"""The eleven acceptance criteria at full size, one printed PASS/FAIL line each."""

import json

import pytest

from twistlab.acceptance import CRITERIA, run_criterion
from twistlab.cli import main


@pytest.mark.slow
@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"criterion-{c[0]:02d}" for c in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number, "full")
    with capsys.disabled():
        print("\n" + result.line)
    assert result.passed, result.line


@pytest.mark.slow
def test_verify_command_smoke(tmp_path, capsys):
    status = main(["verify", "--level", "smoke", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    doc = json.loads((tmp_path / "verify-smoke.json").read_text())
    assert status == 0
    assert len(doc["criteria"]) == 11 and all(c["passed"] for c in doc["criteria"])
    assert out.count("[PASS]") == 11
