import io
import json
from pathlib import Path

import pytest

from sepdistill.cli import SWEEP_COLUMNS, dumps, execute_command, format_float

GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "verify_thm1_sep": ["verify", "--family", "thm1-sep", "--d", "2", "--k1", "1", "--w", "0.3"],
    "verify_ex_2x4": ["verify", "--family", "ex-2x4", "--w", "0.5"],
    "bounds_2x3": ["bounds", "--kind", "bipartite-sep", "--dims", "2,3", "--d", "2"],
    "protocol_three_qubit": ["protocol", "--family", "three-qubit", "--w", "0.5"],
    "pencil_bell_mix": ["pencil", "--family", "bell-mix", "--samples", "50"],
}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = execute_command(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def assert_matches(actual, expected, path="$"):
    """Same keys and list lengths everywhere; numbers within 1e-9."""
    if isinstance(expected, dict):
        assert isinstance(actual, dict) and list(actual) == list(expected), path
        for k in expected:
            assert_matches(actual[k], expected[k], f"{path}.{k}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), path
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_matches(a, e, f"{path}[{i}]")
    elif isinstance(expected, float) and not isinstance(expected, bool):
        assert actual == pytest.approx(expected, abs=1e-9), path
    else:
        assert actual == expected, path


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, out, _ = run(CASES[name])
    assert code == 0
    doc = json.loads(out)
    assert list(doc) == ["command", "scenario", "report", "numeric_policy", "seed"]
    assert_matches(doc, json.loads((GOLDEN / f"{name}.json").read_text()))


@pytest.mark.parametrize("name", sorted(CASES))
def test_byte_identical_reruns(name):
    assert run(CASES[name])[1] == run(CASES[name])[1]


def test_verify_thm1_sep_values():
    doc = json.loads(run(CASES["verify_thm1_sep"])[1])
    assert doc["report"]["verdict"] == "CONDITIONAL"
    assert doc["report"]["transferred_probability"] == pytest.approx(0.5, abs=1e-12)
    assert doc["report"]["completeness"]["verdict"] == "SUBNORMALIZED"


def test_verify_ex_2x4_values():
    doc = json.loads(run(CASES["verify_ex_2x4"])[1])
    assert doc["report"]["verdict"] == "DETERMINISTIC"


def test_bounds_value():
    doc = json.loads(run(CASES["bounds_2x3"])[1])
    assert doc["report"] == {"satisfied": False}


def test_protocol_survival_in_report():
    doc = json.loads(run(CASES["protocol_three_qubit"])[1])
    assert doc["report"]["rounds"] == 2
    assert doc["report"]["survival"]["verdict"] == "HOLDS"
    code, out, _ = run(["protocol", "--family", "thm1-locc", "--d", "2"])
    assert code == 0 and json.loads(out)["report"]["survival"]["verdict"] == "FLAGGED"


def test_protocol_from_program_file(tmp_path):
    code, out, _ = run(["construct", "--family", "three-qubit"])
    prog = json.loads(out)["report"]["protocol"]
    path = tmp_path / "prog.json"
    path.write_text(json.dumps(prog))
    code, out2, _ = run(["protocol", "--family", "three-qubit", "--program", str(path)])
    assert code == 0
    assert json.loads(out2)["report"]["distillation"]["verdict"] == "DETERMINISTIC"


def test_construct_contains_states_and_instrument():
    code, out, _ = run(["construct", "--family", "thm2-ii", "--d", "3", "--k1", "1", "--k2", "1"])
    rep = json.loads(out)["report"]
    assert code == 0
    assert rep["schmidt_ranks"] == {"psi1": [3, 3, 3], "psi2": [3, 3, 3]}
    assert len(rep["instrument"]["kraus"]) == 2 and "protocol" not in rep


def test_search_command_warm_start():
    code, out, _ = run(["search", "--family", "thm1-locc", "--d", "2", "--warm-start", "printed",
                        "--restarts", "1", "--max-iter", "50"])
    assert code == 0
    assert json.loads(out)["report"]["verdict"] == "FEASIBLE"


def test_sweep_csv():
    code, out, _ = run(["sweep", "--d-max", "3", "--w-grid", "0.2,0.7"])
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0].split(",") == SWEEP_COLUMNS
    rows = [dict(zip(SWEEP_COLUMNS, ln.split(","))) for ln in lines[1:]]
    verdicts = {r["family"]: r["verdict"] for r in rows}
    assert verdicts["thm1-sep"] == "CONDITIONAL" and verdicts["three-qubit"] == "DETERMINISTIC"
    assert all(r["filters_to_psi1"] == "True" for r in rows)


def test_sweep_json_format():
    code, out, _ = run(["sweep", "--families", "ex-2x4", "--w-grid", "0.5", "--format", "json"])
    assert code == 0 and json.loads(out)["report"][0]["verdict"] == "DETERMINISTIC"


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["verify", "--family", "nope"],
    ["verify", "--family", "thm1-sep", "--d", "3", "--k1", "1", "--k2", "1"],
    ["verify", "--fam", "ex-2x4"],
    ["verify", "--family", "bell-mix"],
    ["bounds", "--kind", "bipartite-sep"],
    ["verify", "--family", "ex-2x4", "--format", "csv"],
    ["verify", "--family", "ex-2x4", "--w", "1.0"],
])
def test_bad_arguments_exit_2(argv):
    code, out, err = run(argv)
    assert code == 2 and out == "" and err


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "thm1-sep", "d": 2, "k1": 1, "w": 0.3}))
    assert run(["verify", "--config", str(cfg)])[1] == run(CASES["verify_thm1_sep"])[1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    assert run(["verify", "--config", str(bad)])[0] == 2


def test_policy_override_reported():
    doc = json.loads(run(["verify", "--family", "ex-2x4", "--rank-tol", "1e-8"])[1])
    assert doc["numeric_policy"]["rel_tol"] == 1e-8


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, 2 ** -0.5, 1e-300, 123456789.123):
        assert float(format_float(x)) == x
    assert format_float(1.0) == "1.0"
    assert dumps({"a": [1, 0.5, None, True]}) == '{"a": [1, 0.5, null, true]}\n'


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "thm1-sep", "d": 2, "k1": 1, "w": 0.9}))
    doc = json.loads(run(["verify", "--config", str(cfg), "--w", "0.3"])[1])
    assert doc["scenario"]["w"] == 0.3
