import json

import pytest

from presym.cli import main

GOLDEN = {
    "stabilize-capri-sode": ["stabilize", "--example", "capri", "--sode"],
    "stabilize-conformal": ["stabilize", "--example", "conformal"],
    "stabilize-capri": ["stabilize", "--example", "capri"],
    "reduce-capri-s": ["reduce", "--example", "capri-s", "--mu", "-1,-1", "--route", "complete"],
    "reduce-autonomous-r2": ["reduce", "--example", "autonomous-r2", "--mu", "1"],
}

NOT_CLOSED = """\
name = broken
coordinates = x y z
omega = z dx^dy
hamiltonian = x
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_example_commands_match_their_golden_files(name, capsys, golden_dir):
    code, out, _ = run(capsys, *GOLDEN[name], "--report", "json")
    assert code == 0
    assert out == (golden_dir / f"{name}.json").read_text(encoding="utf-8")


def test_golden_structure(golden_dir):
    # the frozen files carry the structural facts, checked here in plain terms
    def load(name):
        return json.loads((golden_dir / f"{name}.json").read_text(encoding="utf-8"))

    sode = load("stabilize-capri-sode")
    assert [g["constraints"] for g in sode["generations"][1:]] == [["x1", "y1"], ["u1", "v1"]]
    assert sode["final"]["dimension"] == 8 and sode["solution"]["free_parameters"] == []
    assert load("stabilize-capri")["final"]["dimension"] == 10
    assert len(load("stabilize-conformal")["final"]["constraints"]) == 3
    red = load("reduce-capri-s")
    assert red["quotient_dim"] == 4 and red["symplectic"]
    auto = load("reduce-autonomous-r2")
    assert auto["level_constraints"] == ["1/2*p1^2 + 1/2*q2^2 + 1/2*p2^2 + q1 - 1"]
    assert auto["reduced_rank"] == 2


def test_json_is_byte_stable_for_a_seed(capsys):
    argv = ["stabilize", "--example", "conformal", "--report", "json", "--seed", "7"]
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first


def test_text_report(capsys):
    code, out, _ = run(capsys, "stabilize", "--example", "capri", "--sode")
    assert code == 0 and "final dimension 8" in out


def test_wrong_mu_arity_is_a_usage_error(capsys):
    code, _, err = run(capsys, "reduce", "--example", "capri-s", "--mu", "1")
    assert code == 1 and "--mu" in err


def test_partial_point_is_a_usage_error(capsys):
    code, _, err = run(capsys, "reduce", "--example", "capri-s", "--mu", "-1,-1", "--point", "x2=1")
    assert code == 1


def test_unknown_option_exits_one(capsys):
    assert run(capsys, "stabilize", "--example", "capri", "--frobnicate")[0] == 1


def test_all_routes_agree(capsys):
    code, out, _ = run(capsys, "reduce", "--example", "capri", "--mu", "-1,-1,0,0", "--route", "all",
                       "--report", "json")
    assert code == 0
    assert json.loads(out)["agree"]


def test_verify_capri_passes(capsys):
    code, out, _ = run(capsys, "verify", "--example", "capri", "--report", "json")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    names = [row["check"] for row in data["checks"]]
    assert names[0] == "closedness" and "pfaff" in names


def test_verify_conformal_kernel_row(capsys):
    code, out, _ = run(capsys, "verify", "--example", "conformal", "--report", "json")
    rows = {r["check"]: r for r in json.loads(out)["checks"]}
    assert code == 0
    assert rows["kernel inside generator span"]["passed"]
    assert sum(name.startswith("locally hamiltonian") for name in rows) == 5


def test_verify_autonomous_reports_the_kernel_row(capsys):
    code, out, _ = run(capsys, "verify", "--example", "autonomous-r2")
    assert code == 3
    assert any(line.startswith("kernel inside generator span") and "FAIL" in line
               for line in out.splitlines())


def test_verify_flags_a_non_closed_model(capsys, tmp_path):
    path = tmp_path / "broken.model"
    path.write_text(NOT_CLOSED)
    code, out, _ = run(capsys, "verify", "--model", str(path))
    assert code == 3
    assert out.startswith("closedness") and "FAIL" in out.splitlines()[0]


def test_model_file_parse_error_names_the_line(capsys, tmp_path):
    path = tmp_path / "typo.model"
    path.write_text("coordinates = x y\nomgea = dx^dy\n")
    code, _, err = run(capsys, "stabilize", "--model", str(path))
    assert code == 1 and "line 2" in err


def test_missing_model_file(capsys, tmp_path):
    assert run(capsys, "stabilize", "--model", str(tmp_path / "absent"))[0] == 1


def test_dumped_example_runs_from_a_file(capsys, tmp_path):
    code, text, _ = run(capsys, "examples", "--dump", "capri")
    assert code == 0
    path = tmp_path / "capri.model"
    path.write_text(text)
    code, out, _ = run(capsys, "stabilize", "--model", str(path), "--sode", "--report", "json")
    assert code == 0 and json.loads(out)["final"]["dimension"] == 8


def test_examples_listing(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == [
        "autonomous-r2", "capri", "capri-s", "conformal"]


def test_bifurcation_exits_two(capsys, tmp_path):
    path = tmp_path / "bif.model"
    path.write_text("coordinates = q p z\nomega = dq^dp\nhamiltonian = 1/2*z^2*q + z\n")
    assert run(capsys, "stabilize", "--model", str(path))[0] == 2
