import json

import numpy as np
import pytest

from pg3 import cli
from pg3.clifford import left_matrix
from pg3.collineation import Case, automorphism_verdict, canonical_matrix
from pg3.config import CONFIG_ENV, RunConfig
from pg3.geometry import ProjLine, line_distance


def write_matrix(tmp_path, M, name="m.json"):
    path = tmp_path / name
    path.write_text(json.dumps(np.asarray(M, dtype=float).tolist()))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_example(tmp_path, capsys):
    code, out, _ = run(capsys, "classify", write_matrix(tmp_path, np.diag([1.0, 1, 2, 3])))
    data = json.loads(out)
    assert code == 0
    assert data["label"] == "B1" and data["automorphism"] == "Excluded" and data["proposition"] == "4.3"


def test_classify_identity(tmp_path, capsys):
    code, out, _ = run(capsys, "classify", write_matrix(tmp_path, np.eye(4)))
    data = json.loads(out)
    assert data["label"] == "Trivial" and data["compactness"] == "CompactClosure"


def test_classify_output_is_library_serialization(tmp_path, capsys):
    M = canonical_matrix(Case.C3, {"r": 0.5, "s": 1.0})
    _, out, _ = run(capsys, "classify", write_matrix(tmp_path, M))
    assert out == cli.dumps(automorphism_verdict(M).to_json()) + "\n"


def test_classify_errors(tmp_path, capsys):
    assert run(capsys, "classify", write_matrix(tmp_path, np.zeros((4, 4))))[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "classify", str(bad))[0] == 2
    assert run(capsys, "classify", write_matrix(tmp_path, np.eye(3)))[0] == 2
    assert run(capsys, "classify", str(tmp_path / "missing.json"))[0] == 2


def test_ill_conditioned_exit(tmp_path, capsys):
    A = np.eye(4) * 3
    A[:2, :2] = [[1.0, 1.0], [1e-7, 1.0]]
    assert run(capsys, "classify", write_matrix(tmp_path, A))[0] == 4


def test_argparse_errors_exit_2(capsys):
    assert pytest.raises(SystemExit, cli.main, ["nonsense"]).value.code == 2
    assert pytest.raises(SystemExit, cli.main, ["classify", "x.json", "--format", "xml"]).value.code == 2


def test_batch_parallel_ordered(tmp_path, capsys):
    paths = [write_matrix(tmp_path, np.diag([1.0, 1, 2, k]), f"m{k}.json") for k in (3, 5, 7)]
    _, serial, _ = run(capsys, "classify", *paths)
    _, parallel, _ = run(capsys, "classify", "--parallel", *paths)
    assert serial == parallel
    assert np.allclose([d["params"]["s"] for d in json.loads(serial)], [3.0, 5.0, 7.0])


def test_clifford_commands(capsys):
    code, out, _ = run(capsys, "clifford", "parallel", "--point", "[0,0,1,0]",
                       "--line", "[[1,0,0,0],[0,1,0,0]]")
    L = ProjLine(np.array(json.loads(out)["basis"]))
    assert code == 0 and line_distance(L, ProjLine(np.eye(4)[:, 2:])) < 1e-12
    _, out, _ = run(capsys, "clifford", "check", "--line", "[[1,0,0,0],[0,1,0,0]]",
                    "--other", "[[0,0,1,0],[0,0,0,1]]")
    assert json.loads(out)["parallel"] is True
    _, out, _ = run(capsys, "clifford", "class", "--line", '{"plucker": [1,0,0,0,0,0]}')
    assert np.allclose(np.abs(json.loads(out)["invariant"]), [1, 0, 0])
    assert run(capsys, "clifford", "class", "--line", "[[1,0,0]]")[0] == 2


def test_falsify_a2(tmp_path, capsys):
    M = canonical_matrix(Case.A2, {"a": 1j, "b": 1.0})
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "falsify", write_matrix(tmp_path, M), "--trace", str(trace))
    cert = json.loads(out)["certificate"]
    assert code == 0 and cert["certified"] and cert["meet_residual"] < 1e-6
    assert trace.read_text().startswith("k,n,distance_to_limit,class_defect\n")


def test_falsify_csv_format(tmp_path, capsys):
    M = canonical_matrix(Case.C3, {"r": 0.5, "s": 1.0})
    code, out, _ = run(capsys, "falsify", write_matrix(tmp_path, M), "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "k,n,distance_to_limit,class_defect"


def test_falsify_possible(tmp_path, capsys):
    code, out, err = run(capsys, "falsify", write_matrix(tmp_path, left_matrix([0.6, 0.8, 0, 0])))
    data = json.loads(out)
    assert code == 6 and data["automorphism"] == "Possible" and data["invariance_defect"] < 1e-9
    assert "Possible" in err


def test_falsify_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[[1,2],")
    assert run(capsys, "falsify", str(bad))[0] == 2


def test_falsify_no_witness(tmp_path, capsys, monkeypatch):
    from pg3 import dynamics
    from pg3.errors import WitnessSearchFailed

    def fail(*args, **kwargs):
        raise WitnessSearchFailed("no luck", {"best": 1.0})

    monkeypatch.setattr(dynamics, "falsify_invariance", fail)
    M = canonical_matrix(Case.C5, {"r": 2.0, "s": 3.0, "t": 5.0})
    assert run(capsys, "falsify", write_matrix(tmp_path, M))[0] == 5


def test_dynamics_trace(tmp_path, capsys):
    M = canonical_matrix(Case.A1, {"a": 1j, "c": 2j})
    code, out, _ = run(capsys, "dynamics", "trace", write_matrix(tmp_path, M),
                       "--line", "[[1,0,0.3,0],[0,1,0,0.5]]", "--count", "8", "--format", "csv")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0].startswith("k,n,") and len(rows) == 9
    assert [int(r.split(",")[1]) for r in rows[1:4]] == [4, 8, 12]


def test_lemma_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "lemma", "avoid", "--line", "[[1,0,0,0],[0,1,0,0]]",
                       "--obstacles", '[[[0,0,1,0],[0,0,0,1]], [[1,0,0,0],[0,0,1,0]]]')
    assert code == 0 and json.loads(out)["clear"] is True
    code, out, _ = run(capsys, "lemma", "transversals", "--line", "[[1,0,0,0],[0,1,0,0]]",
                       "--other", "[[0,0,1,0],[1,0,0,1]]")
    assert code == 0 and json.loads(out)["defect"] < 1e-6
    code, _, _ = run(capsys, "lemma", "transversals", "--line", "[[1,0,0,0],[0,1,0,0]]",
                     "--other", "[[0,1,0,0],[0,0,1,0]]")
    assert code == 1
    path = write_matrix(tmp_path, np.diag([-1.0, 1, 1, 1]))
    code, out, _ = run(capsys, "lemma", "pencil", path, "--p", "[1,0,0,0]", "--q", "[0,1,0,0]")
    assert code == 0 and json.loads(out)["pencil_defect"] > 0.1


def test_seed_is_deterministic(capsys):
    args = ["lemma", "avoid", "--line", "[[1,0,0,0],[0,1,0,0]]"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]
    assert run(capsys, *args, "--seed", "1")[1] != run(capsys, *args, "--seed", "2")[1]


def test_config_env(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"format": "csv"}))
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    M = canonical_matrix(Case.C3, {"r": 0.5, "s": 1.0})
    _, out, _ = run(capsys, "falsify", write_matrix(tmp_path, M))
    assert out.startswith("k,n,")
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "classify", write_matrix(tmp_path, np.eye(4)))[0] == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "classify", write_matrix(tmp_path, np.eye(4)), "--output", str(target))
    assert code == 0 and out == "" and json.loads(target.read_text())["label"] == "Trivial"


def test_falsify_report_matches_cli(tmp_path, capsys):
    M = canonical_matrix(Case.C5, {"r": 2.0, "s": 3.0, "t": 5.0})
    _, out, _ = run(capsys, "falsify", write_matrix(tmp_path, M))
    code, report, _ = cli.falsify_report(M, RunConfig(), "left")
    assert out == cli.dumps(report) + "\n"


def test_falsify_respects_explicit_nmax(tmp_path, capsys):
    M = canonical_matrix(Case.A2, {"a": 1j, "b": 1.0})
    code, out, _ = run(capsys, "falsify", write_matrix(tmp_path, M), "--nmax", "1000")
    assert code == 5 and "error" in json.loads(out)
