import csv
import io

import pytest
from helpers import RECONSTRUCTED_L

from limid.cli import EXIT_DISAGREE, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, compare, main
from limid.model import load_limid, validate


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def small(tmp_path, capsys):
    path = tmp_path / "small.json"
    assert run(["gen", "--seed", 4, "--vars", 5, "-o", path], capsys)[0] == EXIT_OK
    return path


def rows(text):
    return {r["Algorithm"]: r for r in csv.DictReader(io.StringIO(text))}


def test_solve_text(small, capsys):
    code, out, _ = run(["solve", small, "--arch", "lp"], capsys)
    assert code == EXIT_OK
    assert "\nEU " in out and "architecture LP" in out
    assert out.count("decision ") == 2


def test_solve_csv_has_counter_rows(small, capsys):
    code, out, _ = run(["solve", small, "--arch", "ss", "--report", "csv"], capsys)
    assert code == EXIT_OK
    assert "Algorithm,Sums,Mults,Divs,Subs,Total" in out
    assert out.rstrip().splitlines()[-1].startswith("EU,")


def test_solve_is_deterministic(small, capsys):
    assert run(["solve", small], capsys)[1] == run(["solve", small], capsys)[1]


def test_unknown_arch_is_usage_error(small, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(small), "--arch", "junction"])
    assert exc.value.code == EXIT_INPUT


def test_hugin_general_refused(tmp_path, capsys):
    path = tmp_path / "g.json"
    run(["gen", "--seed", 9, "--general", "-o", path], capsys)
    code, _, err = run(["solve", path, "--arch", "hugin", "--general"], capsys)
    assert code == EXIT_SOLVER and "hugin-cannot-retract" in err


def test_not_soluble_is_solver_error(tmp_path, capsys):
    path = tmp_path / "g.json"
    run(["gen", "--seed", 9, "--general", "-o", path], capsys)
    code, _, err = run(["solve", path], capsys)
    assert code == EXIT_SOLVER and "not-soluble" in err
    assert run(["solve", path, "--general"], capsys)[0] == EXIT_OK


def test_bad_input_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(["solve", path], capsys)
    assert code == EXIT_INPUT and err.startswith("error:")
    assert run(["solve", tmp_path / "missing.json"], capsys)[0] == EXIT_INPUT


def test_gen_deterministic_and_valid(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["gen", "--seed", 1, "-o", a], capsys)
    run(["gen", "--seed", 1, "-o", b], capsys)
    assert a.read_bytes() == b.read_bytes()
    validate(load_limid(a))


def test_gen_infeasible(capsys):
    code, _, err = run(["gen", "--seed", 1, "--vars", 2, "--decisions", 3], capsys)
    assert code == EXIT_INPUT and "infeasible" in err


def test_compare_reconstructed_ordering(capsys):
    code, out, _ = run(["compare", RECONSTRUCTED_L], capsys)
    assert code == EXIT_OK
    r = rows(out)
    lp, hugin, ss = (int(r[k]["Total"]) for k in ("LP", "HUGIN", "S-S"))
    assert lp < hugin < ss
    assert int(r["Initialization (LP)"]["Total"]) == 0
    for row in r.values():
        assert int(row["Total"]) == sum(int(row[c]) for c in ("Sums", "Mults", "Divs", "Subs"))


def test_compare_single_clique(tmp_path, capsys):
    path = tmp_path / "one.json"
    run(["gen", "--seed", 2, "--vars", 2, "--decisions", 1, "--values", 1, "-o", path], capsys)
    code, out, _ = run(["compare", path], capsys)
    assert code == EXIT_OK and set(rows(out)) >= {"S-S", "HUGIN", "LP"}


def test_compare_general_skips_hugin(tmp_path, capsys):
    path = tmp_path / "g.json"
    run(["gen", "--seed", 9, "--general", "-o", path], capsys)
    code, out, _ = run(["compare", path, "--general"], capsys)
    assert code == EXIT_OK and "HUGIN" not in rows(out)


def test_disagreement_exit_code(small, capsys, monkeypatch):
    import limid.cli as cli
    real = cli.solve

    def skewed(limid, arch, general=False):
        res = real(limid, arch, general=general)
        if arch == "lp":
            res.eu += 1.0
        return res

    monkeypatch.setattr(cli, "solve", skewed)
    code, _, err = run(["compare", small], capsys)
    assert code == EXIT_DISAGREE and "architecture-disagreement" in err


def test_compile_dump(small, capsys):
    code, out, _ = run(["compile", small, "--dump-jt"], capsys)
    assert code == EXIT_OK and "clique 0:" in out
    code, out2, _ = run(["compile", small, "--no-reduce"], capsys)
    assert code == EXIT_OK and out2.strip().endswith(tuple("0123456789"))


def test_oracle_matches_solve(small, capsys):
    _, out, _ = run(["oracle", small], capsys)
    eu = float(out.strip().splitlines()[-1].split()[1])
    res = compare(load_limid(small))
    assert eu == pytest.approx(res["lp"].eu, rel=1e-9)
    assert run(["oracle", small, "--cap", 4], capsys)[0] == EXIT_SOLVER
