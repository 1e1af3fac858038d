import pytest

from dosnsim import bench, cli
from dosnsim.bench import CSV_HEADER
from dosnsim.models import EncryptionGroup


class NeverRekeys(EncryptionGroup):
    def _leave(self, u):
        pass


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("0 CREATE 1\n1 JOIN 2\n2 LEAVE 2\n3 PUBLISH 1 4\n")
    return path


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "r.csv"
    code = cli.main(["sweep", "--models", "lkh", "--gtypes", "G4", "--n", "10", "--p", "2",
                     "--content-size", "100", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 1 + 7


def test_sweep_with_profile(tmp_path):
    prof = tmp_path / "p.txt"
    prof.write_text("base=ctr\n")
    out = tmp_path / "r.csv"
    assert cli.main(["sweep", "--models", "encryption", "--gtypes", "G2", "--n", "10", "--p", "1",
                     "--profile", str(prof), "--out", str(out)]) == 0


@pytest.mark.parametrize("argv", [
    [],
    ["sweep"],
    ["sweep", "--models", "abe", "--out", "x"],
    ["sweep", "--gtypes", "G1", "--out", "x"],
    ["sweep", "--n", "0", "--out", "x"],
    ["sweep", "--degree", "1", "--out", "x"],
    ["compare", "--category", "lurker", "--out", "x"],
    ["scenario", "--file", "missing.txt", "--model", "lkh", "--gtype", "G2"],
])
def test_usage_errors_exit_1(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_bad_scenario_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("0 CREATE 1\n1 LEAVE 5\n")
    assert cli.main(["scenario", "--file", str(path), "--model", "lkh", "--gtype", "G3"]) == 1
    assert "line 2" in capsys.readouterr().err


def test_scenario_ok(scenario, capsys):
    assert cli.main(["scenario", "--file", str(scenario), "--model", "allocation", "--gtype", "G3"]) == 0
    assert "no divergence" in capsys.readouterr().err


def test_divergence_exits_2(scenario, monkeypatch, capsys):
    monkeypatch.setitem(bench.MODELS, "encryption", NeverRekeys)
    # a leaver still holding the current key reads content published after it left
    assert cli.main(["scenario", "--file", str(scenario), "--model", "encryption", "--gtype", "G4"]) == 2
    assert "divergence" in capsys.readouterr().err


def test_compare(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["compare", "--category", "passive", "--out", str(out)]) == 0
    assert out.read_text().startswith("category,")
