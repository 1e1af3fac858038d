import csv
import io

import pytest

from dosnsim import bench
from dosnsim.bench import (CSV_HEADER, OracleDivergence, ResultRow, SweepConfig, emit_csv,
                           emit_summary, min_max, run_category_comparison, run_scenario, run_sweep)
from dosnsim.core import GroupType
from dosnsim.crypto import CBC_PROFILE, CTR_PROFILE
from dosnsim.models import EncryptionGroup

SMALL = SweepConfig(n_list=(10, 50), p_list=(0, 5), content_size=1000)
SCENARIO = "0 CREATE 1\n1 JOIN 2\n2 PUBLISH 2 7\n3 LEAVE 2\n4 JOIN 3\n5 PUBLISH 3 8\n"


@pytest.fixture(scope="module")
def small_rows():
    return run_sweep(SMALL)


def test_config_validation():
    with pytest.raises(ValueError, match="no models"):
        SweepConfig(models=())
    with pytest.raises(ValueError, match="unknown model"):
        SweepConfig(models=("abe",))
    with pytest.raises(ValueError):
        SweepConfig(n_list=(0,))


def test_defaults_mirror_grid():
    cfg = SweepConfig()
    assert cfg.n_list == (10, 50, 100, 1000, 10000) and cfg.p_list == (10, 50, 100)
    assert cfg.degree == 4 and cfg.content_size == 102400


def test_row_count(small_rows):
    # per point: owner/joiner/member for join, owner/leaver/member for leave, owner for publish
    assert len(small_rows) == 3 * 3 * 2 * 2 * 7


def test_ledger_closure(small_rows):
    for r in small_rows:
        setups = r.keygen + r.sym_enc + r.sym_dec
        t = (r.sym_bytes / 447e6 + setups * 0.216e-6 + r.asym_enc * 0.16e-3 + r.asym_dec * 6.08e-3)
        assert r.time_s == pytest.approx(t, rel=1e-9, abs=1e-15)


def test_profile_changes_times():
    cfg = SweepConfig(models=("encryption",), gtypes=(GroupType.G4,), n_list=(10,), p_list=(1,),
                      profile=CTR_PROFILE)
    pub = [r for r in run_sweep(cfg) if r.op == "publish"][0]
    assert pub.time_s == pytest.approx(CTR_PROFILE.time_for(pub.sym_bytes, 3, 0, 0))
    assert pub.time_s < CBC_PROFILE.time_for(pub.sym_bytes, 3, 0, 0)


def test_monotonicity():
    cfg = SweepConfig(n_list=(10, 100, 1000), p_list=(5, 50), content_size=1000)
    rows = {(r.model, r.gtype, r.op, r.role, r.n, r.p): r for r in run_sweep(cfg)}
    for gtype in ("G2", "G3", "G4"):
        # single-key leave grows with n
        times = [rows[("encryption", gtype, "leave", "owner", n, 5)].time_s for n in (10, 100, 1000)]
        assert times == sorted(times)
    for model in ("encryption", "lkh"):
        # content re-keying grows with p
        a, b = (rows[(model, "G3", "leave", "owner", 100, p)].time_s for p in (5, 50))
        assert b > a
    for model in ("encryption", "lkh"):
        pubs = {rows[(model, g, "publish", "owner", n, p)].time_s
                for g in ("G2", "G3", "G4") for n in (10, 100, 1000) for p in (5, 50)}
        assert len(pubs) == 1


def test_csv_format(small_rows, tmp_path):
    path = tmp_path / "r.csv"
    emit_csv(small_rows, path)
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert sum(line.startswith("model,") for line in lines) == 1
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert len(parsed) == len(small_rows)
    assert all("," not in r["time_s"] and float(r["time_s"]) >= 0 for r in parsed)
    keys = [(r["model"], r["gtype"], r["op"], r["role"], int(r["n"]), int(r["p"])) for r in parsed]
    assert keys == sorted(keys)


def test_determinism():
    assert bench.csv_text(run_sweep(SMALL)) == bench.csv_text(run_sweep(SMALL))


def test_min_max():
    assert min_max([1.0, 3.0, 2.0]) == [0.0, 1.0, 0.5]
    assert min_max([4.0, 4.0]) == [0.0, 0.0]


@pytest.mark.parametrize("category, p", [("passive", 2000), ("active", 8000)])
def test_category_comparison(category, p):
    cfg = SweepConfig(content_size=1000)
    s = run_category_comparison(category, cfg)
    assert (s.n, s.p) == (4000, p)
    assert len(s.rows) == 9 * 3
    for op in bench.OPS:
        for g in ("G2", "G3", "G4"):
            cells = [s.cell(op, g, m) for m in bench.ALL_MODELS]
            for attr in ("time_norm", "bytes_norm"):
                vals = [getattr(c, attr) for c in cells]
                assert all(0.0 <= v <= 1.0 for v in vals)
                assert max(vals) in (0.0, 1.0)
    buf = io.StringIO()
    emit_summary(s, buf)
    header = buf.getvalue().splitlines()[0].split(",")
    assert {"time_s", "bytes", "time_norm", "bytes_norm"} <= set(header)
    with pytest.raises(ValueError, match="unknown category"):
        run_category_comparison("lurker")


@pytest.mark.parametrize("model", bench.ALL_MODELS)
@pytest.mark.parametrize("gtype", list(GroupType))
def test_run_scenario(tmp_path, model, gtype):
    path = tmp_path / "s.txt"
    path.write_text(SCENARIO)
    rows = run_scenario(path, model, gtype)
    assert [r.op for r in rows] == ["create", "join", "publish", "leave", "join", "publish"]


class LeakyLeave(EncryptionGroup):
    """Fault injection: forgets to refresh the group key on leave."""

    def _leave(self, u):
        pass


def test_divergence_is_detected(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(SCENARIO)
    with pytest.raises(OracleDivergence, match="seq 3: user 2 content 7: oracle Deny, model Permit"):
        run_scenario(path, "encryption", GroupType.G3, group_cls=LeakyLeave)


def test_result_row_key():
    r = ResultRow("lkh", "G2", "join", "owner", 10, 5, 0.0, 0, 0, 0, 0, 0, 0, 0)
    assert r.key() == ("lkh", "G2", "join", "owner", 10, 5)
