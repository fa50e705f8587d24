import csv
import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from peakshave.cli import run_cli
from peakshave.config import StudyConfig, config_from_dict, load_config
from peakshave.errors import ProfileError, ValidationError
from peakshave.io import load_profile, parse_profile, profile_to_csv, write_profile
from peakshave.params import DayProfile

values = st.floats(0.0, 1e4, allow_nan=False)


def rows(n):
    return "hour,load_mw,pv_mw\n" + "".join(f"{h},1.0,0.5\n" for h in range(n))


def test_bundled_profile(profile):
    assert profile.n_intervals == 24 and profile.dt == 1.0
    assert max(profile.load) == pytest.approx(7.66)
    assert max(range(24), key=lambda h: profile.pv[h]) == 13


def test_row_count():
    with pytest.raises(ProfileError, match="expected 24 rows"):
        parse_profile(rows(23))
    assert parse_profile(rows(24)).n_intervals == 24


def test_comments_and_column_order():
    text = "# note\nload_mw,hour,pv_mw\n" + "".join(f"2.0,{h},0.0\n" for h in range(24))
    assert parse_profile(text).load == (2.0,) * 24


def test_missing_column():
    with pytest.raises(ProfileError, match="pv_mw"):
        parse_profile("hour,load_mw\n" + "0,1\n" * 24)


def test_bad_cell_named():
    text = rows(24).replace("5,1.0", "5,abc")
    with pytest.raises(ProfileError, match=r"row 7, column 'load_mw'"):
        parse_profile(text)


def test_negative_load_rejected():
    with pytest.raises(ProfileError):
        parse_profile(rows(24).replace("3,1.0", "3,-1.0"))


def test_missing_file(tmp_path):
    with pytest.raises(ProfileError):
        load_profile(tmp_path / "none.csv")


@given(st.lists(values, min_size=24, max_size=24), st.lists(values, min_size=24, max_size=24))
def test_profile_round_trip(load, pv):
    original = DayProfile(load, pv)
    buf = io.StringIO()
    write_profile(original, buf, comment="round trip")
    assert parse_profile(buf.getvalue()) == original


def test_quarter_hour_profile():
    p = DayProfile([1.0] * 96, [0.0] * 96, dt=0.25)
    assert parse_profile(profile_to_csv(p), dt=0.25) == p


# -- config -----------------------------------------------------------------

def test_default_config():
    assert load_config("default") == StudyConfig()
    assert load_config(None) == StudyConfig()


def test_yaml_config(tmp_path, profile):
    (tmp_path / "day.csv").write_text(profile_to_csv(profile))
    (tmp_path / "study.yaml").write_text(
        "cell:\n  t_end_cal: inf\nstorage:\n  e_cap: 2\ntariff:\n"
        "  prices: {peak: 0.2, normal: 0.1, valley: 0.04}\n"
        "  bands:\n    peak: [8, 9, 10, 11, 17, 18, 19, 20]\n"
        "    normal: [12, 13, 14, 15, 16, 21, 22, 23]\n"
        "    valley: [0, 1, 2, 3, 4, 5, 6, 7]\n"
        "profile: day.csv\nsegments: 12\n"
    )
    cfg = load_config(tmp_path / "study.yaml")
    assert cfg.storage.e_cap == 2.0
    assert cfg.cell.t_end_cal == float("inf")
    assert cfg.tariff.peak_price == 0.2
    assert cfg.segments == 12
    assert load_profile(cfg.profile) == profile


@pytest.mark.parametrize("raw", [
    {"segmnets": 4},
    {"cell": {"c00": 1}},
    {"c_end": 1.5},
    {"tariff": {"bands": {"peak": [0]}}},
    {"spacing": "cubic"},
    {"storage": {"e_cap": "big"}},
])
def test_config_rejects(raw):
    with pytest.raises(ValidationError):
        config_from_dict(raw)


# -- CLI --------------------------------------------------------------------

def cli(capsys, *args):
    code = run_cli(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_threshold_command(capsys):
    code, out, _ = cli(capsys, "threshold", "--config", "default")
    assert code == 0
    assert "total_threshold = 0.49265" in out
    assert "y = 0.54739" in out
    assert "clr_limit = 1.0823" in out
    assert "battery_scrap_efficiency_inv2 = 0.60821" in out


def test_maxcycles_command(capsys):
    code, out, _ = cli(capsys, "maxcycles", "--criterion", "capacity:0.8")
    table = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(table) == 10
    assert float(table[-1]["dod"]) == 1.0
    assert float(table[-1]["max_cycles"]) == pytest.approx(340.2, abs=0.05)


def test_scenarios_command(capsys, report):
    code, out, _ = cli(capsys, "scenarios", "--profile", "jiangsu_typical.csv", "--format", "json")
    assert code == 0
    rows = {r["scenario"]: r for r in json.loads(out)["scenarios"]}
    assert rows["S4"]["lifetime_days"] > rows["S3"]["lifetime_days"] > rows["S2"]["lifetime_days"]
    assert rows["S3"]["daily_total_cost"] == report.row("S3").daily_total_cost


def test_scenarios_formats_agree(capsys):
    _, as_csv, _ = cli(capsys, "scenarios", "--format", "csv")
    _, as_json, _ = cli(capsys, "scenarios", "--format", "json")
    table = list(csv.DictReader(io.StringIO(as_csv)))
    for a, b in zip(table, json.loads(as_json)["scenarios"]):
        for key, v in b.items():
            if isinstance(v, float):
                assert float(a[key]) == v


def test_deterministic(capsys):
    first = cli(capsys, "optimize", "--criterion", "efficiency")
    second = cli(capsys, "optimize", "--criterion", "efficiency")
    assert first == second
    assert first[0] == 0


def test_curves_command(capsys, tmp_path):
    out_file = tmp_path / "aging.csv"
    code, _, _ = cli(capsys, "curves", "--kind", "aging", "--points", "3", "--out", str(out_file))
    lines = out_file.read_text().splitlines()
    assert code == 0 and lines[0] == "cycles,capacity,efficiency" and len(lines) == 4
    code, out, _ = cli(capsys, "curves", "--kind", "pwl", "--criterion", "capacity", "--segments", "4")
    assert code == 0 and len(out.splitlines()) == 6


def test_simulate_command(capsys):
    code, out, err = cli(capsys, "simulate", "--criterion", "capacity", "--no-feedback",
                         "--format", "json")
    assert code == 0
    assert json.loads(out)["reason"] == "loss"
    assert "end of life" in err


@pytest.mark.parametrize("args,code,tag", [
    (["maxcycles", "--criterion", "bogus"], 1, "error[validation]"),
    (["threshold", "--config", "missing.yaml"], 1, "error[validation]"),
    (["optimize", "--profile", "missing.csv"], 1, "error[profile]"),
    (["frobnicate"], 1, "error[validation]"),
    (["maxcycles", "--format", "text"], 1, "error[validation]"),
])
def test_error_exit_codes(capsys, args, code, tag):
    got, _, err = cli(capsys, *args)
    assert got == code
    assert err.startswith(tag)


def test_model_error_exit_code(capsys, tmp_path):
    cfg = tmp_path / "flat.yaml"
    cfg.write_text("tariff:\n  prices: {peak: 0.153, normal: 0.15, valley: 0.145}\n")
    code, _, err = cli(capsys, "threshold", "--config", str(cfg))
    assert code == 2
    assert err.startswith("error[UneconomicAtBirth]")
