import csv
import json
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from eklab.cli import CACHE_ENV, SCHEMA, RunConfig, main, run
from eklab.errors import IntegrityError, UsageError


def _run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path / "out")])


def _json(tmp_path, name):
    return json.loads((tmp_path / "out" / name).read_text())


def test_check_harmonic_exit_0(tmp_path):
    assert _run(tmp_path, "check", "--family", "harmonic", "--n", "100000", "--C", "1", "--D", "1",
                "--max-k", "4") == 0
    report = _json(tmp_path, "check.json")
    assert report["schema"] == SCHEMA
    assert report["c4"]["failures"] == 0 and report["c5"]["failures"] == 0
    with open(tmp_path / "out" / "check_c5.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["n", "d_or_p", "k", "eps_sum", "bound", "pass"]
    assert {r["pass"] for r in rows} == {"true"}


def test_control_exit_2(tmp_path):
    assert _run(tmp_path, "control", "--p", "2", "--schedule", "1000,10000,100000") == 2
    assert _json(tmp_path, "control.json")["verdict"] == "nonvanishing"


def test_check_uniform_zero_constants(tmp_path):
    assert _run(tmp_path, "check", "--family", "uniform", "--n", "1000", "--C", "0", "--D", "0") == 0


def test_check_failure_only_when_asserted(tmp_path):
    assert _run(tmp_path, "check", "--family", "zeroed[2]", "--n", "1000", "--C", "0") == 2
    assert _run(tmp_path, "check", "--family", "zeroed[2]", "--n", "1000") == 0
    assert _json(tmp_path, "check.json")["c4"]["minimal_C"] > 0


def test_check_with_trend(tmp_path):
    assert _run(tmp_path, "check", "--family", "harmonic", "--n", "1000", "--p", "2",
                "--schedule", "1000,10000,100000", "--tol", "0.1") == 0
    assert _json(tmp_path, "check.json")["c6"]["verdict"] == "converging-to-zero"


@pytest.mark.parametrize("args", [
    ["check", "--n", "10"],
    ["check", "--family", "zipf(s=0)", "--n", "10"],
    ["check", "--family", "zipf(", "--n", "10"],
    ["bogus"],
    ["limits", "--study", "zeta"],
    ["pmf", "--family", "uniform", "--n", "1"],
])
def test_errors_exit_1(tmp_path, args, capsys):
    assert _run(tmp_path, *args) == 1


def test_config_round_trip_and_unknown_keys(tmp_path):
    cfg = RunConfig("check", family="convex[0.3:harmonic; 0.7:uniform]", n=1000, C=1.0,
                    schedule=[10, 100, 1000], p=2, out=str(tmp_path))
    text = cfg.to_text()
    assert RunConfig.from_text(text) == cfg
    assert RunConfig.from_text(text).to_text() == text
    with pytest.raises(UsageError, match="bogus"):
        RunConfig.from_text(text + "bogus=1\n")
    with pytest.raises(UsageError):
        RunConfig.from_text("family=uniform\n")


configs = st.builds(
    RunConfig,
    command=st.sampled_from(["sieve", "pmf", "check", "moments", "cdf", "limits", "control"]),
    family=st.sampled_from([None, "uniform", "zipf(s=1.01)", "convex[0.5:harmonic; 0.5:uniform]"]),
    n=st.one_of(st.none(), st.integers(2, 10**8)),
    schedule=st.one_of(st.none(), st.lists(st.integers(2, 10**7), min_size=1, max_size=4)),
    C=st.one_of(st.none(), st.floats(0, 10, allow_nan=False)),
    D=st.one_of(st.none(), st.floats(0, 10, allow_nan=False)),
    max_k=st.integers(1, 8),
    all_primes=st.booleans(),
    a_schedule=st.one_of(st.none(), st.lists(st.floats(0.1, 100), min_size=1, max_size=3)),
    path=st.one_of(st.none(), st.lists(st.tuples(st.floats(0.1, 1), st.floats(1, 3)), min_size=1, max_size=3)),
    threads=st.one_of(st.none(), st.integers(1, 8)),
)


@settings(max_examples=100, deadline=None)
@given(configs)
def test_config_round_trip_property(cfg):
    text = cfg.to_text()
    again = RunConfig.from_text(text)
    assert again == cfg and again.to_text() == text


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command=check\nfamily=zeroed[2]\nn=1000\nC=0.0\n")
    assert main(["check", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 2
    assert main(["check", "--config", str(cfg), "--C", "1", "--out", str(tmp_path / "out")]) == 0
    cfg.write_text("command=check\nfamily=uniform\nn=10\ncolour=red\n")
    assert main(["check", "--config", str(cfg)]) == 1


def test_cache_and_manifest(tmp_path, monkeypatch):
    cache = tmp_path / "cache"
    monkeypatch.setenv(CACHE_ENV, str(cache))
    assert _run(tmp_path, "cdf", "--family", "harmonic", "--n", "20000") == 0
    first = _json(tmp_path, "manifest.json")
    assert first["schema"] == SCHEMA and first["exit_status"] == 0
    assert first["cache"][0]["action"] == "written"
    assert set(first["outputs"]) == {"cdf.csv", "cdf.gp", "cdf.json"}
    csv1 = (tmp_path / "out" / "cdf.csv").read_bytes()
    assert _run(tmp_path, "cdf", "--family", "harmonic", "--n", "20000", "--threads", "4") == 0
    second = _json(tmp_path, "manifest.json")
    assert second["cache"][0]["action"] == "loaded"
    assert second["cache"][0]["sha256"] == first["cache"][0]["sha256"]
    assert (tmp_path / "out" / "cdf.csv").read_bytes() == csv1


def test_cache_corruption_detected(tmp_path):
    cache = tmp_path / "cache"
    assert _run(tmp_path, "sieve", "--n", "5000", "--cache-dir", str(cache)) == 0
    data = next(cache.glob("*.ekw"))
    raw = bytearray(data.read_bytes())
    raw[len(raw) // 2] ^= 0x01
    data.write_bytes(bytes(raw))
    assert _run(tmp_path, "sieve", "--n", "5000", "--cache-dir", str(cache)) == 1
    with pytest.raises(IntegrityError):
        run(RunConfig("sieve", n=5000, cache_dir=str(cache), out=str(tmp_path / "o2")))


def test_csv_float_format(tmp_path):
    assert _run(tmp_path, "pmf", "--family", "harmonic", "--n", "10") == 0
    lines = (tmp_path / "out" / "pmf.csv").read_text().splitlines()
    assert lines[0] == "i,pmf,epsilon"
    value = lines[1].split(",")[1]
    assert float(value) == pytest.approx(2520 / 7381, rel=1e-15)
    assert len(value.replace("0.", "", 1).lstrip("0")) == 17


@pytest.mark.parametrize("args, name", [
    (["moments", "--family", "uniform", "--schedule", "1000,10000"], "moments.csv"),
    (["limits", "--study", "zeta", "--a-schedule", "1,2"], "limits.csv"),
    (["limits", "--study", "lz", "--path", "0.9:1.1,1:2", "--n", "10000"], "lz.csv"),
    (["limits", "--study", "dependence", "--s-values", "0.9,0.99"], "dependence.csv"),
    (["sieve", "--n", "1000", "--cutoff", "10"], "sieve.json"),
])
def test_other_commands(tmp_path, args, name):
    assert _run(tmp_path, *args) == 0
    assert (tmp_path / "out" / name).exists()
    assert name in _json(tmp_path, "manifest.json")["outputs"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "eklab", "check", "--family", "uniform", "--n", "1000",
                           "--C", "0", "--D", "0", "--out", str(tmp_path)], capture_output=True)
    assert proc.returncode == 0
