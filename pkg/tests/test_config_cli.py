import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scar_thermo import config as cfgmod
from scar_thermo.cli import main, resolve_config, build_parser
from scar_thermo.errors import ConfigError
from scar_thermo.outputs import write_csv


def read_csv(path):
    raw = path.read_bytes()
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return raw, rows[0], rows[1:]


# -- configuration --------------------------------------------------------------

def test_defaults_round_trip():
    cfg = cfgmod.RunConfig()
    text = cfg.to_toml()
    again = cfgmod.parse_toml(text)
    assert again == cfg
    assert again.to_toml() == text


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 20), seed=st.integers(0, 2**64 - 1), k=st.integers(1, 10_000),
       tol=st.floats(1e-14, 1e-3), band=st.floats(0, 0.1), model=st.sampled_from(["gue", "xxz"]),
       emit=st.booleans())
def test_round_trip_property(n, seed, k, tol, band, model, emit):
    cfg = cfgmod.RunConfig(model=model, n_sites=n, base_seed=seed, n_instances=k,
                           emit_objective_samples=emit,
                           beta_search=cfgmod.SearchParams(tolerance=tol),
                           filters=cfgmod.FilterParams(r_band=band))
    once = cfgmod.parse_toml(cfg.to_toml())
    assert once == cfg
    assert cfgmod.parse_toml(once.to_toml()) == once


@pytest.mark.parametrize("text, field", [
    ("n_sites = 2", "n_sites"),
    ("n_sites = 40", "n_sites"),
    ("model = 'ising'", "model"),
    ("[beta_search]\ngrid_points = 10", "beta_search.grid_points"),
    ("[beta_search]\nrange_scale = inf", "beta_search.range_scale"),
    ("[xxz]\nb = nan", "xxz.b"),
    ("[filters]\nscar_position_band = [0.8, 0.2]", "filters.scar_position_band"),
    ("bogus = 1", "bogus"),
    ("[beta_search]\nbogus = 1", "beta_search.bogus"),
    ("base_seed = -1", "base_seed"),
    ("n_sites = 12.5", "n_sites"),
    ("n_sites = ", "config"),
])
def test_invalid_config_names_field(text, field):
    with pytest.raises(ConfigError) as info:
        cfgmod.parse_toml(text)
    assert info.value.field == field
    assert field in str(info.value)


def test_config_hash_ignores_plumbing():
    a = cfgmod.RunConfig()
    b = cfgmod.with_overrides(a, workers=8, output_dir="elsewhere")
    c = cfgmod.with_overrides(a, base_seed=1)
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_manifest_records_conventions():
    m = cfgmod.RunConfig().manifest(command="x")
    for key in ("config_hash", "rng", "gue_convention", "spin_operators", "canonical_ensemble",
                "seed_scheme", "filters", "beta_search", "code_version"):
        assert key in m
    assert m["command"] == "x"


def test_flag_file_env_precedence(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("workers = 3\nn_sites = 9\n")
    parser = build_parser()
    args = parser.parse_args(["ensemble", "--config", str(path)])
    assert resolve_config(args, {}).workers == 3
    assert resolve_config(args, {cfgmod.WORKERS_ENV: "5"}).workers == 5
    args = parser.parse_args(["ensemble", "--config", str(path), "--workers", "2", "--sites", "10"])
    cfg = resolve_config(args, {cfgmod.WORKERS_ENV: "5"})
    assert (cfg.workers, cfg.n_sites) == (2, 10)
    with pytest.raises(ConfigError):
        resolve_config(parser.parse_args(["ensemble"]), {cfgmod.WORKERS_ENV: "many"})


# -- CSV format -----------------------------------------------------------------

def test_csv_is_rfc4180(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ("a", "b", "c"), [[0.1, "x,y", None], [1 / 3, 'q"t', float("nan")]])
    raw = path.read_bytes()
    assert raw.count(b"\r\n") == 3 and b"\n" not in raw.replace(b"\r\n", b"")
    rows = list(csv.reader(io.StringIO(raw.decode(), newline="")))
    assert rows[0] == ["a", "b", "c"]
    assert rows[1] == ["0.10000000000000001", "x,y", ""]
    assert float(rows[2][0]) == 1 / 3
    assert rows[2][1] == 'q"t'


# -- commands -------------------------------------------------------------------

def test_selftest_exit_zero(capsys):
    assert main(["selftest"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_bad_config_exit_two(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("n_sites = 1\n")
    assert main(["single", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "n_sites" in capsys.readouterr().err


def test_unknown_flag_exit_two():
    assert main(["single", "--nonsense"]) == 2


def test_missing_config_file_exit_four(tmp_path):
    assert main(["single", "--config", str(tmp_path / "absent.toml")]) == 4


def test_unwritable_output_exit_four(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["single", "--sites", "6", "--out", str(blocker / "sub")]) == 4


def test_numerical_failure_exit_three(tmp_path):
    # a single instance cannot feed the ensemble statistics
    assert main(["ensemble", "--sites", "6", "--instances", "1", "--out", str(tmp_path)]) == 3


@pytest.fixture(scope="module")
def xxz_single(tmp_path_factory):
    out = tmp_path_factory.mktemp("single")
    path = out / "run.toml"
    path.write_text("model = 'xxz'\nn_sites = 10\nemit_objective_samples = true\n")
    assert main(["single", "--config", str(path), "--out", str(out / "a")]) == 0
    assert main(["single", "--config", str(path), "--out", str(out / "b")]) == 0
    return out


def test_single_beta_curve_monotone(xxz_single):
    _, header, rows = read_csv(xxz_single / "a" / "beta_curve.csv")
    assert header == ["energy", "beta_C"] and len(rows) == 200
    beta = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(beta) < 0)


def test_single_scar_is_lone_entropy_outlier(xxz_single):
    _, header, rows = read_csv(xxz_single / "a" / "spectrum.csv")
    data = np.array(rows, dtype=float)
    ent, rank = data[:, 2], data[:, 3]
    central = (rank >= 0.25) & (rank <= 0.75)
    assert np.sum(central & (ent < 1e-10)) == 1


def test_single_outputs_identical_on_rerun(xxz_single):
    for name in ("spectrum.csv", "beta_curve.csv", "thermometry.csv",
                 "objective_samples.csv", "manifest.json"):
        a = (xxz_single / "a" / name).read_bytes()
        b = (xxz_single / "b" / name).read_bytes()
        if name == "manifest.json":
            a, b = json.loads(a), json.loads(b)
            a["config"].pop("output_dir"), b["config"].pop("output_dir")
        assert a == b, name


def test_single_thermometry_table(xxz_single):
    _, header, rows = read_csv(xxz_single / "a" / "thermometry.csv")
    assert header[:4] == ["family", "instance_id", "state_index", "energy"]
    fams = [r[0] for r in rows]
    assert fams.count("scar") == 1 and fams.count("thermal") == 1
    manifest = json.loads((xxz_single / "a" / "manifest.json").read_text())
    assert manifest["local_term"]["provenance"]["kind"] == "xxz"


@pytest.fixture(scope="module")
def ensemble_n10(tmp_path_factory):
    out = tmp_path_factory.mktemp("ens")
    code = main(["ensemble", "--sites", "10", "--instances", "500", "--seed", "3",
                 "--out", str(out)])
    assert code == 0
    return out


def test_ensemble_reports_acceptance(ensemble_n10):
    _, header, rows = read_csv(ensemble_n10 / "instances.csv")
    assert len(rows) == 500
    manifest = json.loads((ensemble_n10 / "manifest.json").read_text())
    assert manifest["n_accepted"] == sum(r[header.index("accepted")] == "true" for r in rows)
    assert manifest["n_accepted"] > 0


def test_ensemble_stats_schema(ensemble_n10):
    doc = json.loads((ensemble_n10 / "stats.json").read_text())
    for fam in ("scar", "thermal"):
        f = doc["families"][fam]
        for key in ("variance_delta_beta", "mean_delta_beta", "pearson", "delta_beta_histogram",
                    "min_d1_histogram", "fraction_pairs"):
            assert key in f
        tail = f["tail_fit"]
        assert tail["best"] in ("gaussian", "exponential")
        assert "residual" in tail["gaussian"] and "residual" in tail["exponential"]
        h = f["delta_beta_histogram"]
        assert len(h["edges"]) == len(h["counts"]) + 1


def test_ensemble_scatter_files(ensemble_n10):
    for fam in ("scar", "thermal"):
        raw, header, rows = read_csv(ensemble_n10 / f"scatter_{fam}.csv")
        assert header[:3] == ["instance_id", "beta_C", "beta_S"]
        assert raw.endswith(b"\r\n")
        data = np.array([[float(v) for v in r[1:]] for r in rows])
        assert np.allclose(data[:, 2], data[:, 1] - data[:, 0])
        for name in (f"hist_delta_beta_{fam}.csv", f"hist_min_d1_{fam}.csv"):
            _, h, hist_rows = read_csv(ensemble_n10 / name)
            assert h == ["lo", "hi", "count"]
            assert sum(int(r[2]) for r in hist_rows) == len(rows)


def _ensemble_bytes(out, workers):
    code = main(["ensemble", "--sites", "8", "--instances", "40", "--seed", "11",
                 "--workers", str(workers), "--out", str(out)])
    assert code == 0
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def test_worker_count_does_not_change_csvs(tmp_path):
    assert _ensemble_bytes(tmp_path / "w1", 1) == _ensemble_bytes(tmp_path / "w8", 8)


def test_sweep_rows(tmp_path):
    assert main(["sweep", "--instances", "30", "--out", str(tmp_path)]) == 0
    _, header, rows = read_csv(tmp_path / "sweep.csv")
    assert header[:3] == ["n_sites", "family", "n"]
    keys = {(int(r[0]), r[1]) for r in rows}
    assert keys == {(n, f) for n in range(8, 13)
                    for f in ("scar", "thermal", "band", "xxz-scar", "xxz-band")}
    assert len(rows) == len(keys)


def test_env_var_workers_via_subprocess(tmp_path):
    env = dict(os.environ, **{cfgmod.WORKERS_ENV: "2"})
    proc = subprocess.run([sys.executable, "-m", "scar_thermo.cli", "ensemble", "--sites", "8",
                           "--instances", "20", "--out", str(tmp_path), "-v"],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "accepted" in proc.stdout
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["workers"] == 2
