import hashlib
import json
import logging
import subprocess
import sys

import pytest

from pointscatter import ConfigError, load_preset, parse_config, run_scenario
from pointscatter.cli import main
from pointscatter.errors import TruncationError

SMALL = {
    "billiard": {"dimension": 2, "side_lengths": [1.0, 1.3], "scatterer_position": [0.31, 0.77]},
    "coupling": {"scheme": "renormalized", "mass_scale": 1.0, "inverse": [0.0, 2.0]},
    "window": [5, 120],
    "unfolding": {"method": "local_window", "width": 21},
    "histogram": {"bin_width": 0.2, "s_max": 4.0},
    "output_dir": "unused",
}


def config_text(**changes):
    doc = json.loads(json.dumps(SMALL))
    for key, value in changes.items():
        section, _, field = key.partition("__")
        if field:
            doc[section][field] = value
        else:
            doc[section] = value
    return json.dumps(doc)


def test_fig1_preset():
    cfg = load_preset("fig1")
    b = cfg.billiard
    assert b.dimension == 3
    assert b.side_lengths == (1.047, 1.186, 0.8049)
    assert b.mass == 0.5
    assert b.scatterer_position == pytest.approx((1.047 / 2, 1.186 / 2, 0.8049 / 2))
    assert b.parity_filter == ("odd", "odd", "odd")
    assert cfg.scheme == "renormalized" and cfg.mass_scale == 1.0
    assert cfg.window == (100, 3100)
    assert cfg.couplings == (0.0, 10.0, 30.0)
    assert cfg.unfolding == "analytic_weyl"
    assert (cfg.bin_width, cfg.s_max) == (0.1, 3.0)


@pytest.mark.parametrize("text,key", [
    (config_text(billiard__dimension=4), "billiard.dimension"),
    (config_text(billiard__scatterer_position=[0.0, 0.5]), "billiard.scatterer_position"),
    (config_text(billiard__scatterer_position=[0.5, 1.3]), "billiard.scatterer_position"),
    (config_text(billiard__side_lengths=[1.0]), "billiard.side_lengths"),
    (config_text(billiard__mass=-1), "billiard.mass"),
    (config_text(billiard__parity_filter="odd"), "billiard.parity_filter"),
    (config_text(billiard__colour="red"), "billiard.colour"),
    (config_text(seed=3), "seed"),
    (config_text(coupling__scheme="bare"), "coupling.scheme"),
    (config_text(coupling__inverse=[]), "coupling.inverse"),
    (config_text(coupling__inverse="x"), "coupling.inverse"),
    (config_text(window=[0, 10]), "window"),
    (config_text(window=[10, 5]), "window"),
    (config_text(unfolding__width=20), "unfolding.width"),
    (config_text(unfolding__method="spline"), "unfolding.method"),
    (config_text(histogram__s_max=3.05), "histogram.s_max"),
    (config_text(tolerance=0), "tolerance"),
    (json.dumps({k: v for k, v in SMALL.items() if k != "window"}), "window"),
    (json.dumps({"coupling": SMALL["coupling"], "window": [1, 2]}), "billiard"),
    ("{not json", "<document>"),
])
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert str(info.value).startswith(key)


def test_scalar_coupling_is_a_sweep_of_one():
    assert parse_config(config_text(coupling__inverse=1.5)).couplings == (1.5,)


def test_run_scenario_outputs(tmp_path):
    cfg = parse_config(config_text())
    manifest = run_scenario(cfg, tmp_path / "a")
    names = {f["path"] for f in manifest["files"]}
    assert names == {
        "levels.csv", "bands.csv",
        "spectrum_v0.0.csv", "histogram_v0.0.csv", "histogram_v0.0.dat", "summary_v0.0.json",
        "spectrum_v2.0.csv", "histogram_v2.0.csv", "histogram_v2.0.dat", "summary_v2.0.json",
    }
    written = {p.name for p in (tmp_path / "a").iterdir()}
    assert written == names | {"manifest.json"}
    for f in manifest["files"]:
        data = (tmp_path / "a" / f["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == f["sha256"]
        assert len(data) == f["bytes"]
    summary = json.loads((tmp_path / "a" / "summary_v2.0.json").read_text())
    for key in ("n_levels", "mean_spacing_raw", "ks_poisson", "ks_goe"):
        assert key in summary
    assert summary["n_levels"] == 116
    assert (tmp_path / "a" / "bands.csv").read_text().startswith("omega,center,half_width\n")
    on_disk = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert on_disk["config"] == cfg.to_dict()


def test_run_scenario_is_byte_identical(tmp_path):
    cfg = parse_config(config_text())
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_single_level_window_is_flagged(tmp_path):
    manifest = run_scenario(parse_config(config_text(window=[1, 1])), tmp_path)
    (run,) = [r for r in manifest["runs"] if r["coupling_inverse"] == 0.0]
    assert run["below_statistics_minimum"]
    assert run["n_levels"] == 1
    assert any("statistics minimum" in w for w in manifest["warnings"])
    assert not any(f["path"].startswith("histogram") for f in manifest["files"])


def test_duplicate_couplings_are_dropped(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        manifest = run_scenario(parse_config(config_text(coupling__inverse=[1.0, 1.0, 0.0])), tmp_path)
    assert [r["coupling_inverse"] for r in manifest["runs"]] == [1.0, 0.0]
    assert "duplicate" in caplog.text


def test_cli_subcommands(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(config_text())
    assert main(["levels", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("index,energy,weight,n1,n2\n")

    out = tmp_path / "s.csv"
    assert main(["solve", "--config", str(cfg), "--coupling-inv", "1.5", "--window", "3", "9", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "index,omega,residual,E_left,E_right"
    assert [int(line.split(",")[0]) for line in lines[1:]] == list(range(3, 10))

    hist = tmp_path / "h.csv"
    assert main(["stats", "--config", str(cfg), "--coupling-inv", "0", "--bins", "0.5", "3",
                 "--histogram", str(hist)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_levels"] == 116
    assert len(hist.read_text().splitlines()) == 7

    assert main(["bands", "--preset", "fig1", "--omega", "100", "8304", "3"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "omega,center,half_width"
    omega, center, half = map(float, rows[-1].split(","))
    assert omega == 8304.0 and 11.3 <= half <= 11.5 and center == pytest.approx(-0.05627, abs=1e-5)

    assert main(["run", "--config", str(cfg), "--output-dir", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "manifest.json").exists()


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(config_text())
    assert main(["solve", "--config", str(cfg)]) == ConfigError.exit_code
    assert "coupling.inverse" in capsys.readouterr().err
    assert main(["levels", "--config", str(tmp_path / "missing.json")]) == 11
    bad = tmp_path / "bad.json"
    bad.write_text(config_text(billiard__dimension=4))
    assert main(["levels", "--config", str(bad)]) == 10
    assert "billiard.dimension" in capsys.readouterr().err
    assert TruncationError.exit_code not in (0, 10, 11)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "pointscatter", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("levels", "solve", "stats", "bands", "run"):
        assert sub in res.stdout
