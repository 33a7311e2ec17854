import csv
import subprocess
import sys

import pytest

from electroadhesion.cli import main
from electroadhesion.config import RunConfig, load_config, parse_config, render_config
from electroadhesion.errors import ConfigError

FAST = "frequencies_hz = 250, 100000\npoints_per_decade = 200\nn_u = 300\n"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fast_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(FAST)
    return p


class TestConfig:
    def test_defaults(self):
        rc = RunConfig()
        assert rc.d1_m == 1e-6 and rc.V0_v == 75.0 and len(rc.frequencies_hz) == 10
        assert rc.simulation().v0 == 75.0
        assert rc.layers().insulator.thickness == 1e-6

    def test_round_trip(self):
        rc = parse_config("V0_v = 120\nleakage = false\nfrequencies_hz = 1, 10\n")
        assert parse_config(render_config(rc)) == rc

    def test_comments_and_values(self):
        rc = parse_config("# header\nd2_m = 1.5e-4  # thicker skin\n")
        assert rc.d2_m == 1.5e-4

    @pytest.mark.parametrize("text, match", [
        ("bogus = 1\n", "unknown key"),
        ("d1_mm = 1\n", "unit suffix"),
        ("V0_v = 1\nV0_v = 2\n", "duplicate"),
        ("V0_v = abc\n", "invalid value"),
        ("V0_v\n", "key = value"),
        ("leak_mode = other\n", "invalid value"),
    ])
    def test_errors(self, text, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(text, "run.cfg")

    def test_relative_dispersion_path(self, tmp_path):
        (tmp_path / "sc.csv").write_text("freq_hz,eps_r,sigma_s_per_m\n1,100,1e-7\n1e6,50,2e-6\n")
        cfg = tmp_path / "run.cfg"
        cfg.write_text("sc_dispersion = sc.csv\n")
        rc = load_config(cfg)
        assert rc.layers().skin.rel_permittivity_at(1.0) == 100.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")


class TestSweepCommand:
    def test_writes_rows(self, capsys, tmp_path, fast_config):
        out = tmp_path / "sweep.csv"
        code, stdout, _ = run(capsys, "sweep", "--config", str(fast_config), "--out", str(out))
        assert code == 0 and "wrote 2" in stdout
        rows = read_csv(out)
        assert rows[0] == ["freq_hz", "pe_pa", "fe_n", "mean_sep_m", "area_ratio", "loss_tangent"]
        assert len(rows) == 3 and all(float(r[2]) >= 0 for r in rows[1:])

    def test_deterministic(self, capsys, tmp_path, fast_config):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "sweep", "--config", str(fast_config), "--out", str(a))
        run(capsys, "sweep", "--config", str(fast_config), "--out", str(b), "--workers", "2")
        assert a.read_bytes() == b.read_bytes()

    def test_missing_dispersion_writes_nothing(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(FAST + "sc_dispersion = missing.csv\n")
        out = tmp_path / "sweep.csv"
        code, _, err = run(capsys, "sweep", "--config", str(cfg), "--out", str(out))
        assert code == 1 and not out.exists()
        assert err.count("\n") == 1 and err.startswith("error: ")

    def test_out_of_table_frequency(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("frequencies_hz = 5e6\n")
        out = tmp_path / "sweep.csv"
        code, _, err = run(capsys, "sweep", "--config", str(cfg), "--out", str(out))
        assert code == 1 and not out.exists() and "range" in err

    def test_sensitivity(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("frequencies_hz = 100000\npoints_per_decade = 200\nn_u = 300\nleakage = false\n")
        out = tmp_path / "sens.csv"
        code, _, _ = run(capsys, "sensitivity", "--config", str(cfg), "--param", "d1", "--delta", "-0.5",
                         "--out", str(out))
        rows = read_csv(out)
        assert code == 0 and rows[0][-1] == "change_pct" and float(rows[1][3]) > 0


class TestImpedanceCommands:
    @pytest.fixture
    def fixture_dir(self, capsys, tmp_path):
        d = tmp_path / "fx"
        code, _, _ = run(capsys, "synth", "--out-dir", str(d), "--per-decade", "20")
        assert code == 0
        return d

    def sweeps(self, d):
        return ["--total", str(d / "total.csv"), "--skin", str(d / "skin.csv"), "--screen", str(d / "touchscreen.csv"),
                "--area", "130e-6"]

    def test_analyze(self, capsys, fixture_dir, tmp_path):
        out = tmp_path / "rem.csv"
        code, stdout, _ = run(capsys, "impedance", "analyze", *self.sweeps(fixture_dir), "--out", str(out))
        assert code == 0
        report = dict(line.split("=", 1) for line in stdout.strip().splitlines())
        assert float(report["c_gap_f"]) == pytest.approx(413e-12, rel=1e-2)
        assert float(report["gap_m"]) == pytest.approx(2.78e-6, rel=1e-2)
        assert read_csv(out)[0] == ["freq_hz", "z_real_ohm", "z_imag_ohm"]

    def test_force(self, capsys, fixture_dir, tmp_path):
        out = tmp_path / "force.csv"
        code, _, _ = run(capsys, "impedance", "force", *self.sweeps(fixture_dir), "--v0", "100", "--implicit",
                         "--out", str(out))
        rows = read_csv(out)
        assert code == 0 and rows[0] == ["freq_hz", "dv_gap_v", "fe_n", "fe_nopol_n"]
        assert all(float(r[2]) <= float(r[3]) * (1 + 1e-12) for r in rows[1:])

    def test_metrics(self, capsys, fixture_dir, tmp_path):
        out = tmp_path / "m.csv"
        code, _, _ = run(capsys, "impedance", "metrics", "--total", str(fixture_dir / "total.csv"),
                         "--part", f"skin={fixture_dir / 'skin.csv'}", "--out", str(out))
        rows = read_csv(out)
        assert code == 0 and rows[0] == ["freq_hz", "part", "mr", "pps"] and rows[1][1] == "skin"

    def test_bad_part_is_usage_error(self, capsys, fixture_dir, tmp_path):
        code, _, err = run(capsys, "impedance", "metrics", "--total", str(fixture_dir / "total.csv"),
                           "--part", "skin", "--out", str(tmp_path / "m.csv"))
        assert code == 2 and err.startswith("error: usage:")

    def test_parse_error_line(self, capsys, fixture_dir, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("freq_hz,z_real_ohm,z_imag_ohm\n1,2,3\n2,x,3\n")
        out = tmp_path / "rem.csv"
        code, _, err = run(capsys, "impedance", "analyze", "--total", str(bad), "--skin", str(fixture_dir / "skin.csv"),
                           "--screen", str(fixture_dir / "touchscreen.csv"), "--area", "1e-4", "--out", str(out))
        assert code == 1 and err.startswith("error: parse_error:") and ":3:" in err and not out.exists()


class TestOtherCommands:
    def test_friction(self, capsys, tmp_path):
        src = tmp_path / "mu.csv"
        src.write_text("freq_hz,mu_off,mu_on\n250,0.512,0.64\n1000,0.5,0.5\n")
        out = tmp_path / "fe.csv"
        code, _, _ = run(capsys, "friction", "infer", "--input", str(src), "--fn", "0.5", "--out", str(out))
        rows = read_csv(out)
        assert code == 0
        assert float(rows[1][1]) == pytest.approx(0.1, abs=1e-15) and float(rows[2][1]) == 0.0

    def test_surface_energy(self, capsys, tmp_path):
        src = tmp_path / "angles.csv"
        src.write_text("sample,liquid,theta_deg\nglass,DI Water,40\nglass,Glycerol,45\nglass,Formamide,30\n")
        out = tmp_path / "se.csv"
        code, _, _ = run(capsys, "surface-energy", "--angles", str(src), "--out", str(out))
        rows = read_csv(out)
        assert code == 0 and rows[1][0] == "glass" and float(rows[1][4]) > 0

    def test_unknown_liquid(self, capsys, tmp_path):
        src = tmp_path / "angles.csv"
        src.write_text("sample,liquid,theta_deg\nglass,Mercury,140\nglass,Glycerol,45\nglass,Formamide,30\n")
        code, _, err = run(capsys, "surface-energy", "--angles", str(src), "--out", str(tmp_path / "o.csv"))
        assert code == 1 and "Mercury" in err

    def test_bad_log_level(self, capsys, monkeypatch):
        monkeypatch.setenv("EA_LOG", "loud")
        code, _, err = run(capsys, "--help")
        assert code == 2 and "EA_LOG" in err

    def test_console_script(self):
        res = subprocess.run([sys.executable, "-m", "electroadhesion.cli", "--help"], capture_output=True, text=True)
        assert res.returncode == 0 and "impedance" in res.stdout
