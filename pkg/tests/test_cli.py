import csv
import io
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from cvconcur import cli, config, gaussian

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, text, name="scenario.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def table(text):
    rows = list(csv.reader(io.StringIO("\n".join(ln for ln in text.splitlines() if not ln.startswith("#")))))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


class TestEvolve:
    def test_h3_psum(self, tmp_path, capsys):
        cfg = write(tmp_path, '[scenario]\nkind = "h3"\n[time]\nkappa_t = [0.0, 0.5]\n')
        code, out, _ = run(capsys, "evolve", "--config", cfg)
        assert code == 0
        header, rows = table(out)
        assert header[0] == "kappa_t" and "var_Psum" in header
        col = header.index("var_Psum")
        assert rows[0][col] == pytest.approx(1.5)
        assert rows[1][col] == pytest.approx(1.5 * math.exp(-2), rel=1e-11)
        assert "# conventions: hbar=1" in out
        assert header.count("witness_1_2") == 1

    def test_hn2_matches_h1(self, tmp_path, capsys):
        grid = "[time]\nstart = 0.0\nstop = 1.0\nsteps = 11\n"
        _, a, _ = run(capsys, "evolve", "--config", write(tmp_path, '[scenario]\nkind = "h1"\n' + grid, "a.toml"))
        _, b, _ = run(capsys, "evolve", "--config", write(tmp_path, '[scenario]\nkind = "hN"\nn = 2\n' + grid, "b.toml"))
        strip = lambda text: [ln for ln in text.splitlines() if not ln.startswith("# scenario")]
        assert strip(a) == strip(b)

    def test_chain_constant_of_motion(self, tmp_path, capsys):
        s = 1 / math.sqrt(2)
        cfg = write(tmp_path, f"""
[scenario]
kind = "h2_chain"
[time]
kappa_t = [0.0, 0.3, 1.0, 2.5]
[[quadrature]]
name = "Xconst"
x = [{s}, 0, {-s}]
p = [0, 0, 0]
""")
        code, out, _ = run(capsys, "evolve", "--config", cfg)
        header, rows = table(out)
        assert code == 0
        for row in rows:
            assert row[header.index("var_Xconst")] == pytest.approx(0.5, abs=1e-12)

    def test_byte_stable(self, tmp_path, capsys):
        cfg = write(tmp_path, '[scenario]\nkind = "h4_experimental"\nkappa = 0.7\n[time]\nkappa_t = [0.1, 0.2, 0.35]\n')
        first = run(capsys, "evolve", "--config", cfg)[1]
        second = run(capsys, "evolve", "--config", cfg)[1]
        assert first == second
        out = tmp_path / "o.csv"
        run(capsys, "evolve", "--config", cfg, "--out", out)
        assert out.read_text() == first

    def test_numeric_range_exit(self, tmp_path, capsys):
        cfg = write(tmp_path, '[scenario]\nkind = "h3"\n[time]\nkappa_t = [40.0]\n')
        code, _, err = run(capsys, "evolve", "--config", cfg)
        assert code == 3 and "exceeds cap" in err

    @pytest.mark.parametrize("text", [
        '[scenario]\nkind = "h5"\n',
        '[scenario]\nkind = "hN"\n',
        '[scenario]\nkind = "h3"\ncolour = 1\n',
        '[scenario]\nkind = "h3"\n[extra]\n',
        '[scenario]\nkind = "h3"\nkappa = -1\n',
        '[scenario]\nkind = "h3"\n[witness]\npairs = [[1, 1]]\n',
        '[scenario]\nkind = "custom"\n[custom]\nmatrix = [[0, 1], [2, 0]]\n',
        'not toml [',
    ])
    def test_config_errors(self, tmp_path, capsys, text):
        code, _, err = run(capsys, "evolve", "--config", write(tmp_path, text))
        assert code == 2 and err.startswith("error:")

    def test_missing_config_file(self, tmp_path, capsys):
        assert run(capsys, "evolve", "--config", tmp_path / "none.toml")[0] == 2

    def test_bad_arguments(self, capsys):
        for argv in (["evolve"], ["frobnicate"]):
            with pytest.raises(SystemExit) as exc:
                cli.main(argv)
            assert exc.value.code == 2


SCENARIO_KINDS = {
    "h1": "",
    "h2_chain": "n = 3\n",
    "h3": "",
    "hN": "n = 5\n",
    "h3_experimental": "",
    "h4_experimental": "",
    "vlb_transformed": "n = 3\n",
    "singly_pumped": '[singly_pumped]\nk_min = -3\nk_max = 3\npump = 1\npolarization = "z"\n',
    "custom": '[custom]\nmatrix = [[0.2, 1], [1, 0]]\n',
}


@pytest.mark.parametrize("kind", sorted(SCENARIO_KINDS))
def test_every_kind_round_trips(tmp_path, capsys, kind):
    extra = SCENARIO_KINDS[kind]
    head, _, rest = extra.partition("[")
    text = f'[scenario]\nkind = "{kind}"\nkappa = 0.5\n{head}[time]\nkappa_t = [0.0, 0.2]\n' + ("[" + rest if rest else "")
    cfg = write(tmp_path, text)
    sc = config.load_scenario(cfg)
    code, out, _ = run(capsys, "evolve", "--config", cfg)
    assert code == 0
    header, rows = table(out)
    assert header == ["kappa_t"] + [f"var_{q.name}" for q in sc.quadratures] + [
        h for h in header if h.startswith("witness_")
    ]
    assert len(rows) == 2 and all(len(r) == len(header) for r in rows)
    assert run(capsys, "eigenmodes", "--config", cfg)[0] == 0
    assert run(capsys, "check", "--config", cfg)[0] in (0, 1)


def test_custom_mode_tables(tmp_path, capsys):
    cfg = write(tmp_path, """
[scenario]
kind = "custom"
kappa = 1.0
[[custom.mode]]
freq = 0
pol = "y"
[[custom.mode]]
freq = 0
pol = "z"
[[custom.mode]]
freq = 1
pol = "z"
[[custom.pump]]
freq = 0
pol = "y"
[[custom.pump]]
freq = 1
pol = "y"
[[custom.pump]]
freq = 1
pol = "z"
[[custom.chi]]
label = "yzy"
[[custom.chi]]
label = "zzz"
""")
    sc = config.load_scenario(cfg)
    np.testing.assert_array_equal(sc.matrix.entries, gaussian.complete_graph_coupling(3, 1.0).entries)
    code, out, _ = run(capsys, "check", "--config", cfg)
    assert code == 0
    assert "0 y | 0 y | 0 z | + | 1" in out


class TestEigenmodes:
    def test_chain(self, tmp_path, capsys):
        cfg = write(tmp_path, '[scenario]\nkind = "h2_chain"\nkappa = 2.0\n')
        code, out, _ = run(capsys, "eigenmodes", "--config", cfg)
        assert code == 0
        rows = list(csv.reader(io.StringIO("\n".join(ln for ln in out.splitlines() if not ln.startswith("#")))))
        assert rows[0][:4] == ["index", "eigenvalue", "class", "operator"]
        assert [r[2] for r in rows[1:]] == [c.value for c in (
            gaussian.ModeClass.P_SQUEEZED, gaussian.ModeClass.CONSTANT, gaussian.ModeClass.X_SQUEEZED)]
        assert float(rows[1][1]) == pytest.approx(2 * math.sqrt(2))


class TestCheck:
    def test_hn_realizable(self, tmp_path, capsys):
        code, out, _ = run(capsys, "check", "--config", write(tmp_path, '[scenario]\nkind = "hN"\nn = 4\n'))
        assert code == 0 and "verdict: realizable" in out

    def test_vlb_conflict(self, tmp_path, capsys):
        code, out, _ = run(capsys, "check", "--config", write(tmp_path, '[scenario]\nkind = "vlb_transformed"\nn = 3\n'))
        assert code == 1
        assert out.count("conflict: ") == 1
        assert "pump frequency 2" in out

    def test_zero_matrix(self, tmp_path, capsys):
        cfg = write(tmp_path, '[scenario]\nkind = "custom"\n[custom]\nmatrix = [[0, 0], [0, 0]]\n')
        assert run(capsys, "check", "--config", cfg)[0] == 0

    def test_freq_override(self, tmp_path, capsys):
        # spread the modes so no pump is shared and the sign pattern becomes allowed
        cfg = write(tmp_path, '[scenario]\nkind = "vlb_transformed"\nn = 3\n[check]\nfreqs = [0, 1, 3]\n')
        assert run(capsys, "check", "--config", cfg)[0] == 0


class TestQpm:
    def test_period(self, capsys):
        code, out, _ = run(capsys, "qpm", "period", "zzz", "--order", "1", "--temp", "25")
        assert code == 0
        assert float(out) == pytest.approx(8.37, rel=0.05)

    def test_curve_normalised(self, capsys):
        code, out, _ = run(capsys, "qpm", "curve", "zzz", "--temp", "40", "--t-range", "30:50", "--steps", "201")
        assert code == 0
        header, rows = table(out)
        assert header == ["temperature_C", "power_normalized"]
        power = [r[1] for r in rows]
        assert max(power) == pytest.approx(1.0, abs=1e-9)
        assert rows[int(np.argmax(power))][0] == pytest.approx(40.0)
        assert "#peak 40," in out

    def test_concur_golden(self, capsys):
        code, out, _ = run(capsys, "qpm", "concur", "--period-range", "41.5:42.5", "--lobes", "2")
        assert code == 0
        assert out == (GOLDEN / "concur_41.5_42.5_lobes2.csv").read_text()
        _, rows = table(out)
        assert rows and any((r[2] == 0) != (r[3] == 0) for r in rows)

    def test_concur_none(self, capsys):
        code, out, err = run(capsys, "qpm", "concur", "--period-range", "41.9:42.0", "--grid", "21")
        assert code == 1 and "no concurrence" in err

    def test_plot_script(self, tmp_path, capsys):
        script = tmp_path / "fig.py"
        code, _, _ = run(capsys, "qpm", "concur", "--period-range", "41.5:42.0", "--lobes", "1", "--plot-script", script)
        assert code == 0
        text = script.read_text()
        compile(text, str(script), "exec")
        assert "matplotlib" in text
        assert (tmp_path / "fig_yzy_m1.csv").exists() and (tmp_path / "fig_zzz_m5.csv").exists()

    def test_curve_plot_needs_out(self, tmp_path, capsys):
        assert run(capsys, "qpm", "curve", "zzz", "--plot-script", tmp_path / "p.py")[0] == 2

    def test_bad_dataset(self, tmp_path, capsys):
        bad = write(tmp_path, "[material]\nname = 'x'\nbogus = 1\n", "bad.toml")
        assert run(capsys, "qpm", "period", "zzz", "--dataset", bad)[0] == 2

    def test_env_dataset(self, monkeypatch, capsys):
        ktp = Path(cli.qpm.__file__).parent / "data" / "ktp_published.toml"
        monkeypatch.setenv("CVCONCUR_DATASET", str(ktp))
        _, out, _ = run(capsys, "qpm", "period", "zzz")
        assert float(out) == pytest.approx(9.0, rel=0.02)

    def test_out_of_range(self, capsys):
        assert run(capsys, "qpm", "period", "zzz", "--temp", "500")[0] == 2

    def test_bad_range_syntax(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["qpm", "concur", "--period-range", "41.5-42"])
        assert exc.value.code == 2


class TestVerify:
    def test_quick_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--quick")
        assert code == 0 and out.rstrip().endswith("PASS")

    def test_mutation_caught(self, monkeypatch, capsys):
        # flip the sign of the time argument: squeezed and anti-squeezed quadratures swap
        real = gaussian.propagator
        monkeypatch.setattr(gaussian, "propagator", lambda g, t, *a, **k: real(g, -t, *a, **k))
        code, out, _ = run(capsys, "verify", "--quick")
        assert code == 1
        assert "FAIL" in out and "worst:" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cvconcur", "qpm", "period", "yzy"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(43.0, rel=0.05)
