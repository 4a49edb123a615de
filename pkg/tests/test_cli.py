import json
import math

import numpy as np
import pytest

from curvedmag import analytic as an
from curvedmag.cli import (
    EXIT_CHECK,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_SINGULAR,
    ConfigError,
    main,
    parse_config,
    run_simulation,
)
from curvedmag.dynamics import FixedStep
from curvedmag.geometry import SpaceModel

H, S = SpaceModel.HYPERBOLIC, SpaceModel.SPHERICAL


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def _load(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


FIXED_RADIUS = f"""# circular orbit on the hyperboloid
model = hyperbolic
b = 2
r0 = {math.acosh(2.0)!r}
vphi0 = -1
vz0 = 0.5
t_end = 5
"""


class TestConfig:
    def test_parse(self, tmp_path):
        cfg = parse_config(FIXED_RADIUS + "step = fixed\nh = 0.01\nstride = 3\noutput = o.csv\n", tmp_path)
        assert cfg.model is H and cfg.b_field == 2.0
        assert cfg.step == FixedStep(0.01) and cfg.stride == 3
        assert cfg.output == tmp_path / "o.csv"
        assert cfg.initial.vphi == -1.0 and cfg.effective_B == 2.0

    @pytest.mark.parametrize("extra", [
        "lambda = 1.0\n", "lambda = 0\n", "bogus = 1\n", "b = 3\n", "step = euler\n", "stride = 0\n",
    ])
    def test_rejects(self, extra):
        with pytest.raises(ConfigError):
            parse_config(FIXED_RADIUS + extra)

    @pytest.mark.parametrize("text", [
        "model = hyperbolic\nb = nan\nr0 = 1\nt_end = 1\n",
        "model = hyperbolic\nb = 1\nr0 = 1\n",
        "model = torus\nb = 1\nr0 = 1\nt_end = 1\n",
        "model = hyperbolic\nb = 1\nr0 = 1\nt_end = -1\n",
        "model hyperbolic\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_relativistic_needs_slow_particle(self):
        # eps = 3 * 0.25 + 0.36 > 1
        text = f"model = hyperbolic\nb = 1\nr0 = {math.acosh(2.0)!r}\nvphi0 = 0.5\nvz0 = 0.6\nt_end = 1\nlambda = 0.5\n"
        with pytest.raises(ConfigError):
            parse_config(text)
        cfg = parse_config(text.replace("vz0 = 0.6", "vz0 = 0.1"))
        assert cfg.effective_B == pytest.approx(0.5)

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CURVEDMAG_OUTPUT_DIR", str(tmp_path / "env"))
        cfg = parse_config(FIXED_RADIUS + "output = x.csv\n", tmp_path)
        assert cfg.output == tmp_path / "env" / "x.csv"


class TestSimulate:
    def test_fixed_radius(self, tmp_path):
        path = _write(tmp_path, FIXED_RADIUS)
        assert main(["simulate", str(path)]) == EXIT_OK
        rows = _load(tmp_path / "run.csv")
        assert (tmp_path / "run.csv").read_text().startswith("t,r,phi,z,vr,vphi,vz,eps,I,A\n")
        assert np.max(np.abs(rows[:, 1] - math.acosh(2.0))) <= 1e-8
        summary = json.loads((tmp_path / "run.summary.json").read_text())
        assert summary["classification"] == "FixedRadius/TypeI"
        assert not summary["partial"]
        # summary constants are the last CSV row
        last = summary["final_constants"]
        np.testing.assert_allclose([last["epsilon"], last["i_phi"], last["a_transverse"]],
                                   rows[-1, 7:], rtol=1e-12)
        assert summary["t_final"] == rows[-1, 0] == 5.0

    def test_geodesic(self, tmp_path):
        path = _write(tmp_path, "model = hyperbolic\nb = 0\nr0 = 0.8\nvr0 = 0.3\nvphi0 = 0.6\n"
                                "vz0 = 0.2\nt_end = 10\noutput = geo.csv\n")
        assert main(["simulate", str(path)]) == EXIT_OK
        summary = json.loads((tmp_path / "geo.summary.json").read_text())
        assert summary["drift"]["epsilon"] <= 1e-10

    def test_spherical_closes_after_two_half_periods(self, tmp_path):
        B, r0, vz = 2.0, math.pi / 3.0, 2.0
        _, alpha, A = an.fixed_radius_orbit(S, B, r0)
        eps = A + vz * vz
        t_end = 2.0 * math.pi / math.sqrt(eps)
        path = _write(tmp_path, f"model = spherical\nb = {B}\nr0 = {r0!r}\nvphi0 = {alpha!r}\n"
                                f"vz0 = {vz}\nt_end = {t_end!r}\nrel_tol = 1e-12\nabs_tol = 1e-14\n")
        assert main(["simulate", str(path)]) == EXIT_OK
        rows = _load(tmp_path / "run.csv")
        first, last = rows[0, 1:7].copy(), rows[-1, 1:7].copy()
        # every other coordinate returns; phi advances by the closed-form amount
        advance = an.azimuth_solution(S, eps, A, alpha, t_end)
        dphi = math.remainder(last[1] - first[1] - advance, 2 * math.pi)
        last[1] = first[1]
        np.testing.assert_allclose(last, first, atol=1e-6)
        assert abs(dphi) <= 1e-6

    def test_stride_keeps_last_sample(self, tmp_path):
        path = _write(tmp_path, FIXED_RADIUS + "step = fixed\nh = 0.1\nstride = 7\n")
        assert main(["simulate", str(path)]) == EXIT_OK
        rows = _load(tmp_path / "run.csv")
        assert rows[-1, 0] == pytest.approx(5.0) and rows[1, 0] == pytest.approx(0.7)

    def test_deterministic(self, tmp_path):
        path = _write(tmp_path, FIXED_RADIUS.replace("vz0 = 0.5", "vz0 = 0.5\nvr0 = 0.2"))
        assert main(["simulate", str(path)]) == EXIT_OK
        a = (tmp_path / "run.csv").read_bytes()
        assert main(["simulate", str(path)]) == EXIT_OK
        assert (tmp_path / "run.csv").read_bytes() == a

    def test_bad_config(self, tmp_path, capsys):
        assert main(["simulate", str(_write(tmp_path, "model = hyperbolic\n"))]) == EXIT_INPUT
        assert "error" in capsys.readouterr().err
        assert main(["simulate", str(tmp_path / "missing.cfg")]) == EXIT_INPUT

    def test_axis_abort_writes_partial_output(self, tmp_path):
        path = _write(tmp_path, "model = hyperbolic\nb = 0\nr0 = 0.5\nvr0 = -1\nt_end = 5\n")
        assert main(["simulate", str(path)]) == EXIT_SINGULAR
        rows = _load(tmp_path / "run.csv")
        assert rows.shape[0] > 1 and rows[-1, 0] < 1.0
        assert json.loads((tmp_path / "run.summary.json").read_text())["partial"]

    def test_env_output_dir(self, tmp_path, monkeypatch):
        out = tmp_path / "results"
        monkeypatch.setenv("CURVEDMAG_OUTPUT_DIR", str(out))
        assert main(["simulate", str(_write(tmp_path, FIXED_RADIUS))]) == EXIT_OK
        assert (out / "run.csv").exists()

    def test_relativistic_matches_halved_field(self):
        base = "model = hyperbolic\nr0 = 0.7\nvr0 = 0.2\nvphi0 = 0.3\nvz0 = 0.1\nt_end = 10\n"
        _, rel, _ = run_simulation(parse_config(base + "b = 2\nlambda = 0.5\n"))
        _, half, _ = run_simulation(parse_config(base + "b = 1\n"))
        assert rel.shape == half.shape
        np.testing.assert_allclose(rel, half, rtol=1e-12, atol=1e-12)


class TestClassify:
    def test_fixed_radius(self, capsys):
        assert main(["classify", "hyperbolic", "2", "-1", "3", "4"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "FixedRadius" in out and "TypeI" in out and "B^2 - A = 1" in out

    def test_spherical(self, capsys):
        assert main(["classify", "spherical", "2", "-2", "12", "16"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "FixedRadius" in out and "J=4 C=0" in out

    def test_no_roots(self, capsys):
        assert main(["classify", "hyperbolic", "2", "-1", "2", "3"]) == EXIT_OK
        assert "NonPhysical" in capsys.readouterr().out

    @pytest.mark.parametrize("argv", [
        ["hyperbolic", "x", "0", "1", "1"],
        ["hyperbolic", "1", "0", "-1", "1"],
        ["hyperbolic", "inf", "0", "1", "1"],
        ["euclidean", "1", "0", "1", "1"],
        ["torus", "1", "0", "1", "1"],
    ])
    def test_invalid(self, argv):
        assert main(["classify", *argv]) == EXIT_INPUT


class TestVerify:
    def test_symmetry_suite(self, capsys):
        assert main(["verify", "--suite", "symmetry", "--seed", "1", "--cases", "10"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "PASS plane03-noninvariance" in out
        assert out.rstrip().endswith("all checks passed")

    def test_convergence_json(self, capsys):
        assert main(["verify", "--suite", "convergence", "--json"]) == EXIT_OK
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert len(records) == 4 and all(r["passed"] for r in records)
        assert records[0]["details"]["order"] == pytest.approx(4.0, abs=0.3)

    def test_bad_arguments(self):
        assert main(["verify", "--cases", "0"]) == EXIT_INPUT
        assert main(["verify", "--suite", "nope"]) == EXIT_INPUT
        assert main([]) == EXIT_INPUT

    def test_failing_check_exit_code(self, monkeypatch, capsys):
        from curvedmag import cli, verify

        monkeypatch.setattr(cli, "run_suite",
                            lambda suite, seed, cases: [verify.make_report("x", 1, 1.0, 0.5)])
        assert main(["verify", "--suite", "conservation"]) == EXIT_CHECK
        assert "FAIL x" in capsys.readouterr().out
