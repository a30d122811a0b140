import numpy as np
import pytest

from parajc import cli


def write_config(tmp_path, **overrides):
    defaults = dict(p=1, M=4, omega_b=1.0, omega_f=1.0, lam=0.25,
                    initial="1,0,0:1,0", t_max=10.0, steps=50)
    defaults.update(overrides)
    path = tmp_path / "run.cfg"
    path.write_text("".join(f"{k}={v}\n" for k, v in defaults.items()))
    return path


def run(args):
    return cli.main([str(a) for a in args])


class TestConfig:
    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("p=2\nwibble=3\n")
        with pytest.raises(cli.ConfigError, match="unknown key"):
            cli.parse_config(path)

    def test_p_zero_rejected(self, tmp_path):
        path = write_config(tmp_path, p=0)
        assert run(["--config", path, "--out", tmp_path, "build-rep"]) == cli.EXIT_CONFIG

    def test_negative_tolerance_rejected(self, tmp_path):
        path = write_config(tmp_path, relation_tol=0)
        assert run(["--config", path, "--out", tmp_path, "check"]) == cli.EXIT_CONFIG

    def test_per_grade_frequencies_parsed_but_not_built(self, tmp_path):
        path = write_config(tmp_path, omega_b_per_grade="0:1.0;1:1.1")
        cfg = cli.parse_config(path)  # parser accepts the extension point
        assert cfg.omega_b_per_grade == "0:1.0;1:1.1"
        assert run(["--config", path, "--out", tmp_path, "build-rep"]) == 0
        assert run(["--config", path, "--out", tmp_path, "spectrum"]) == cli.EXIT_CONFIG

    def test_bad_initial_term(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_initial("1,0:1")
        assert cli.parse_initial("1,0,0:0.6,0;1,1,1:0,0.8") == {
            (1, 0, 0): 0.6, (1, 1, 1): 0.8j,
        }


class TestPipeline:
    def test_build_rep_and_spectrum(self, tmp_path, capsys):
        path = write_config(tmp_path, p=2, M=5)
        assert run(["--config", path, "--out", tmp_path, "build-rep"]) == 0
        assert "dimension pattern: ok" in capsys.readouterr().out
        assert run(["--config", path, "--out", tmp_path, "spectrum"]) == 0
        lines = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert lines[0] == "block,index,eigenvalue"

    def test_p1_resonant_block_c1(self, tmp_path):
        path = write_config(tmp_path, M=5, lam=0.25)
        run(["--config", path, "--out", tmp_path, "build-rep"])
        run(["--config", path, "--out", tmp_path, "spectrum"])
        rows = [r.split(",") for r in
                (tmp_path / "spectrum.csv").read_text().splitlines()[1:]]
        c1 = sorted(float(r[2]) for r in rows if r[0] == "1")
        assert c1 == pytest.approx([0.75, 1.25], abs=1e-12)

    def test_evolve_matches_rabi(self, tmp_path):
        lam = 0.25
        path = write_config(tmp_path, M=5, lam=lam, t_max=20.0, steps=200)
        run(["--config", path, "--out", tmp_path, "build-rep"])
        assert run(["--config", path, "--out", tmp_path, "evolve"]) == 0
        lines = (tmp_path / "trajectory.csv").read_text().splitlines()
        header = lines[0].split(",")
        col = header.index("P_0_1")
        for row in lines[1:]:
            cells = [float(x) for x in row.split(",")]
            assert abs(cells[col] - np.sin(lam * cells[0]) ** 2) <= 1e-6

    def test_transitions_selection_rule(self, tmp_path):
        path = write_config(tmp_path, p=2, M=5)
        run(["--config", path, "--out", tmp_path, "build-rep"])
        assert run(["--config", path, "--out", tmp_path, "transitions"]) == 0
        rows = (tmp_path / "transitions.csv").read_text().splitlines()[1:]
        assert rows
        for row in rows:
            m, n, i, m2, n2, i2, re, im = row.split(",")
            assert (int(m2) - int(m), int(n2) - int(n)) in {(-1, 1), (1, -1)}

    def test_missing_rep_file(self, tmp_path):
        path = write_config(tmp_path)
        assert run(["--config", path, "--out", tmp_path, "spectrum"]) == cli.EXIT_VALIDATION

    def test_check_passes(self, tmp_path):
        path = write_config(tmp_path, p=2, M=4)
        assert run(["--config", path, "--out", tmp_path, "check"]) == 0
        assert (tmp_path / "check_report.json").exists()

    def test_nonhermitian_needs_override(self, tmp_path):
        path = write_config(tmp_path, p=2, M=4, variant="eq2",
                            lam1="0.3", hermitize="false")
        run(["--config", path, "--out", tmp_path, "build-rep"])
        assert run(["--config", path, "--out", tmp_path, "evolve"]) == cli.EXIT_VALIDATION
        assert run(["--config", path, "--out", tmp_path,
                    "--override-nonhermitian", "evolve"]) == 0


class TestDeterminism:
    def test_rep_file_bytes_identical(self, tmp_path):
        path = write_config(tmp_path, p=2, M=5)
        for d in ("a", "b"):
            (tmp_path / d).mkdir()
            run(["--config", path, "--out", tmp_path / d, "build-rep"])
        assert (tmp_path / "a/rep.pbf").read_bytes() == (tmp_path / "b/rep.pbf").read_bytes()

    def test_csv_bytes_identical(self, tmp_path):
        path = write_config(tmp_path, p=2, M=5)
        outputs = []
        for d in ("a", "b"):
            out = tmp_path / d
            out.mkdir()
            run(["--config", path, "--out", out, "build-rep"])
            run(["--config", path, "--out", out, "spectrum"])
            run(["--config", path, "--out", out, "evolve"])
            run(["--config", path, "--out", out, "transitions"])
            outputs.append(tuple(
                (out / f).read_bytes()
                for f in ("spectrum.csv", "trajectory.csv", "transitions.csv")
            ))
        assert outputs[0] == outputs[1]

    def test_corrupted_rep_rejected(self, tmp_path):
        path = write_config(tmp_path, p=1, M=4)
        run(["--config", path, "--out", tmp_path, "build-rep"])
        rep = tmp_path / "rep.pbf"
        text = rep.read_text()
        rep.write_text(text.replace("DIMS", "DIMZ", 1))
        assert run(["--config", path, "--out", tmp_path, "spectrum"]) == cli.EXIT_VALIDATION
