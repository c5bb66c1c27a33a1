import json

import pytest

from flowtile.cli import main


def run(args):
    return main(args)


class TestCli:
    def test_gen_schema_and_roundtrip(self, tmp_path):
        out = tmp_path / "w.json"
        assert run(["gen", "--kind", "uniform", "--n", "50", "--seed", "1",
                    "--k0", "7", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["boundary"] == "open"
        assert len(data["positions"]) == 50
        from flowtile.windows import OrbitWindow
        w = OrbitWindow.from_json(data)
        assert w.to_json() == data

    def test_tile_then_verify(self, tmp_path):
        w = tmp_path / "w.json"
        t = tmp_path / "t.json"
        assert run(["gen", "--kind", "uniform", "--n", "60", "--seed", "2",
                    "--k0", "7", "--out", str(w)]) == 0
        assert run(["tile", "--mode", "full", "--depth", "2",
                    "--in", str(w), "--out", str(t)]) == 0
        assert run(["verify", "--eta", "1/8", str(t)]) == 0

    def test_verify_rejects_corrupt_section(self, tmp_path):
        w = tmp_path / "w.json"
        t = tmp_path / "t.json"
        run(["gen", "--kind", "uniform", "--n", "40", "--seed", "3",
             "--k0", "7", "--out", str(w)])
        run(["tile", "--mode", "full", "--depth", "2", "--in", str(w),
             "--out", str(t)])
        data = json.loads(t.read_text())
        data["letters"][0] = ""
        t.write_text(json.dumps(data))
        assert run(["verify", str(t)]) == 1

    def test_plot_svg(self, tmp_path):
        w = tmp_path / "w.json"
        t = tmp_path / "t.json"
        svg = tmp_path / "t.svg"
        run(["gen", "--kind", "uniform", "--n", "30", "--seed", "4",
             "--k0", "7", "--out", str(w)])
        run(["tile", "--mode", "full", "--depth", "2", "--in", str(w),
             "--out", str(t)])
        assert run(["plot", str(t), "--svg", str(svg)]) == 0
        body = svg.read_text()
        assert "#1f77b4" in body and "#d62728" in body

    def test_loe_subcommand(self, tmp_path):
        w = tmp_path / "w.json"
        t1 = tmp_path / "t1.json"
        m = tmp_path / "m.json"
        run(["gen", "--kind", "uniform", "--n", "40", "--seed", "5",
             "--k0", "7", "--out", str(w)])
        run(["tile", "--mode", "full", "--depth", "2", "--in", str(w),
             "--out", str(t1)])
        assert run(["loe", "--a", str(t1), "--b", str(t1), "--out", str(m)]) == 0
        data = json.loads(m.read_text())
        assert data["pieces"]

    def test_blocks_and_classes(self, tmp_path, capsys):
        out = tmp_path / "b.json"
        assert run(["blocks", "2,4,8", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["positions"] == ["0", "3", "9", "12"]
        w = tmp_path / "w.json"
        run(["gen", "--kind", "uniform", "--n", "30", "--seed", "6",
             "--k0", "7", "--out", str(w)])
        assert run(["classes", "--in", str(w), "--k", "9"]) == 0

    def test_density_subcommand(self):
        assert run(["density", "--eps", "1", "--band", "1/2,3/4",
                    "--windows", "2"]) == 0

    def test_usage_error_exit_code(self, tmp_path):
        assert run(["classes", "--in", str(tmp_path / "missing.json"),
                    "--k", "9"]) == 2
        assert run(["gen", "--kind", "bogus", "--out", "x.json"]) == 2

    def test_seed_env_override(self, tmp_path, monkeypatch):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        monkeypatch.setenv("FLOWTILE_SEED", "99")
        run(["gen", "--kind", "uniform", "--n", "20", "--seed", "1",
             "--k0", "7", "--out", str(out1)])
        monkeypatch.delenv("FLOWTILE_SEED")
        run(["gen", "--kind", "uniform", "--n", "20", "--seed", "99",
             "--k0", "7", "--out", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_boost_subcommand(self, tmp_path):
        prob = {
            "alpha": "1", "beta": "sqrt(2)", "rho": "1/2", "eps": "1",
            "gaps": ["12"] * 5,
            "choices": [[[0, 8], [0, 9], [1, 8], [2, 7], [9, 2], [10, 1],
                         [10, 2], [11, 1]]] * 5,
        }
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(prob))
        out = tmp_path / "boost.json"
        assert run(["boost", "--in", str(path), "--gamma", "1/2",
                    "--zeta", "1/3", "--eta", "1/4", "--test-mode",
                    "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert len(data["witness"]) == 5
