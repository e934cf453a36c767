import json

import pytest

from setfractal import cli
from setfractal.config import EXAMPLE_CONFIG, HEADER, load_config, parse_config
from setfractal.errors import ConfigError


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def tree(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


class TestMetricSum:
    def test_default_weights(self, capsys):
        code, out, _ = run(["metric-sum", "{1,2}", "{7,8,9}"], capsys)
        assert code == 0 and out.strip() == "{8} u {9} u {10} u {11}"

    def test_weights_and_oracle(self, capsys):
        code, out, err = run(["metric-sum", "-w", "1,1,-1", "{1,2}", "{7,8,9}", "{7,8,9}", "--oracle"], capsys)
        assert code == 0 and out.strip() == "{1} u {2}" and "agree" in err

    def test_intervals(self, capsys):
        code, out, _ = run(["metric-sum", "[0,1]", "[5,6]"], capsys)
        assert out.strip() == "[5,7]"

    @pytest.mark.parametrize("argv", [["metric-sum", "[0,1"], ["metric-sum", "-w", "1", "{1}", "{2}"]])
    def test_errors_exit_2(self, argv, capsys):
        code, _, err = run(argv, capsys)
        assert code == 2 and err


class TestCommands:
    def test_interpolate_check(self, tmp_path, capsys):
        code, out, _ = run(["interpolate", "--out", str(tmp_path), "--check"], capsys)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert code == 0 and all(summary["checks"].values())

    def test_chaos_deterministic(self, tmp_path, capsys):
        for d in ("a", "b"):
            assert run(["chaos", "--n", "5000", "--seed", "7", "--out", str(tmp_path / d)], capsys)[0] == 0
        assert tree(tmp_path / "a") == tree(tmp_path / "b")

    def test_boxdim_preset(self, tmp_path, capsys):
        code, _, _ = run(["boxdim", "--preset", "segment", "--out", str(tmp_path), "--check"], capsys)
        assert code == 0

    def test_boxdim_input(self, tmp_path, capsys):
        pts = tmp_path / "pts.csv"
        pts.write_text("x,y\n" + "".join(f"{i / 999},0\n" for i in range(1000)))
        code, _, _ = run(["boxdim", "--input", str(pts), "--out", str(tmp_path / "o")], capsys)
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert code == 0 and "slope" in json.dumps(summary)

    def test_distset(self, tmp_path, capsys):
        code, _, _ = run(["distset", "--preset", "constant", "--probes", "64", "--out", str(tmp_path), "--check"], capsys)
        assert code == 0

    def test_json_lines_format(self, tmp_path, capsys):
        run(["demo", "table", "--format", "json-lines", "--out", str(tmp_path)], capsys)
        lines = (tmp_path / "examples_table.jsonl").read_text().splitlines()
        assert json.loads(lines[0])["expression"] == "A"

    def test_global_flag_before_subcommand(self, tmp_path, capsys):
        code, _, _ = run(["--out", str(tmp_path), "demo", "table"], capsys)
        assert code == 0 and (tmp_path / "examples_table.csv").exists()

    def test_demo_table_check(self, tmp_path, capsys):
        code, _, _ = run(["demo", "table", "--check", "--out", str(tmp_path)], capsys)
        assert code == 0

    def test_example_config(self, capsys):
        code, out, _ = run(["example-config"], capsys)
        assert code == 0 and out.startswith(HEADER)


class TestConfig:
    def test_example_parses(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text(EXAMPLE_CONFIG)
        cfg = load_config(p)
        assert cfg.partition == (0.0, 0.25, 0.5, 0.75, 1.0) and cfg.chaos_n == 100_000

    def test_fractions_and_centre_radius(self):
        text = f"{HEADER}\npartition: [0, 1/2, 1]\ndata: ['[0,1]', '[0,1]', '[0,1]']\nalpha:\n  - {{centre: 0.3, radius: 0.1}}\n  - 1/4\n"
        cfg = parse_config(text)
        assert cfg.partition[1] == 0.5 and cfg.alpha[0].ratio == 0.3 and cfg.alpha[1].alpha == 0.25

    @pytest.mark.parametrize(
        "body, line",
        [
            ("partition: [0, 1]\ndata: ['[0,1]', '[0,1]']\nalpha: [1.5]\n", 4),
            ("partition: [0, 1]\ndata: ['[0,1]', '[1,0]']\nalpha: [0.5]\n", 3),
            ("partition: [0, x]\ndata: ['[0,1]', '[0,1]']\nalpha: [0.5]\n", 2),
            ("partition: [0, 1]\ndata: ['[0,1]', '[0,1]']\nalpha: [0.5]\nbogus: 1\n", 5),
        ],
    )
    def test_errors_carry_line(self, body, line):
        with pytest.raises(ConfigError) as exc:
            parse_config(f"{HEADER}\n{body}")
        assert exc.value.line == line

    def test_missing_header(self):
        with pytest.raises(ConfigError):
            parse_config("partition: [0, 1]\n")

    def test_cli_reports_config_error(self, tmp_path, capsys):
        p = tmp_path / "bad.yaml"
        p.write_text(f"{HEADER}\npartition: [0, 1]\ndata: ['[0,1]', '[0,1]']\nalpha: [1.5]\n")
        code, _, err = run(["interpolate", str(p), "--out", str(tmp_path / "o")], capsys)
        assert code == 2 and "line 4" in err
