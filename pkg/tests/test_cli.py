import shutil
from pathlib import Path

import pytest

from auvstack.cli import main
from auvstack.config import stock_config_path
from auvstack.telemetry import read_log


@pytest.fixture()
def workspace(tmp_path):
    """Copy the stock config tree so runs write logs into tmp."""
    configs = stock_config_path("vectored.yaml").parent
    dest = tmp_path / "configs"
    shutil.copytree(configs, dest)
    return dest


class TestValidate:
    def test_ok(self, workspace, capsys):
        assert main(["validate", "--config", str(workspace / "vectored.yaml")]) == 0
        assert "vectored" in capsys.readouterr().out

    def test_invalid_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("run: {vehicle: missing.yaml, fsm: missing.yaml}\n")
        assert main(["validate", "--config", str(bad)]) == 1

    def test_run_bad_config_exits_1(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.yaml"), "--headless"]) == 1


class TestRunAndPlot:
    def test_short_headless_run_then_plot(self, workspace, tmp_path):
        log = tmp_path / "out.jsonl"
        rc = main(
            [
                "run",
                "--config",
                str(workspace / "vectored.yaml"),
                "--headless",
                "--duration",
                "3",
                "--seed",
                "11",
                "--log",
                str(log),
                "--bind",
                "",
            ]
        )
        assert rc == 0
        records = read_log(log)
        assert len(records) == 30

        out_dir = tmp_path / "plots"
        rc = main(
            [
                "plot",
                "--log",
                str(log),
                "--out-dir",
                str(out_dir),
                "--mission",
                str(workspace / "missions" / "five_steps.yaml"),
            ]
        )
        assert rc == 0
        for name in ("track.png", "actuators.png", "states.png", "summary.csv"):
            target = out_dir / name
            assert target.exists() and target.stat().st_size > 0
        header = (out_dir / "summary.csv").read_text().splitlines()[0]
        assert header.startswith("t,state,mode,x,y,depth")

    def test_plot_missing_log_exits_1(self, tmp_path):
        assert main(["plot", "--log", str(tmp_path / "none.jsonl"), "--out-dir", str(tmp_path)]) == 1
