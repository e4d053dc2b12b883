#
# SPDX-License-Identifier: GPL-2.0-only
#

import argparse
import csv
import json
import os

import pytest

from iwc import cli


def last_json_line(text):
    return json.loads(text.strip().splitlines()[-1])


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert cli.__version__ in capsys.readouterr().out


def test_help_topics(capsys):
    assert cli.main(["help", "overview"]) == 0
    assert "wave-shape" in capsys.readouterr().out
    assert cli.main(["help", "plugins"]) == 0
    assert "csv" in capsys.readouterr().out


def test_help_without_topic(capsys):
    assert cli.main(["help"]) == 0
    out = capsys.readouterr().out
    assert "usage: iwc" in out
    assert "analyze" in out


def test_no_subcommand():
    assert cli.main([]) == 1


def test_synth_writes_signal_and_truth(tmp_path):
    out = str(tmp_path)
    assert cli.main(["synth", "-o", out, "--fs", "1000", "--duration", "0.5",
                     "--snr", "20", "--seed", "3"]) == 0
    with open(os.path.join(out, "benchmark.csv")) as src:
        rows = list(csv.reader(src))
    assert rows[0] == ["t", "x"]
    assert len(rows) == 501
    with open(os.path.join(out, "benchmark.json")) as src:
        doc = json.load(src)
    assert doc["version"] == cli.__version__
    assert doc["parameters"]["snr_db"] == 20.0
    assert len(doc["ground_truth"]["change_points"]) == 2


def test_synth_is_reproducible(tmp_path):
    args = ["synth", "--fs", "1000", "--duration", "0.3", "--snr", "10",
            "--seed", "7", "--randomize-phase"]
    assert cli.main(args + ["-o", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["-o", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "benchmark.csv").read_text()
    assert first == (tmp_path / "b" / "benchmark.csv").read_text()


def test_analyze_missing_input(tmp_path, capsys):
    code = cli.main(["analyze", str(tmp_path / "missing.csv"), "-o", str(tmp_path)])
    assert code == 3
    report = last_json_line(capsys.readouterr().err)
    assert report["error"] == "DataError"
    assert report["exit_code"] == 3


def test_analyze_bad_config_file(tmp_path, capsys):
    conf = tmp_path / "iwc.conf"
    conf.write_text("no_such_key=1\n")
    code = cli.main(["analyze", str(tmp_path / "sig.csv"), "-c", str(conf)])
    assert code == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "ConfigError"


def test_bad_argument_type_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["analyze", "sig.csv", "--hop", "-1"])
    assert exc.value.code == 2


def test_argument_types():
    assert cli.snrtype("inf") is None
    assert cli.snrtype("None") is None
    assert cli.snrtype("12.5") == 12.5
    assert cli.intervaltype("0.5,1.5") == (0.5, 1.5)
    assert cli.harmonictype("auto") == "auto"
    assert cli.listtype(float)("30,20,10") == (30.0, 20.0, 10.0)
    for parse, arg in ((cli.snrtype, "loud"), (cli.intervaltype, "2,1"),
                       (cli.harmonictype, "0"), (cli.positive_int, "0"),
                       (cli.booltype, "perhaps"), (cli.listtype(int), ",")):
        with pytest.raises(argparse.ArgumentTypeError):
            parse(arg)


def test_resolve_config_precedence(tmp_path):
    conf = tmp_path / "iwc.conf"
    conf.write_text("k_max=5\nseed=2\n")
    parser = argparse.ArgumentParser()
    cli.add_config_arguments(parser)
    cli.add_common_arguments(parser)
    args = parser.parse_args(["-c", str(conf), "--seed", "9", "--no-synchronize",
                              "-o", str(tmp_path)])
    config = cli.resolve_config(args)
    assert config.k_max == 5
    assert config.seed == 9
    assert config.synchronize is False
    assert config.output_dir == str(tmp_path)


def test_analyze_end_to_end(tmp_path):
    data = str(tmp_path / "data")
    out = str(tmp_path / "out")
    assert cli.main(["synth", "-o", data, "--snr", "30"]) == 0
    assert cli.main(["analyze", os.path.join(data, "benchmark.csv"), "-o", out,
                     "--replicates", "5", "--max-iterations", "3"]) == 0
    with open(os.path.join(out, "results.json")) as src:
        results = json.load(src)
    assert results["input"]["source"] == "csv"
    assert results["input"]["fs"] == pytest.approx(6000.0)
    assert results["config"]["replicates"] == 5
    assert results["k"] == len(results["wsfs"])
    assert len(results["labels"]) == len(results["cycle_spans"])
    for name in ("cycles.csv", "aligned.csv", "wsf_medians.csv", "wsf_regression.csv",
                 "spectrogram_before.csv", "spectrogram_after.csv", "cycles.png",
                 "warped_labels.png", "wsfs.png"):
        assert os.path.isfile(os.path.join(out, name)), name


def test_eval_small_sweep(tmp_path):
    out = str(tmp_path)
    assert cli.main(["eval", "-o", out, "--snrs", "30", "--realizations", "1",
                     "--iterations", "1", "--replicates", "3", "--no-progress"]) == 0
    with open(os.path.join(out, "sweep.json")) as src:
        doc = json.load(src)
    assert doc["config"]["n_realizations"] == 1
    assert len(doc["rows"]) == 1
