import json

import pytest

from serieslab.cli import main, parse_lengths, parse_process


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_sweep_happy_path(tmp_path, capsys):
    code, out, _ = run(["sweep", "--process", "bernoulli:0.5,0.5", "--length", "1000000",
                        "--n", "1..8", "--eps", "0.1", "--seed", "7", "--out", str(tmp_path)],
                       capsys)
    assert code == 0
    assert (tmp_path / "sweep.json").exists() and (tmp_path / "sweep.csv").exists()
    cfg = json.loads(out)
    assert cfg["seed"] == 7 and cfg["command"] == "sweep"


def test_default_seed_echoed(tmp_path, capsys):
    code, out, _ = run(["unbiased", "--n", "2", "--length", "20000", "--out", str(tmp_path)], capsys)
    assert code == 0 and json.loads(out)["seed"] == 0


def test_config_rerun_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["sweep", "--process", "markov:[[0.6,0.4],[0.3,0.7]]", "--length", "50000", "--n", "1..4",
         "--eps", "0.1,0.2", "--seed", "11", "--out", str(a), "--blocks-csv"], capsys)
    code, _, _ = run(["--config", str(a / "config.json"), "--out", str(b), "--threads", "3"], capsys)
    assert code == 0
    for name in ("sweep.json", "sweep.csv", "config.json", "sweep_blocks_n3.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_oracle_mismatch_exit_2(tmp_path, capsys):
    run(["generate", "--process", "bernoulli:0.6,0.4", "--length", "1000000", "--seed", "7",
         "--out", str(tmp_path)], capsys)
    code, _, err = run(["oracle-check", "--chain", "fair-coin", "--block", "01", "--in",
                        str(tmp_path / "seq.bin"), "--out", str(tmp_path)], capsys)
    assert code == 2 and "oracle mismatch" in err


def test_oracle_pass(tmp_path, capsys):
    code, _, _ = run(["oracle-check", "--chain", "fair-coin", "--block", "01", "--block", "0110",
                      "--length", "1000000", "--seed", "7", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads((tmp_path / "oracle.json").read_text())["passed"] is True


def test_bad_magic_exit_1(tmp_path, capsys):
    (tmp_path / "seq.bin").write_bytes(b"garbage!" * 4)
    code, _, err = run(["analyze", "--in", str(tmp_path / "seq.bin"), "--block", "0110",
                        "--out", str(tmp_path)], capsys)
    assert code == 1 and "not a SERIESEQ file" in err


def test_analyze(tmp_path, capsys):
    run(["generate", "--process", "periodic:0110", "--length", "4000", "--out", str(tmp_path)], capsys)
    code, _, _ = run(["analyze", "--in", str(tmp_path / "seq.bin"), "--block", "0110",
                      "--num-starts", "2000", "--out", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "analyze.json").read_text())
    assert rep["record"]["eps_repel"] == pytest.approx(0.3679, abs=1e-3)
    assert rep["direct_hitting"]["used"] > 1900


def test_example1_and_lawofseries(tmp_path, capsys):
    code, _, _ = run(["example1", "--length", "200000", "--seed", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads((tmp_path / "example1.json").read_text())["gaps_within_window"]
    code, _, _ = run(["lawofseries", "--length", "50000", "--p", "400", "--N", "4", "--probe", "4,5",
                      "--out", str(tmp_path)], capsys)
    assert code == 0 and (tmp_path / "lawofseries.csv").exists()


def test_threads_env(tmp_path, capsys, monkeypatch):
    args = ["sweep", "--process", "bernoulli:0.3,0.7", "--length", "30000", "--n", "3..5"]
    run(args + ["--out", str(tmp_path / "one")], capsys)
    monkeypatch.setenv("SERIESLAB_THREADS", "4")
    run(args + ["--out", str(tmp_path / "four")], capsys)
    for name in ("sweep.json", "sweep.csv"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "four" / name).read_bytes()


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["sweep"],
    ["sweep", "--process", "poisson:1"],
    ["sweep", "--process", "bernoulli:0.5,0.6", "--length", "100"],
    ["sweep", "--process", "bernoulli:0.5,0.5", "--n", "0..3"],
    ["oracle-check", "--chain", "martian", "--block", "0"],
])
def test_usage_errors(argv, tmp_path, capsys):
    code, _, err = run(argv + (["--out", str(tmp_path)] if len(argv) > 1 else []), capsys)
    assert code == 1 and err.startswith("error:")


def test_grammar():
    assert parse_lengths("1..3,8") == [1, 2, 3, 8]
    spec = parse_process("example1:N0=4,n=3,r=8", 5)
    assert spec.params == {"N0": 4, "n": 3, "r": 8} and spec.seed == 5
    spec = parse_process("periodic:pattern=0120,A=4", 0)
    assert spec.params["alphabet_size"] == 4 and spec.params["pattern"] == [0, 1, 2, 0]


def test_process_files(tmp_path):
    (tmp_path / "chain.json").write_text(json.dumps({"transition": [[0.9, 0.1], [0.2, 0.8]]}))
    spec = parse_process("markov:@" + str(tmp_path / "chain.json"), 1)
    assert spec.params["transition"][0] == [0.9, 0.1]
    (tmp_path / "los.json").write_text(json.dumps(
        {"base": "bernoulli:0.25,0.25,0.25,0.25", "k": 2, "l": 3, "p": 100, "N": 3}))
    spec = parse_process("lawofseries:@" + str(tmp_path / "los.json"), 1)
    assert spec.params["base"]["variant"] == "bernoulli"
