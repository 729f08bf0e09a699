import json
import subprocess
import sys
from fractions import Fraction

import pytest

from lacunary import UsageError, __version__
from lacunary.cli import SUBCOMMANDS, main, parse_config
from lacunary.config import RunConfig, export_prefix, read_config_text, read_prefix
from lacunary.reports import ExperimentReport, read_samples_csv


@pytest.fixture(autouse=True)
def no_output_dir(monkeypatch):
    monkeypatch.delenv("LACUNARY_OUTPUT_DIR", raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_examples():
    cfg = parse_config("count --seq erdos-fortet --N 10 --a 1 --b 2 --c 1".split())
    assert (cfg.subcommand, cfg.seq, cfg.N, cfg.a, cfg.b, cfg.c) == ("count", "erdos-fortet", 10, 1, 2, 1)
    cfg = parse_config("profile --seq paper --R 4 --eps 1/2 --a 2 --b 1 --blocks 1..5".split())
    assert cfg.blocks == (1, 2, 3, 4, 5) and cfg.eps == Fraction(1, 2) and cfg.R == 4
    with pytest.raises(UsageError):
        parse_config("count --eps 1.5".split())


def test_defaults():
    cfg = parse_config(["count"])
    assert (cfg.R, cfg.eps, cfg.resolved_d(), cfg.K, cfg.tower, cfg.seed) == (9, Fraction(1, 2), 42, 1, "reduced", 0)


def test_count_prints_nine(capsys):
    code, out, _ = run(capsys, "count", "--seq", "erdos-fortet", "--N", "10", "--a", "1", "--b", "2", "--c", "1")
    assert code == 0 and out == "9\n"


def test_usage_errors_exit_two(capsys):
    assert run(capsys, "count", "--eps", "1.5")[0] == 2
    assert run(capsys, "count", "--eps", "one-half")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    code, _, err = run(capsys, "count", "--seq", "fibonacci")
    assert code == 2 and err.count("\n") == 1 and "fibonacci" in err
    assert run(capsys, "decompose", "--format", "csv")[0] == 2


def test_resource_error_exit_two(capsys):
    # the full tower puts block 3 at 2**81 bits
    code, _, err = run(capsys, "generate", "--seq", "paper", "--tower", "paper", "--N", "100")
    assert code == 2 and "cap" in err


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("[sequence]\nseq = erdos-fortet\n\n[equation]\na = 1\nb = 2\nc = 1\n\n"
                        "[experiment]\nN = 10\n")
    assert run(capsys, "count", "--config", str(cfg_file))[1] == "9\n"
    assert run(capsys, "count", "--config", str(cfg_file), "--N", "100")[1] == "99\n"


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(UsageError, match="unknown key"):
        read_config_text("[sequence]\nseq = paper\ncolour = red\n")
    with pytest.raises(UsageError, match="unknown section"):
        read_config_text("[extras]\nN = 3\n")
    with pytest.raises(UsageError, match="belongs in"):
        read_config_text("[output]\nN = 3\n")
    bad = tmp_path / "bad.cfg"
    bad.write_text("[sequence]\nq = 2\nwho = me\n")
    assert main(["count", "--config", str(bad)]) == 2


def test_config_echo_is_lossless():
    cfg = parse_config("profile --seq paper --R 4 --eps 2/3 --K 3/2 --blocks 1..3 --tower table:5,9,20".split())
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.to_dict() == cfg.to_dict()
    assert again.construction() == cfg.construction()


def test_profile_csv(capsys):
    code, out, _ = run(capsys, "profile", "--seq", "paper", "--R", "4", "--eps", "1/2", "--a", "2", "--b", "1",
                       "--blocks", "1..3")
    assert code == 0
    lines = out.splitlines()
    header = json.loads(lines[0][2:])
    assert header["version"] == __version__ and header["config"]["R"] == 4
    assert lines[1] == "N,a,b,c_star,L_star,ratio"
    assert lines[2].startswith("4,2,1,32,3,")


def test_generate_round_trip(capsys):
    code, out, _ = run(capsys, "generate", "--seq", "geometric", "--q", "3", "--N", "5")
    assert code == 0 and out.startswith("# ")
    assert read_prefix(out) == [3, 9, 27, 81, 243]
    assert read_prefix(export_prefix([1, 2])) == [1, 2]


def test_erdos_fortet_check(capsys):
    code, out, _ = run(capsys, "erdos-fortet-check", "--N", "20", "--trials", "100", "--seed", "7")
    assert code == 0
    data = json.loads(out)
    assert data["stats"]["max_residual"] <= 1e-9 and data["config"]["seed"] == 7
    assert data["version"] == __version__


def test_byte_identical_outputs(tmp_path, monkeypatch):
    monkeypatch.setenv("LACUNARY_OUTPUT_DIR", str(tmp_path))
    args = ["clt", "--N", "16", "--M", "2000", "--seed", "3"]
    assert main(args + ["--out", "a.json"]) == 0
    assert main(args + ["--out", "b.json", "--workers", "4"]) == 0
    a, b = (tmp_path / "a.json").read_text(), (tmp_path / "b.json").read_text()
    # only the echoed out/workers fields differ
    da, db = json.loads(a), json.loads(b)
    assert da["stats"] == db["stats"]
    assert main(args + ["--out", "c.json"]) == 0
    assert (tmp_path / "c.json").read_bytes() == (tmp_path / "a.json").read_bytes().replace(b"a.json", b"c.json")
    ExperimentReport.from_json(a)


def test_default_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("LACUNARY_OUTPUT_DIR", str(tmp_path))
    assert main(["spectrum", "--seq", "erdos-fortet", "--N", "6", "--a", "1", "--b", "2"]) == 0
    text = (tmp_path / "spectrum.csv").read_text()
    assert text.startswith("# ") and "\nc,count\n" in text


def test_clt_sample_dump(tmp_path, capsys):
    code, out, _ = run(capsys, "clt", "--seq", "erdos-fortet", "--f", "erdos-fortet", "--N", "8", "--M", "20",
                       "--format", "csv")
    assert code == 0
    body = "\n".join(line for line in out.splitlines() if not line.startswith("#")) + "\n"
    rows = read_samples_csv(body)
    assert len(rows) == 20 and rows[0][0] == 0


def test_lil_trace(capsys):
    code, out, _ = run(capsys, "lil", "--Ns", "8,16", "--M", "3", "--format", "csv")
    assert code == 0
    assert out.splitlines()[1] == "x_numerator,x_precision,N,value"
    assert len(out.splitlines()) == 2 + 6


@pytest.mark.parametrize("argv", [
    ["gaposhkin", "--N", "16", "--M", "500"],
    ["decompose", "--R", "4", "--d", "2", "--blocks", "1..3", "--trials", "20"],
    ["blockprob", "--R", "4", "--d", "4", "--blocks", "2,3", "--M", "200"],
    ["periodicity", "--R", "4", "--d", "4", "--blocks", "2..4", "--trials", "5"],
    ["spectrum", "--N", "8", "--format", "json"],
    ["profile", "--seq", "erdos-fortet", "--Ns", "10,20", "--a", "1", "--b", "2", "--format", "json"],
])
def test_other_subcommands(argv, capsys):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(out)["config"]["subcommand"] == argv[0]


def test_all_subcommands_registered():
    assert set(SUBCOMMANDS) == {"generate", "count", "spectrum", "profile", "clt", "gaposhkin", "lil",
                                "decompose", "erdos-fortet-check", "blockprob", "periodicity"}


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lacunary.cli", "count", "--seq", "erdos-fortet", "--N", "10",
                           "--a", "1", "--b", "2", "--c", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "9\n"
