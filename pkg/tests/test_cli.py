"""Command-line interface: exit codes, config files and byte-identical reruns."""

import subprocess
import sys

import pytest

from plsauth.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, read_config


def _run_twice(tmp_path, argv_for):
    outputs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        d.mkdir()
        assert main(argv_for(d)) == EXIT_OK
        outputs.append(sorted((p.name, p.read_bytes()) for p in d.iterdir()))
    return outputs


def test_fer_deterministic(tmp_path):
    a, b = _run_twice(tmp_path, lambda d: ["fer", "--code", "bch_15_7_2", "--trials", "200",
                                           "--p-grid", "0.02,0.05", "--params", "0,1",
                                           "--seed", "4", "--out", str(d / "fer.csv"), "--quiet"])
    assert a == b
    text = a[0][1].decode()
    assert text.splitlines()[1].startswith("family,n,L_or_t,p")
    assert len(text.splitlines()) == 2 + 4


def test_fer_config_file(tmp_path, capsys):
    cfg = tmp_path / "fer.cfg"
    cfg.write_text("code = ldpc_3_6_512  # PEG fixture\ntrials = 5\np_grid = 0.02\n"
                   "params = bp, 0\nseed = 3\n")
    assert read_config(cfg)["code"] == "ldpc_3_6_512"
    assert main(["fer", "--config", str(cfg), "--quiet", "--out", str(tmp_path / "o.csv")]) == 0
    rows = (tmp_path / "o.csv").read_text().splitlines()[2:]
    assert [r.split(",")[2] for r in rows] == ["bp", "0"]


def test_proximity_deterministic_with_table_constants(tmp_path):
    a, b = _run_twice(tmp_path, lambda d: ["proximity", "--scenario", "library", "--trials",
                                           "50", "--seed", "5", "--out", str(d / "p.csv"),
                                           "--quiet"])
    assert a == b
    header = a[0][1].decode().splitlines()[0]
    assert "p0=-61.91" in header and "n=1.85" in header and "sigma=6.3" in header


def test_session_deterministic(tmp_path):
    def argv(d):
        return ["session", "full", "--seed", "6", "--resumptions", "2", "--state",
                str(d / "state.pkl"), "--out", str(d / "transcript.txt"), "--quiet"]

    a, b = _run_twice(tmp_path, argv)
    transcripts = [dict(x)["transcript.txt"] for x in (a, b)]
    assert transcripts[0] == transcripts[1]
    assert len(transcripts[0].decode().splitlines()) == 4 + 2 * 2


def test_session_state_flow(tmp_path, capsys):
    state = str(tmp_path / "s.pkl")
    assert main(["session", "resume", "--state", state]) == EXIT_USAGE
    assert main(["session", "enroll", "--state", state, "--seed", "7"]) == EXIT_OK
    assert main(["session", "enroll", "--state", state]) == EXIT_USAGE
    assert main(["session", "resume", "--state", state]) == EXIT_USAGE
    assert main(["session", "auth", "--state", state, "--seed", "7"]) == EXIT_OK
    assert main(["session", "resume", "--state", state, "--seed", "7"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ENROLLED" in out and "resume: node=SUCCESS server=SUCCESS" in out


def test_session_trials_tally(tmp_path, capsys):
    assert main(["session", "full", "--trials", "3", "--resumptions", "1", "--seed", "8"]) == 0
    assert "3  SUCCESS" in capsys.readouterr().out


def test_attack_deterministic(tmp_path):
    a, b = _run_twice(tmp_path, lambda d: ["attack", "replay-c_b", "--seed", "9", "--out",
                                           str(d / "report.txt"), "--quiet"])
    assert a == b
    assert b"RESULT scenario=replay-c_b result=PASS" in a[0][1]


def test_attack_scenario_file(tmp_path, capsys):
    f = tmp_path / "s.ini"
    f.write_text("[scenario]\nname = flip\nseed = 3\n\n[step.1]\nscript = DELIVER MODIFY:-1\n"
                 "expect_node = REJECT(mac)\nexpect_server = REJECT(timeout)\n")
    assert main(["attack", "--scenario-file", str(f)]) == EXIT_OK
    f.write_text("[scenario]\nname = wrong\n\n[step.1]\nexpect_node = REJECT(mac)\n")
    assert main(["attack", "--scenario-file", str(f)]) == EXIT_FAIL
    f.write_text("[scenario]\nname = broken\n")
    assert main(["attack", "--scenario-file", str(f)]) == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["fer", "--code", "bch_15_7_2", "--trials", "0", "--p-grid", "0.05"],
    ["fer", "--code", "bch_15_7_2", "--trials", "10"],
    ["fer", "--code", "no-such-code", "--trials", "10", "--p-grid", "0.05"],
    ["fer", "--code", "bch_15_7_2", "--trials", "10", "--p-grid", "0.05", "--params", "bp"],
    ["proximity", "--scenario", "stadium"],
    ["proximity", "--trials", "0"],
    ["session", "auth", "--p", "0.7"],
    ["session", "resume", "--trials", "2"],
    ["attack", "no-such-scenario"],
    ["fer", "--config", "/nonexistent/config"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "plsauth", "attack", "honest", "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0


def test_quiet_still_writes_results_to_stdout(capsys):
    assert main(["fer", "--code", "bch_15_7_2", "--trials", "20", "--p-grid", "0.05",
                 "--quiet"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# fer-v1" and len(lines) == 3
