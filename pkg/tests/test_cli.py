import json
import subprocess
import sys

import pytest

from ovequiv import harness, maxsat
from ovequiv.cli import main
from ovequiv.instances import generate, parse, serialize


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, [json.loads(l) for l in out.splitlines() if l.strip().startswith("{")], out


@pytest.fixture
def ov_file(tmp_path):
    p = tmp_path / "ov.jsonl"
    p.write_text("".join(serialize(generate("ov", {"n": 6, "d": 8}, s)) for s in range(3)))
    return str(p)


def test_gen_count_and_roundtrip(capsys):
    code, recs, out = run(capsys, "--seed", "5", "gen", "exactip", "-p", "n=4", "-p", "d=5", "-p", "m=2",
                          "--count", "3")
    assert code == 0 and len(recs) == 3
    assert len(parse(out)) == 3


def test_gen_is_deterministic(capsys):
    a = run(capsys, "--seed", "1", "gen", "bcp", "-p", "n=4", "-p", "d=3")[2]
    b = run(capsys, "--seed", "1", "gen", "bcp", "-p", "n=4", "-p", "d=3")[2]
    assert a == b


def test_solve(capsys, ov_file):
    code, recs, _ = run(capsys, "solve", "-i", ov_file, "--oracle", "ov")
    assert code == 0 and len(recs) == 3 and all("decision" in r for r in recs)


def test_solve_kind_mismatch(capsys, ov_file):
    assert main(["solve", "-i", ov_file, "--oracle", "bcp"]) == 2


def test_reduce_via_exactip_and_solve_bundle(capsys, tmp_path):
    src = tmp_path / "e.jsonl"
    src.write_text(serialize(generate("exactip", {"n": 3, "d": 4, "m": 1, "plant": "yes"}, 0)))
    out = tmp_path / "b.jsonl"
    assert main(["reduce", "--via", "exactip-ov", "--group-len", "2", "-i", str(src), "-o", str(out)]) == 0
    code, recs, _ = run(capsys, "solve", "-i", str(out))
    assert code == 0 and recs == [{"kind": "bundle", "decision": True, "count": recs[0]["count"]}]


def test_reduce_gadget(capsys, ov_file):
    code, recs, _ = run(capsys, "reduce", "--gadget", "reverse", "-i", ov_file)
    assert code == 0 and all(r["d"] == 16 for r in recs)


def test_reduce_cap_is_usage_error(capsys, ov_file):
    assert main(["--cap-dim", "4", "reduce", "--gadget", "reverse", "-i", ov_file]) == 2


def test_reduce_without_name(ov_file):
    assert main(["reduce", "-i", ov_file]) == 2


def test_approx_bcp(capsys, tmp_path):
    f = tmp_path / "b.jsonl"
    f.write_text(serialize(generate("bcp", {"n": 12, "d": 4, "plant": "yes"}, 2)))
    code, recs, _ = run(capsys, "approx", "bcp", "-i", str(f), "--eps", "0.3")
    assert code == 0 and recs[0]["in_window"]


def test_approx_maminip_trials(capsys, tmp_path):
    f = tmp_path / "m.jsonl"
    f.write_text(serialize(generate("minip", {"n": 10, "d": 16}, 1)))
    code, recs, _ = run(capsys, "approx", "maminip", "-i", str(f), "--trials", "2")
    assert code == 0 and [r["seed"] for r in recs] == [0, 1]


def test_verify_exact(capsys):
    code, recs, _ = run(capsys, "verify", "exactip-ov", "--trials", "10")
    assert code == 0 and recs[0]["agree"] == 10 and recs[0]["failures"] == []


def test_verify_zero_trials(capsys):
    code, recs, _ = run(capsys, "verify", "exactip-ov", "--trials", "0")
    assert code == 0 and recs[0]["trials"] == 0 and recs[0]["agree"] == 0


def test_verify_unknown_name(capsys):
    assert main(["verify", "no-such-thing"]) == 2


def test_verify_randomized_report(capsys):
    code, recs, _ = run(capsys, "verify", "mamin", "--trials", "4", "-p", "n=20", "-p", "d=16")
    r = recs[0]
    assert code == 0 and r["randomized"] and r["success_rate"] == 1.0
    assert len(r["wilson95"]) == 2


def test_verify_failure_exit(capsys):
    # the threshold can never be met, so the command reports failure
    assert main(["verify", "mamin", "--trials", "2", "-p", "n=10", "-p", "d=8", "--min-success", "2"]) == 1


def test_verify_byte_identical(capsys):
    a = run(capsys, "--seed", "3", "verify", "gap", "--trials", "4", "-p", "n=20")[2]
    b = run(capsys, "--seed", "3", "verify", "gap", "--trials", "4", "-p", "n=20")[2]
    assert a == b


def test_bench_ladder(capsys):
    code, recs, _ = run(capsys, "bench", "reverse", "--ladder", "64,128,256,512,1024")
    assert code == 0 and [r["n"] for r in recs] == [64, 128, 256, 512, 1024]
    assert all(r["blowup"] == 2.0 for r in recs)


def test_bench_markdown_and_empty(capsys):
    code, _, out = run(capsys, "bench", "exactip-minip", "--ladder", "8,16", "--format", "markdown")
    assert code == 0 and out.startswith("| target")
    code, recs, out = run(capsys, "bench", "reverse", "--ladder", "")
    assert code == 0 and out == ""


def test_bench_unknown(capsys):
    assert main(["bench", "nope"]) == 2


def test_maxsat_dimacs(capsys, tmp_path):
    f = tmp_path / "f.cnf"
    f.write_text(maxsat.to_dimacs(generate("cnf", {"num_vars": 10, "m": 30, "sat": 0.9}, 1)))
    code, recs, _ = run(capsys, "maxsat", "approx", "--input", str(f), "--eps", "0.1")
    assert code == 0 and recs[0]["ratio"] >= 0.8 and len(recs[0]["assignment"]) == 10


def test_maxsat_bad_dimacs(tmp_path):
    f = tmp_path / "bad.cnf"
    f.write_text("p cnf 2 1\n5 0\n")
    assert main(["maxsat", "approx", "--input", str(f)]) == 2


def test_bad_arguments():
    assert main(["gen"]) == 2
    assert main(["gen", "ov", "-p", "n"]) == 2
    assert main(["solve", "-i", "/nonexistent/file"]) == 2


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "ovequiv.cli", "gen", "ov", "-p", "n=2", "-p", "d=3"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["kind"] == "ov"


# ---------------------------------------------------------------- harness

def test_trial_seeds_distinct():
    seeds = {harness.trial_seed(0, i) for i in range(1000)}
    assert len(seeds) == 1000


def test_wilson_interval():
    lo, hi = harness.wilson(90, 100)
    assert lo < 0.9 < hi and harness.wilson(0, 0) is None


def test_verify_threads_match_serial():
    a = harness.verify("mamax", {"n": 16, "d": 12}, trials=6, seed=2, threads=1)
    b = harness.verify("mamax", {"n": 16, "d": 12}, trials=6, seed=2, threads=3)
    assert harness.report_json(a) == harness.report_json(b)


def test_log2_ladder():
    assert harness.log2_ladder(64, 1024) == [64, 128, 256, 512, 1024]


def test_reduce_wrong_input_kind(ov_file):
    assert main(["reduce", "exactip-ov", "-i", ov_file]) == 2


def test_approx_pipeline_params(capsys, tmp_path):
    f = tmp_path / "fp.jsonl"
    f.write_text(serialize(generate("fp", {"n": 8, "d": 3, "plant": "yes"}, 0)))
    code, recs, _ = run(capsys, "approx", "fp", "-i", str(f), "--backend", "ov-pipeline",
                        "-p", "N=8", "-p", "group_len=4")
    assert code in (0, 1) and recs[0]["problem"] == "fp"


def test_approx_pipeline_default_n_is_capped(tmp_path):
    f = tmp_path / "b.jsonl"
    f.write_text(serialize(generate("bcp", {"n": 8, "d": 3, "plant": "yes"}, 0)))
    assert main(["approx", "bcp", "-i", str(f), "--backend", "ov-pipeline"]) == 2
