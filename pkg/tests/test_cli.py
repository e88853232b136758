import subprocess
import sys

import numpy as np
import pytest

from msep import formats
from msep.cli import EXIT_FORMAT, EXIT_IO, EXIT_OK, EXIT_PRECONDITION, EXIT_USAGE, grid_spec, main
from msep.msp_core import MspInstance, objective
from msep.graph_core import Graph

from conftest import chain_instance, grid_a_instance


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def chain_file(tmp_path):
    p = tmp_path / "chain.inst"
    formats.write_instance(p, chain_instance())
    return p


def test_solve_prints_summary_and_trace(capsys, chain_file, tmp_path):
    sep = tmp_path / "s.sep"
    code, out, _ = run(capsys, "solve", chain_file, "--algo", "gss", "--trace", "--out", sep)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[:5] == ["16", "10", "5", "1", "0"]
    assert lines[5].startswith("objective=0 nodes_in_separator=")
    assert " moves=4 wall_ms=" in lines[5]
    n, ids = formats.loads_separator(sep.read_text())
    assert n == 4 and objective(chain_instance(), ids) == 0


def test_trace_subcommand(capsys, tmp_path):
    p = tmp_path / "grid_a.inst"
    formats.write_instance(p, grid_a_instance())
    code, out, _ = run(capsys, "trace", p, "--algo", "gss")
    assert code == EXIT_OK
    assert [float(x) for x in out.split()] == [13, 8, 4, 1, -1, -3, -4]


def test_bias_sweep_table(capsys, chain_file):
    code, out, _ = run(capsys, "solve", chain_file, "--bias-grid=-1:1:5")
    assert code == EXIT_OK
    rows = out.splitlines()
    assert rows[0].split("\t") == ["bias", "objective", "nodes_in_separator", "moves", "wall_ms"]
    assert len(rows) == 6
    assert [float(r.split("\t")[0]) for r in rows[1:]] == [-1, -0.5, 0, 0.5, 1]


def test_dominant_precondition_exit_code(capsys, chain_file):
    code, _, err = run(capsys, "solve", chain_file, "--algo", "dominant")
    assert code == EXIT_PRECONDITION
    assert "precondition" in err


def test_dominant_solves_a_preference_instance(capsys, tmp_path):
    inst = MspInstance(Graph(3, [(0, 1), (1, 2)]), [(0, 2, -8.0)], np.array([1.0, 2.0, 4.0]))
    p = tmp_path / "d.inst"
    formats.write_instance(p, inst)
    code, out, _ = run(capsys, "solve", p, "--algo", "dominant")
    assert code == EXIT_OK
    # S = {0} cuts the repulsive pair at node cost 1
    assert out.startswith("objective=-7 nodes_in_separator=1 ")


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.inst"
    bad.write_text("MSEPINST 2 1 0\ne 0 1\nn 0 1\nn 1 zz\n")
    code, _, err = run(capsys, "solve", bad)
    assert code == EXIT_FORMAT and "line 4" in err
    code, _, _ = run(capsys, "solve", tmp_path / "missing.inst")
    assert code == EXIT_IO
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--kind", "cells", "--t", "1.5", "--seed", "1", "--out", str(tmp_path / "x")])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == EXIT_USAGE


def test_grid_spec():
    assert grid_spec("0:1:3").tolist() == [0, 0.5, 1]
    assert grid_spec("0.1,0.2").tolist() == [0.1, 0.2]
    with pytest.raises(Exception):
        grid_spec("0:1:0")


def test_synth_build_watershed_evaluate(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "synth", "--kind", "cells", "--m", 16, "--t", 0.3, "--seed", 0, "--out", a)[0] == EXIT_OK
    assert run(capsys, "synth", "--kind", "cells", "--m", 16, "--t", 0.3, "--seed", 0, "--out", b)[0] == EXIT_OK
    for suffix in ("_truth.vol", "_gray.vol"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()
    truth, gray = tmp_path / "a_truth.vol", tmp_path / "a_gray.vol"

    code, out, _ = run(capsys, "build", gray, "--kind", "cells", "--out", tmp_path / "a.inst")
    assert code == EXIT_OK and out.startswith("nodes=4096 edges=11520 ")

    code, out, _ = run(capsys, "solve", tmp_path / "a.inst", "--out", tmp_path / "a.sep")
    assert code == EXIT_OK

    sep = tmp_path / "t.sep"
    sep.write_text(formats.dumps_separator(4096, formats.read_volume(truth).truth_mask()))
    code, out, _ = run(capsys, "evaluate", "--pred", sep, "--truth", truth)
    assert code == EXIT_OK
    assert out.splitlines() == [
        "viws vi=0.000000 fc=0.000000 fj=0.000000",
        "vins vi=0.000000 fcns=0.000000 fjns=0.000000",
    ]
    code, out, _ = run(capsys, "evaluate", "--pred", tmp_path / "a.sep", "--truth", truth)
    assert code == EXIT_OK and out.startswith("viws vi=")

    code, out, _ = run(capsys, "watershed", gray, "--start", 0.3, "--end", 0.5, "--out", tmp_path / "w.sep")
    assert code == EXIT_OK and out.startswith("nodes_in_separator=")
    assert formats.loads_separator((tmp_path / "w.sep").read_text())[0] == 4096

    code, out, _ = run(capsys, "watershed", gray, "--start-grid", "0.2,0.3", "--end-grid", "0.5,0.6", "--truth", truth)
    rows = out.splitlines()
    assert code == EXIT_OK and len(rows) == 5 and rows[0].endswith("viws\tfc\tfj\tvins")

    code, _, _ = run(capsys, "watershed", gray, "--start", 0.6, "--end", 0.5)
    assert code == EXIT_PRECONDITION
    code, _, _ = run(capsys, "build", truth, "--kind", "cells", "--out", tmp_path / "z.inst")
    assert code == EXIT_PRECONDITION


def test_reduce_and_oracle(capsys, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("MSEPQUBO 2\nq 0 0 -1\nq 0 1 3\nq 1 1 -1\n")
    code, out, _ = run(capsys, "oracle", "qubo", q)
    assert code == EXIT_OK and out.strip() == "value=1 x=11"
    code, out, _ = run(capsys, "reduce", "--from", "qubo", q, "--out", tmp_path / "q.inst")
    assert code == EXIT_OK and out.startswith("offset=")
    offset = float(out.split()[0].split("=")[1])
    sign = int(out.split()[1].split("=")[1])
    code, out, _ = run(capsys, "oracle", "msp", tmp_path / "q.inst")
    assert code == EXIT_OK
    assert sign * (float(out.split()[0].split("=")[1]) - offset) == pytest.approx(1, abs=1e-9)

    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n")
    code, _, _ = run(capsys, "reduce", "--from", "3sat", cnf, "--out", tmp_path / "s.inst", "--out-partial", tmp_path / "s.part")
    assert code == EXIT_OK
    code, out, _ = run(capsys, "oracle", "consistency", tmp_path / "s.inst", "--partial", tmp_path / "s.part")
    assert code == EXIT_OK and out.strip() == "consistent=true"
    code, _, _ = run(capsys, "oracle", "consistency", tmp_path / "s.inst")
    assert code == EXIT_PRECONDITION

    code, _, _ = run(capsys, "reduce", "--from", "msp", tmp_path / "q.inst", "--out", tmp_path / "q.lmp")
    assert code == EXIT_OK
    code, out, _ = run(capsys, "oracle", "lmp", tmp_path / "q.lmp")
    assert code == EXIT_OK and out.startswith("objective=")


def test_bench_has_one_row_per_size(capsys):
    code, out, _ = run(capsys, "bench", "--kind", "cells", "--m", 8, 10, "--t", 0.5, "--repeats", 2)
    rows = out.splitlines()
    assert code == EXIT_OK and len(rows) == 3
    assert rows[1].split("\t")[:2] == ["8", "512"]


def test_console_entry_point(tmp_path, chain_file):
    proc = subprocess.run([sys.executable, "-m", "msep.cli", "solve", str(chain_file)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("objective=0 ")
    proc = subprocess.run([sys.executable, "-m", "msep.cli", "solve", str(tmp_path / "nope")], capture_output=True, text=True)
    assert proc.returncode == EXIT_IO
