import json

import pytest

from anchormatch.graph import write_graph
from anchormatch.workbench.cli import EXIT_DIGEST, EXIT_FORMAT, EXIT_OK, EXIT_PARSE, EXIT_USAGE, main

from conftest import sample_graph, sample_query


@pytest.fixture
def workspace(tmp_path):
    graph = tmp_path / "g.graph"
    qdir = tmp_path / "queries"
    qdir.mkdir()
    write_graph(sample_graph(), graph)
    write_graph(sample_query(), qdir / "q.graph")
    return tmp_path, graph, qdir


def test_verify_suite_is_exact(capsys):
    assert main(["verify", "--suite", "50", "--backend", "wl", "--workers", "2"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "50/50 exact"


def test_verify_suite_untrained_gin(capsys):
    assert main(["verify", "--suite", "6", "--backend", "gin-untrained", "--seed", "3"]) == EXIT_OK
    assert "6/6 exact" in capsys.readouterr().out


def test_index_query_round_trip(workspace, capsys):
    tmp, graph, qdir = workspace
    idx = tmp / "g.idx"
    assert main(["build-index", "--graph", str(graph), "--d-star", "3", "--backend", "wl", "--out", str(idx)]) == EXIT_OK
    capsys.readouterr()
    rc = main(["query", "--graph", str(graph), "--index", str(idx), "--backend", "wl", "--show-plan", str(qdir)])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "# q.graph: 2 matches" in out
    assert "q0->u12 q1->u11 q2->u8 q3->u7 q4->u9" in out
    assert main(["verify", "--graph", str(graph), "--index", str(idx), "--backend", "wl", str(qdir)]) == EXIT_OK
    assert "1/1 exact" in capsys.readouterr().out


def test_digest_mismatch_exit_code(workspace, capsys):
    tmp, graph, qdir = workspace
    model = tmp / "m.bin"
    idx = tmp / "g.idx"
    assert main(["train", "--graph", str(graph), "--untrained", "--seed", "1", "--out", str(model)]) == EXIT_OK
    assert main(["build-index", "--graph", str(graph), "--d-star", "3", "--model", str(model), "--out", str(idx)]) == EXIT_OK
    rc = main(["query", "--graph", str(graph), "--index", str(idx), "--backend", "wl", str(qdir)])
    assert rc == EXIT_DIGEST
    assert "digest mismatch" in capsys.readouterr().err


def test_bad_files_exit_codes(workspace):
    tmp, graph, qdir = workspace
    junk = tmp / "junk.idx"
    junk.write_bytes(b"not an index")
    assert main(["query", "--graph", str(graph), "--index", str(junk), "--backend", "wl", str(qdir)]) == EXIT_FORMAT
    broken = tmp / "broken.graph"
    broken.write_text("t 2 1\nv 0 0\nv 1 0\ne 0 9\n")
    assert main(["verify", "--graph", str(broken), "--backend", "wl", str(qdir)]) == EXIT_PARSE


def test_usage_errors():
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["build-index", "--graph", "x"]) == EXIT_USAGE


def test_bench_report_accounting(workspace, capsys):
    tmp, graph, qdir = workspace
    idx = tmp / "g.idx"
    report = tmp / "report.jsonl"
    main(["build-index", "--graph", str(graph), "--d-star", "3", "--backend", "wl", "--out", str(idx)])
    args = ["bench", "--graph", str(graph), "--index", str(idx), "--backend", "wl", "--oracle", "--out", str(report), str(qdir)]
    assert main(args) == EXIT_OK
    records = [json.loads(x) for x in report.read_text().splitlines()]
    query, summary = records
    assert query["matches"] == summary["matches"] == 2
    assert query["total_us"] == sum(query["timings_us"].values())
    assert 0.0 <= summary["filtering_power"] <= 1.0
    assert "filtering power" in capsys.readouterr().err


def test_generators_and_stats(tmp_path, capsys):
    graph = tmp_path / "g.graph"
    assert main(["gen-graph", "--model", "ba", "--vertices", "200", "--sigma", "5", "--seed", "2", "--out", str(graph)]) == EXIT_OK
    qdir = tmp_path / "qs"
    assert main(["gen-queries", "--graph", str(graph), "--size", "4", "--count", "3", "--out-dir", str(qdir)]) == EXIT_OK
    assert sorted(p.name for p in qdir.iterdir()) == ["q4_0000.graph", "q4_0001.graph", "q4_0002.graph"]
    idx = tmp_path / "g.idx"
    main(["build-index", "--graph", str(graph), "--d-star", "6", "--backend", "wl", "--out", str(idx)])
    capsys.readouterr()
    assert main(["stats", "--graph", str(graph), "--index", str(idx), "--backend", "wl", "--pairs", "1000"]) == EXIT_OK
    assert "conflict_ratio\t0.000000e+00" in capsys.readouterr().out
    assert main(["verify", "--graph", str(graph), "--index", str(idx), "--backend", "wl", str(qdir)]) == EXIT_OK

