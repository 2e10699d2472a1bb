import csv
import io
import json

import pytest

from triplehop.cli import main
from triplehop.synth import erdos_renyi, to_tsv

from conftest import TINY_LINES


@pytest.fixture
def tiny_build(tmp_path):
    tsv = tmp_path / "kg.tsv"
    tsv.write_text("\n".join(TINY_LINES) + "\n")
    graph_dir = str(tmp_path / "graph")
    assert main(["build", "--triples", str(tsv), "--out", graph_dir]) == 0
    return tsv, graph_dir


@pytest.fixture
def tiny_partitioned(tiny_build, tmp_path):
    _, graph_dir = tiny_build
    part_dir = str(tmp_path / "parts")
    assert main(["partition", "--graph", graph_dir, "--m", "2", "--out", part_dir]) == 0
    return graph_dir, part_dir


def out_lines(capsys):
    return [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]


class TestBuildPartition:
    def test_build_emits_counts_json(self, tiny_build, capsys):
        tsv, graph_dir = tiny_build
        main(["build", "--triples", str(tsv), "--out", graph_dir])
        (body,) = out_lines(capsys)
        assert body["triples"] == 4

    def test_partition_m0_is_usage_error(self, tiny_build):
        _, graph_dir = tiny_build
        assert main(["partition", "--graph", graph_dir, "--m", "0", "--out", "x"]) == 1

    def test_build_parse_error_exit_2(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("only-one-field\n")
        assert main(["build", "--triples", str(bad), "--out", str(tmp_path / "g")]) == 2


class TestQuery:
    def test_single_graph_hops(self, tiny_build, capsys):
        _, graph_dir = tiny_build
        code = main(
            ["query", "--graph", graph_dir, "--entities", "A", "--hops", "2",
             "--semantics", "exact"]
        )
        assert code == 0
        lines = out_lines(capsys)
        assert lines[0] == {"entities": ["B", "C"], "hop": 1, "triple_count": 2}
        assert lines[1]["entities"] == ["A", "C"]

    def test_unknowns_on_stderr_exit_zero(self, tiny_build, capsys):
        _, graph_dir = tiny_build
        code = main(
            ["query", "--graph", graph_dir, "--entities", "A,ZZZ", "--hops", "1"]
        )
        captured = capsys.readouterr()
        assert code == 0
        assert "unknown entity: ZZZ" in captured.err
        assert "ZZZ" not in captured.out

    def test_entities_from_file(self, tiny_build, tmp_path, capsys):
        _, graph_dir = tiny_build
        listing = tmp_path / "seeds.txt"
        listing.write_text("A\nB\n")
        assert main(["query", "--graph", graph_dir, "--entities", str(listing),
                     "--hops", "1"]) == 0
        (line,) = out_lines(capsys)
        # frontier semantics: B is a seed, so hop 1 holds only C
        assert line["entities"] == ["C"]

    def test_partitioned_with_paths(self, tiny_partitioned, capsys):
        _, part_dir = tiny_partitioned
        code = main(
            ["query", "--partitioned", part_dir, "--entities", "A", "--hops", "2",
             "--paths", "--max-paths", "1", "--cache", "1"]
        )
        assert code == 0
        lines = out_lines(capsys)
        assert lines[-2] == {"path": [["A", "r1", "B"], ["B", "r2", "C"]]}
        assert lines[-1] == {"paths_truncated": True}

    def test_missing_target_usage_error(self):
        assert main(["query", "--entities", "A", "--hops", "1"]) == 1

    def test_unknown_flag_usage_error(self, capsys):
        assert main(["query", "--frobnicate"]) == 1


class TestBenchScaleVerify:
    def test_bench_csv_stdout(self, tmp_path, capsys):
        ts = erdos_renyi(50, 150, 3, seed=41)
        tsv = tmp_path / "kg.tsv"
        tsv.write_text(to_tsv(ts))
        graph_dir = str(tmp_path / "g")
        main(["build", "--triples", str(tsv), "--out", graph_dir])
        capsys.readouterr()
        code = main(["bench", "--graph", graph_dir, "--depths", "1,2",
                     "--queries", "3", "--oracle", "on"])
        captured = capsys.readouterr()
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(captured.out)))
        assert [r["factor"] for r in rows] == ["hops", "hops"]
        assert all(r["jaccard"] == "1.000000" for r in rows)
        assert "fingerprint" in captured.err

    def test_scale_csv_stdout(self, tiny_partitioned, capsys):
        _, part_dir = tiny_partitioned
        code = main(["scale", "--partitioned", part_dir, "--hops", "1",
                     "--batch-sizes", "2", "--cache-sizes", "1,2",
                     "--base-cache", "2", "--queries", "4"])
        captured = capsys.readouterr()
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(captured.out)))
        assert {r["factor"] for r in rows} == {"hops", "batch_size", "cache_size", "semantics"}

    def test_verify_passes_on_correct_build(self, tiny_partitioned, capsys):
        graph_dir, part_dir = tiny_partitioned
        code = main(["verify", "--graph", graph_dir, "--partitioned", part_dir,
                     "--queries", "3", "--depths", "1,2"])
        captured = capsys.readouterr()
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(captured.out)))
        assert all(r["jaccard"] == "1.000000" for r in rows)

    def test_verify_fails_on_mismatched_partition(self, tmp_path, capsys):
        # partition a different graph, then verify against the wrong base
        a = erdos_renyi(40, 120, 3, seed=42)
        b = erdos_renyi(40, 120, 3, seed=43)
        for name, ts in (("a", a), ("b", b)):
            (tmp_path / f"{name}.tsv").write_text(to_tsv(ts))
            main(["build", "--triples", str(tmp_path / f"{name}.tsv"),
                  "--out", str(tmp_path / name)])
        main(["partition", "--graph", str(tmp_path / "b"), "--m", "2",
              "--out", str(tmp_path / "b-parts")])
        capsys.readouterr()
        code = main(["verify", "--graph", str(tmp_path / "a"),
                     "--partitioned", str(tmp_path / "b-parts"),
                     "--queries", "4", "--depths", "1,2"])
        assert code == 3
        assert "FAILED" in capsys.readouterr().err
