import json

import pytest

from src.arcorder.cli import build_parser, main

G3_CSV = "from,to,weight\na,b,5\nb,c,3\nc,a,10\n"


@pytest.fixture
def workspace(tmp_path):
    (tmp_path / "g3.csv").write_text(G3_CSV, encoding="utf-8")
    (tmp_path / "abc.txt").write_text("a\nb\nc\n", encoding="utf-8")
    (tmp_path / "cab.txt").write_text("c\na\nb\n", encoding="utf-8")
    return tmp_path


def _run(workspace, *args):
    return main([args[0], "--input", str(workspace / "g3.csv"), *args[1:]])


def test_parser_lists_every_command():
    parser = build_parser()
    for command in (
        "stats",
        "greedy",
        "refine",
        "scc-blocks",
        "scc-global",
        "flat",
        "pipeline",
        "score",
        "oracle",
        "plot-data",
        "compare",
    ):
        args = parser.parse_args(
            [command, "--input", "g.csv"]
            + (["--ranking", "r.txt"] if command not in ("stats", "greedy", "pipeline", "oracle") else [])
            + (["--other", "o.txt"] if command == "compare" else [])
        )
        assert args.command == command


def test_stats_json(workspace, capsys):
    assert _run(workspace, "stats", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["node_count"] == 3
    assert payload["largest_scc_size"] == 3
    assert payload["density"] == 0.5


def test_greedy_to_stdout_and_file(workspace, capsys):
    assert _run(workspace, "greedy") == 0
    assert capsys.readouterr().out.splitlines() == ["c", "a", "b"]
    out = workspace / "out" / "greedy.txt"
    assert _run(workspace, "greedy", "--output", str(out)) == 0
    assert out.read_text(encoding="utf-8") == "c\na\nb\n"


@pytest.mark.parametrize(
    "command,extra",
    [
        ("refine", []),
        ("scc-blocks", ["--block-size", "3"]),
        ("scc-global", []),
    ],
)
def test_passes_reach_optimum(workspace, capsys, command, extra):
    out = workspace / f"{command}.txt"
    code = _run(
        workspace, command, "--ranking", str(workspace / "abc.txt"), "--output", str(out), *extra
    )
    assert code == 0
    assert out.read_text(encoding="utf-8") == "c\na\nb\n"
    assert "forward weight: 8 -> 15" in capsys.readouterr().out


def test_flat_with_explicit_partition(workspace, capsys):
    out = workspace / "flat.txt"
    code = _run(
        workspace,
        "flat",
        "--ranking",
        str(workspace / "abc.txt"),
        "--arity",
        "3",
        "--level",
        "1",
        "--output",
        str(out),
    )
    assert code == 0
    assert out.read_text(encoding="utf-8") == "c\na\nb\n"


def test_score_and_json(workspace, capsys):
    report = workspace / "score.json"
    assert _run(workspace, "score", "--ranking", str(workspace / "abc.txt"), "--json", str(report)) == 0
    assert "backward edges: 1" in capsys.readouterr().out
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert payload["forward_weight"] == "8"
    assert payload["back_length_max"] == 2


def test_oracle(workspace, capsys):
    assert _run(workspace, "oracle", "--mode", "dp") == 0
    out = capsys.readouterr().out
    assert "forward weight: 15" in out
    assert "optimal orderings: 1" in out
    assert "order: c a b" in out


def test_pipeline_with_checkpoint(workspace, capsys):
    checkpoint = workspace / "best.txt"
    report = workspace / "run.json"
    code = _run(
        workspace,
        "pipeline",
        "--stages",
        "refine,scc-global",
        "--checkpoint",
        str(checkpoint),
        "--report",
        str(report),
        "--output",
        str(workspace / "final.txt"),
    )
    assert code == 0
    assert (workspace / "final.txt").read_text(encoding="utf-8") == "c\na\nb\n"
    assert checkpoint.read_text(encoding="utf-8") == "c\na\nb\n"
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert payload["metrics"]["forward_weight"] == "15"
    assert payload["stop_reason"] == "no improvement"
    assert "sweeps:" in capsys.readouterr().out

    code = _run(workspace, "pipeline", "--stages", "refine", "--checkpoint", str(checkpoint), "--resume")
    assert code == 0


def test_plot_data_shares_bins(workspace, capsys):
    out_dir = workspace / "plots"
    code = _run(
        workspace,
        "plot-data",
        "--ranking",
        str(workspace / "abc.txt"),
        str(workspace / "cab.txt"),
        "--bins",
        "4",
        "--output",
        str(out_dir),
    )
    assert code == 0
    first = (out_dir / "abc.histogram.csv").read_text(encoding="utf-8").splitlines()
    second = (out_dir / "cab.histogram.csv").read_text(encoding="utf-8").splitlines()
    assert [row.split(",")[0] for row in first] == [row.split(",")[0] for row in second]
    assert (out_dir / "abc.cumulative.csv").exists()


def test_compare(workspace, capsys):
    code = _run(
        workspace,
        "compare",
        "--ranking",
        str(workspace / "abc.txt"),
        "--other",
        str(workspace / "cab.txt"),
    )
    assert code == 0
    assert "difference: 7" in capsys.readouterr().out


def test_format_cols_and_precision(tmp_path, capsys):
    path = tmp_path / "edges.csv"
    path.write_text("w,dst,src\n0.5,b,a\n", encoding="utf-8")
    code = main(["stats", "--input", str(path), "--format-cols", "src,dst,w", "--precision", "1", "--json"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["weight_mean"] == 0.5


def test_missing_input_is_io_error(tmp_path, capsys):
    assert main(["stats", "--input", str(tmp_path / "missing.csv")]) == 2
    assert "I/O error" in capsys.readouterr().err


def test_invalid_ranking_is_validation_error(workspace, capsys):
    (workspace / "short.txt").write_text("c\na\n", encoding="utf-8")
    assert _run(workspace, "score", "--ranking", str(workspace / "short.txt")) == 1
    assert "missing 'b'" in capsys.readouterr().err


def test_malformed_edges_is_validation_error(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,1\nb,c\n", encoding="utf-8")
    assert main(["stats", "--input", str(path)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_oracle_limit_is_validation_error(workspace, capsys):
    assert _run(workspace, "oracle", "--limit", "2") == 1
    assert "oracle limit" in capsys.readouterr().err


def test_bad_config_value_is_validation_error(workspace, capsys):
    assert _run(workspace, "scc-blocks", "--ranking", str(workspace / "abc.txt"), "--block-size", "1") == 1


@pytest.mark.parametrize(
    "command,extra",
    [
        ("refine", []),
        ("scc-blocks", ["--block-size", "3"]),
        ("scc-global", []),
        ("flat", ["--arity", "3", "--level", "1"]),
        ("pipeline", ["--stages", "refine"]),
    ],
)
def test_stdout_ranking_is_scorable(workspace, capsys, command, extra):
    if command == "pipeline":
        extra = [*extra, "--checkpoint", str(workspace / "best.txt")]
    assert _run(workspace, command, "--ranking", str(workspace / "abc.txt"), *extra) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines() == ["c", "a", "b"]
    assert "forward weight" in captured.err

    piped = workspace / f"{command}.stdout.txt"
    piped.write_text(captured.out, encoding="utf-8")
    assert _run(workspace, "score", "--ranking", str(piped)) == 0
    assert "forward weight: 15" in capsys.readouterr().out


def test_oversized_weight_is_validation_error(tmp_path, capsys):
    path = tmp_path / "heavy.csv"
    path.write_text("a,b,1e30\n", encoding="utf-8")
    assert main(["stats", "--input", str(path)]) == 1
    assert "line 1" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["stats"], ["no-such-command"], ["refine", "--input", "g.csv"]])
def test_usage_error_exits_one(argv, capsys):
    assert main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "usage" in capsys.readouterr().out
