import json

import pytest

from src.arcorder.checkpoint import CheckpointMismatchError, CheckpointStore, sidecar_path
from src.arcorder.config import OrderingConfig
from src.arcorder.dependencies import build_dependencies
from src.arcorder.digraph import build_graph
from src.arcorder.metrics import forward_weight
from src.arcorder.nodes import stages as stage_nodes
from src.arcorder.pipeline import (
    PipelineError,
    build_pipeline_workflow,
    run_pipeline,
    split_schedule,
)
from src.arcorder.ranking import Ranking, validate_ranking


def _config(stages, **pipeline):
    return OrderingConfig(None, overrides={"pipeline": {"stages": stages, **pipeline}})


def test_split_schedule():
    cfg = OrderingConfig(None)
    seed, sweep = split_schedule(cfg.pipeline.stages)
    assert seed.name == "greedy"
    assert [stage.label for stage in sweep][0] == "refine"
    seed, sweep = split_schedule(_config(["refine", "greedy"]).pipeline.stages)
    assert seed is None
    assert len(sweep) == 2


def test_workflow_nodes(g3):
    deps = build_dependencies(g3, config=OrderingConfig(None))
    nodes = set(build_pipeline_workflow(deps).get_graph().nodes)
    assert {
        "seed",
        "refine#0",
        "scc-blocks@0#1",
        "scc-blocks@half#2",
        "flat#3",
        "scc-global#4",
        "check_sweep",
    } <= nodes


def test_greedy_only_schedule(g3):
    result = run_pipeline(g3, _config(["greedy"]))
    assert forward_weight(g3, result.ranking) == 15
    assert round(result.report.forward_ratio, 4) == 0.8333
    assert result.stop_reason == "seed only"
    assert [record["stage"] for record in result.history] == ["greedy"]


def test_greedy_then_refine(g4):
    result = run_pipeline(g4, _config(["greedy", "refine"]))
    assert result.report.forward_weight == 12


def test_identity_seed_until_no_improvement(g4):
    result = run_pipeline(g4, _config(["refine"]))
    assert result.ranking.external_ids(g4) == ["3", "1", "2"]
    assert result.stop_reason == "no improvement"
    assert result.sweeps == 2
    stages = [(r["sweep"], r["stage"], r["improved"]) for r in result.history]
    assert stages == [(0, "identity", True), (1, "refine", True), (2, "refine", False)]


def test_initial_ranking_replaces_greedy(g3):
    initial = validate_ranking(g3, ["a", "b", "c"])
    result = run_pipeline(g3, _config(["greedy", "refine"]), initial=initial)
    assert result.history[0]["stage"] == "initial"
    assert result.history[0]["forward_weight"] == 8
    assert result.report.forward_weight == 15


def test_max_sweeps(g4):
    result = run_pipeline(g4, _config(["refine"], max_sweeps=1))
    assert result.stop_reason == "max sweeps"
    assert result.sweeps == 1


def test_time_limit_skips_stages(g4):
    result = run_pipeline(g4, _config(["refine"], time_limit_seconds=1e-9))
    assert result.stop_reason == "time limit"
    assert result.ranking == Ranking.identity(3)
    assert len(result.history) == 1


def test_non_improving_stage_keeps_best(g3):
    initial = validate_ranking(g3, ["c", "a", "b"])
    result = run_pipeline(g3, _config(["flat", "scc-blocks"]), initial=initial)
    assert result.ranking == initial
    assert not any(record["improved"] for record in result.history[1:])


def test_checkpoint_written_and_resumed(g4, tmp_path):
    path = tmp_path / "best.txt"
    cfg = _config(["refine"], checkpoint=str(path))
    result = run_pipeline(g4, cfg)
    meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    assert meta["forward_weight"] == result.report.forward_weight == 12
    assert [entry["stage"] for entry in meta["history"]] == ["identity", "refine"]

    resumed = run_pipeline(g4, _config(["scc-global"], checkpoint=str(path)), resume=True)
    assert resumed.history[0]["stage"] == "initial"
    assert resumed.history[0]["forward_weight"] == 12
    assert resumed.ranking.external_ids(g4) == ["3", "1", "2"]


def test_checkpoint_for_other_graph_is_refused(g4, tmp_path):
    path = tmp_path / "best.txt"
    run_pipeline(g4, _config(["refine"], checkpoint=str(path)))
    relabelled = build_graph([("3", "1", 10), ("1", "2", 2), ("2", "3", 3)], nodes=("1", "2", "3"))
    with pytest.raises(CheckpointMismatchError):
        run_pipeline(relabelled, _config(["refine"], checkpoint=str(path)), resume=True)


def test_stage_failure_leaves_checkpoint(g4, tmp_path, monkeypatch):
    def broken(deps, stage, ranking):
        raise RuntimeError("boom")

    monkeypatch.setitem(stage_nodes.STAGE_RUNNERS, "flat", broken)
    path = tmp_path / "best.txt"
    with pytest.raises(PipelineError, match="boom"):
        run_pipeline(g4, _config(["greedy", "flat"], checkpoint=str(path)))
    store = CheckpointStore(path, g4, "any")
    assert forward_weight(g4, store.load()) == 12


def test_default_schedule_is_monotone(rng, graph_factory):
    for _ in range(15):
        g = graph_factory(rng, int(rng.integers(5, 60)), float(rng.uniform(0.05, 0.3)))
        result = run_pipeline(g, OrderingConfig(None))
        best = [record["best_forward_weight"] for record in result.history]
        assert best == sorted(best)
        assert result.report.forward_weight == best[-1]
        assert forward_weight(g, result.ranking) == result.report.forward_weight


def test_run_is_deterministic(rng, graph_factory):
    for _ in range(5):
        g = graph_factory(rng, int(rng.integers(5, 50)), float(rng.uniform(0.05, 0.3)))
        first = run_pipeline(g, OrderingConfig(None))
        second = run_pipeline(g, OrderingConfig(None))
        assert second.ranking == first.ranking
        assert second.sweeps == first.sweeps
        assert second.stop_reason == first.stop_reason
        assert [(r["stage"], r["forward_weight"]) for r in second.history] == [
            (r["stage"], r["forward_weight"]) for r in first.history
        ]
