import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import make_samples, mock_backend
from swejudge import SWEJudge
from swejudge.backend import MockScript, perfect_judge_script
from swejudge.core import ScoreScale
from swejudge.ensemble import Team
from swejudge.pipeline import (
    PipelineInterrupted,
    dataset_statistics,
    run_pipeline,
    strip_volatile,
)
from swejudge.strategies import StrategyId


def test_params_and_clone(perfect_toy):
    _, _, backend = perfect_toy
    judge = SWEJudge(backend=backend, scale=(1, 5, 1), team="P1b,P3", seed=7)
    params = judge.get_params()
    assert params["seed"] == 7 and params["team"] == "P1b,P3" and params["scale"] == (1, 5, 1)
    twin = clone(judge)
    assert twin.get_params()["seed"] == 7
    assert twin.backend is backend
    assert not hasattr(twin, "team_")


def test_not_fitted(toy):
    _, samples = toy
    with pytest.raises(NotFittedError):
        SWEJudge(backend=mock_backend(MockScript())).predict(samples)


def test_fit_requires_backend(toy):
    with pytest.raises(ValueError, match="backend"):
        SWEJudge().fit(toy[1])


def test_perfect_judge_fit_predict(perfect_toy):
    manifest, samples, backend = perfect_toy
    judge = SWEJudge(backend=backend, scale=manifest.scale).fit(samples)
    assert len(judge.trial_ids_) == 10
    assert len(judge.trial_results_) == 57
    assert judge.trial_result_.avg_cor == 1.0
    # every team is perfect, so the tie rule picks the first one
    assert str(judge.team_) == "P1a,P1b"
    predicted = judge.predict(samples)
    assert isinstance(predicted, np.ndarray) and predicted.shape == (12,)
    np.testing.assert_array_equal(predicted, [s.human_score for s in samples])
    assert judge.score(samples) == 1.0
    raw = judge.transform(samples)
    assert raw.shape == (12, 2)
    np.testing.assert_array_equal(raw[:, 0], [25 * s.human_score for s in samples])


def test_trial_records_reused(perfect_toy):
    manifest, samples, backend = perfect_toy
    judge = SWEJudge(backend=backend, scale=manifest.scale).fit(samples)
    calls_after_fit = backend.stats.live_calls
    judge.predict([s for s in samples if s.id in judge.trial_ids_])
    assert backend.stats.live_calls == calls_after_fit
    assert backend.stats.cache_hits == 0


def test_fixed_team_skips_selection():
    samples = make_samples([None, None, None])
    script = perfect_judge_script(samples, ScoreScale(0, 4, 1), [StrategyId.P1b, StrategyId.P3])
    backend = mock_backend(script)
    judge = SWEJudge(backend=backend, team=["P3", "P1b"]).fit(samples)
    assert judge.team_ == Team.parse("P1b,P3")
    assert judge.trial_ids_ == [] and judge.trial_result_ is None
    np.testing.assert_array_equal(judge.predict(samples), [2.0, 2.0, 2.0])
    assert set(k[1] for k in judge.records_) == {StrategyId.P1b, StrategyId.P3}


def test_selection_needs_annotations():
    samples = make_samples([None, 3, None])
    judge = SWEJudge(backend=mock_backend(perfect_judge_script(samples, ScoreScale(0, 4, 1))))
    with pytest.raises(ValueError, match="at least 2"):
        judge.fit(samples)


def test_y_overrides_labels():
    samples = make_samples([None] * 6)
    y = [0, 1, 2, 3, 4, 2]
    labelled = make_samples(y)
    backend = mock_backend(perfect_judge_script(labelled, ScoreScale(0, 4, 1)))
    judge = SWEJudge(backend=backend, trial_size=4).fit(samples, y)
    assert len(judge.trial_ids_) == 4
    assert judge.score(samples, y) == 1.0
    with pytest.raises(ValueError, match="labels"):
        SWEJudge(backend=backend).fit(samples, y[:3])


def test_trial_size_clamped():
    samples = make_samples([0, 4, 2])
    backend = mock_backend(perfect_judge_script(samples, ScoreScale(0, 4, 1)))
    judge = SWEJudge(backend=backend, trial_size=50).fit(samples)
    assert sorted(judge.trial_ids_) == sorted(s.id for s in samples)


def test_dict_samples_accepted():
    rows = [{"id": f"d{i}", "requirement": "r", "candidate": f"c{i}", "reference": "f",
             "human_score": float(i)} for i in range(4)]
    from swejudge.core import EvalSample
    backend = mock_backend(perfect_judge_script([EvalSample(**r) for r in rows], ScoreScale(0, 4, 1)))
    np.testing.assert_array_equal(SWEJudge(backend=backend).fit(rows).predict(rows), [0, 1, 2, 3])


def test_duplicate_ids_rejected():
    samples = make_samples([1, 2])
    with pytest.raises(ValueError, match="duplicate"):
        SWEJudge(backend=mock_backend(MockScript())).fit(samples + samples[:1])


def test_pipeline_report_shape(perfect_toy):
    manifest, samples, backend = perfect_toy
    report = run_pipeline(manifest, samples, backend).to_dict()
    assert report["selection"] == "trial" and report["selected_team"] == "P1a,P1b"
    assert report["backend"] == "mock" and report["seed"] == 42
    assert len(report["trial_correlations"]["teams"]) == 57
    stats = report["statistics"]
    assert stats["n"] == 12
    assert stats["kendall_tau"] == stats["spearman"] == stats["pearson"] == 1.0
    assert stats["cohen_kappa"] == 1.0
    assert [e["id"] for e in report["per_sample"]] == [s.id for s in samples]
    assert "created_at" in report and "created_at" not in strip_volatile(report)


def test_pipeline_override(perfect_toy):
    manifest, samples, backend = perfect_toy
    report = run_pipeline(manifest, samples, backend, team="P1b,P3").to_dict()
    assert report["selection"] == "override" and report["selected_team"] == "P1b,P3"
    assert report["trial_ids"] == [] and report["trial_correlations"]["selected"] is None


def test_pipeline_interrupt_keeps_records(perfect_toy):
    manifest, samples, backend = perfect_toy
    original = backend.complete
    count = 0

    def flaky(conversation, context=None):
        nonlocal count
        count += 1
        if count > 5:
            raise KeyboardInterrupt
        return original(conversation, context)

    backend.complete = flaky
    with pytest.raises(PipelineInterrupted) as info:
        run_pipeline(manifest, samples, backend)
    assert 0 < len(info.value.records) <= 5


def test_dataset_statistics_edge_cases():
    scale = ScoreScale(0, 4, 1)
    samples = make_samples([1, None, 3])
    assert dataset_statistics(samples, {"s-0": 1.0, "s-2": 3.0}, scale)["n"] == 2
    assert dataset_statistics(samples[:2], {"s-0": 1.0, "s-1": 2.0}, scale) is None
    stats = dataset_statistics(samples, {"s-0": 2.0, "s-2": 2.0}, scale)
    assert stats["pearson"] is None and stats["avg_cor"] == 0.0
