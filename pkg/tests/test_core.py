import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_samples, write_dataset
from swejudge.core import (
    LCG_INCREMENT,
    LCG_MULTIPLIER,
    DatasetError,
    EvalSample,
    Lcg64,
    ScoreScale,
    TaskKind,
    load_dataset,
    read_samples,
    sample_trial_set,
    seeded_draw,
    write_samples,
)


def record(i, score=None, **extra):
    r = {"id": f"c-{i}", "requirement": f"req {i}", "candidate": f"cand {i}", "reference": f"ref {i}"}
    if score is not None:
        r["human_score"] = score
    r.update(extra)
    return r


def test_load_preserves_order(tmp_path):
    manifest = write_dataset(tmp_path, [record(i, i % 5) for i in range(12)])
    m, samples = load_dataset(manifest)
    assert [s.id for s in samples] == [f"c-{i}" for i in range(12)]
    assert m.task_kind is TaskKind.CODE_GENERATION
    assert m.scale == ScoreScale(0, 4, 1)


def test_out_of_scale_names_sample(tmp_path):
    manifest = write_dataset(tmp_path, [record(1, 3), record(2, 7)], scale=(1, 5, 1))
    with pytest.raises(DatasetError, match=r"c-2.*outside scale"):
        load_dataset(manifest)


def test_duplicate_id(tmp_path):
    manifest = write_dataset(tmp_path, [record(3), record(4), record(3)])
    with pytest.raises(DatasetError, match=r"duplicate id 'c-3'"):
        load_dataset(manifest)


def test_malformed_line_reports_line_number(tmp_path):
    manifest = write_dataset(tmp_path, [record(1), "{not json", record(2)])
    with pytest.raises(DatasetError, match="line 2"):
        load_dataset(manifest)


@pytest.mark.parametrize("missing", ["id", "requirement", "candidate", "reference"])
def test_missing_required_field(tmp_path, missing):
    r = record(1)
    del r[missing]
    manifest = write_dataset(tmp_path, [r])
    with pytest.raises(DatasetError, match=missing):
        load_dataset(manifest)


def test_empty_reference_rejected(tmp_path):
    manifest = write_dataset(tmp_path, [record(1, reference="  ")])
    with pytest.raises(DatasetError, match="reference"):
        load_dataset(manifest)


def test_missing_manifest(tmp_path):
    with pytest.raises(DatasetError, match="manifest not found"):
        load_dataset(tmp_path / "nope.json")


def test_bad_task_kind(tmp_path):
    manifest = write_dataset(tmp_path, [record(1)], task_kind="poetry")
    with pytest.raises(DatasetError, match="task_kind"):
        load_dataset(manifest)


def test_per_sample_task_kind(tmp_path):
    manifest = write_dataset(tmp_path, [record(1, task_kind="program_repair"), record(2)])
    _, samples = load_dataset(manifest)
    assert samples[0].task_kind is TaskKind.PROGRAM_REPAIR
    assert samples[1].task_kind is None


@pytest.mark.parametrize("args", [(4, 0, 1), (0, 4, 0), (0, 1, 0.3), (0, 4, -1)])
def test_invalid_scales(args):
    with pytest.raises(DatasetError):
        ScoreScale(*args)


def test_scale_grid():
    assert ScoreScale(1, 5, 1).grid() == [1, 2, 3, 4, 5]
    assert ScoreScale(0, 1, 0.25).n_steps == 4


texts = st.text(min_size=1).filter(lambda s: s.strip())


@given(st.lists(st.tuples(texts, texts, texts, st.none() | st.integers(0, 4)), max_size=8))
def test_write_then_load_round_trip(rows):
    import tempfile
    from pathlib import Path

    samples = [EvalSample(f"id-{i}", r, c, ref, hs) for i, (r, c, ref, hs) in enumerate(rows)]
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "s.jsonl"
        write_samples(samples, path)
        assert read_samples(path, ScoreScale(0, 4, 1)) == samples


def test_lcg_matches_formula():
    rng = Lcg64(42)
    state = 42
    for _ in range(5):
        state = (state * LCG_MULTIPLIER + LCG_INCREMENT) % 2 ** 64
        assert rng.next_u32() == state >> 32


def _reference_draw(n, k, seed):
    state, idx = seed, list(range(n))
    for i in range(k):
        state = (state * 6364136223846793005 + 1442695040888963407) % 2 ** 64
        j = i + (state >> 32) % (n - i)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k]


def test_seeded_draw_frozen_vector():
    # cross-implementation check value for n=12, k=10, seed=42
    assert _reference_draw(12, 10, 42) == [9, 4, 0, 7, 8, 2, 10, 1, 3, 11]
    assert seeded_draw(12, 10, 42) == [9, 4, 0, 7, 8, 2, 10, 1, 3, 11]


@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 2 ** 64 - 1))
def test_seeded_draw_matches_reference(n, k, seed):
    assert seeded_draw(n, k, seed) == _reference_draw(n, min(k, n), seed)


def test_trial_set_deterministic():
    samples = make_samples([i % 5 for i in range(100)])
    a = sample_trial_set(samples, 10, seed=42)
    b = sample_trial_set(samples, 10, seed=42)
    assert a == b and len(a) == 10
    assert sample_trial_set(samples, 10, seed=43) != a


def test_trial_set_clamps():
    samples = make_samples([1, 2, 3, 0, 4, 2])
    assert sorted(s.id for s in sample_trial_set(samples, 10)) == sorted(s.id for s in samples)


def test_trial_set_skips_unannotated():
    samples = make_samples([1, None, 3, None, 2])
    drawn = sample_trial_set(samples, 10)
    assert all(s.human_score is not None for s in drawn) and len(drawn) == 3


def test_trial_set_too_few_annotated():
    with pytest.raises(DatasetError, match="at least 2"):
        sample_trial_set(make_samples([1, None, None]), 10)
    with pytest.raises(ValueError):
        sample_trial_set(make_samples([1, 2, 3]), 1)


@given(st.lists(st.integers(0, 4), min_size=2, max_size=60), st.integers(2, 70), st.integers(0, 2 ** 70))
def test_trial_set_is_subset_without_duplicates(scores, k, seed):
    samples = make_samples(scores)
    drawn = sample_trial_set(samples, k, seed)
    ids = [s.id for s in drawn]
    assert len(ids) == len(set(ids)) == min(k, len(samples))
    assert set(ids) <= {s.id for s in samples}
