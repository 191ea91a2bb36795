import json
import sys
from pathlib import Path

import pytest

from swejudge.backend import BackendConfig, JudgeBackend, perfect_judge_script
from swejudge.core import EvalSample, load_dataset

sys.path.insert(0, str(Path(__file__).parent))

REPO = Path(__file__).resolve().parent.parent
TOY_DIR = REPO / "data" / "toy"
TOY_MANIFEST = TOY_DIR / "manifest.json"
TOY_CACHE = TOY_DIR / "cache"
GOLDEN_REPORT = Path(__file__).parent / "golden" / "toy_report.json"


@pytest.fixture
def toy():
    return load_dataset(TOY_MANIFEST)


@pytest.fixture
def sample():
    return EvalSample(
        id="s-1",
        requirement="REQ: add two numbers a and b",
        candidate="CAND: return a - b",
        reference="REF: return a + b",
        human_score=1,
    )


def make_samples(scores, prefix="s"):
    return [
        EvalSample(f"{prefix}-{i}", f"requirement {i}", f"candidate {i}", f"reference {i}", score)
        for i, score in enumerate(scores)
    ]


def write_dataset(tmp_path, records, scale=(0, 4, 1), task_kind="code_generation"):
    samples_path = tmp_path / "samples.jsonl"
    with open(samples_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write((record if isinstance(record, str) else json.dumps(record)) + "\n")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "name": "tmp",
        "task_kind": task_kind,
        "scale": {"min": scale[0], "max": scale[1], "step": scale[2]},
        "samples_path": "samples.jsonl",
    }))
    return manifest


def mock_backend(script, **config):
    return JudgeBackend(BackendConfig(kind="mock", **config), script=script)


@pytest.fixture
def perfect_toy(toy):
    manifest, samples = toy
    return manifest, samples, mock_backend(perfect_judge_script(samples, manifest.scale))
