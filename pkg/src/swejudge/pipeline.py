"""End-to-end run: trial draw, team selection, scoring, report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .core import DatasetManifest, EvalSample, ScoreScale
from .ensemble import EnsembledScore, Team, TeamTrialResult
from .estimator import SWEJudge
from .stats import cohen_kappa, correlations, discretize

VOLATILE_FIELDS = ("created_at",)


class PipelineInterrupted(RuntimeError):
    """Raised on KeyboardInterrupt; carries whatever records were finished."""

    def __init__(self, records):
        super().__init__("run interrupted")
        self.records = records


def dataset_statistics(
    samples: Sequence[EvalSample],
    mapped: dict[str, float],
    scale: ScoreScale,
) -> dict | None:
    """Correlations and kappa between mapped scores and human scores over annotated samples."""
    pairs = [(mapped[s.id], s.human_score) for s in samples
             if s.human_score is not None and s.id in mapped]
    if len(pairs) < 2:
        return None
    predicted = [p for p, _ in pairs]
    truth = [t for _, t in pairs]
    summary = correlations(predicted, truth)
    kappa = cohen_kappa([discretize(p, scale) for p in predicted],
                        [discretize(t, scale) for t in truth], scale)
    return {**summary.to_dict(), "cohen_kappa": kappa}


@dataclass
class EvaluationReport:
    dataset: str
    model: str
    backend: str
    seed: int
    trial_size: int
    trial_ids: list[str]
    selected_team: Team
    selection: str
    selected_trial_result: TeamTrialResult | None
    trial_results: list[TeamTrialResult]
    per_sample: list[EnsembledScore]
    statistics: dict | None
    call_stats: dict
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "model": self.model,
            "backend": self.backend,
            "seed": self.seed,
            "trial_size": self.trial_size,
            "trial_ids": list(self.trial_ids),
            "selected_team": str(self.selected_team),
            "selection": self.selection,
            "trial_correlations": {
                "selected": self.selected_trial_result.to_dict() if self.selected_trial_result else None,
                "teams": [r.to_dict() for r in self.trial_results],
            },
            "per_sample": [e.to_dict() for e in self.per_sample],
            "statistics": self.statistics,
            "call_stats": self.call_stats,
            "created_at": self.created_at,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def strip_volatile(report: dict) -> dict:
    return {k: v for k, v in report.items() if k not in VOLATILE_FIELDS}


def run_pipeline(
    manifest: DatasetManifest,
    samples: Sequence[EvalSample],
    backend,
    trial_size: int = 10,
    seed: int = 42,
    team: Team | str | None = None,
    max_workers: int = 1,
) -> EvaluationReport:
    """Draw the trial set, select a team (unless ``team`` is given), score every sample.

    Trial-time records are reused for the final scores of trial samples.
    """
    judge = SWEJudge(
        backend=backend,
        scale=manifest.scale,
        task_kind=manifest.task_kind.value,
        team=team,
        trial_size=trial_size,
        seed=seed,
        max_workers=max_workers,
    )
    try:
        judge.fit(samples)
        scored = judge.ensemble(samples)
    except KeyboardInterrupt:
        runner = getattr(judge, "runner_", None)
        raise PipelineInterrupted(dict(runner.records) if runner else {}) from None
    mapped = {e.sample_id: e.mapped for e in scored}
    return EvaluationReport(
        dataset=manifest.name,
        model=backend.config.model_name,
        backend=backend.config.kind,
        seed=seed,
        trial_size=trial_size,
        trial_ids=judge.trial_ids_,
        selected_team=judge.team_,
        selection="override" if team is not None else "trial",
        selected_trial_result=judge.trial_result_,
        trial_results=judge.trial_results_,
        per_sample=scored,
        statistics=dataset_statistics(samples, mapped, manifest.scale),
        call_stats=backend.stats.to_dict(),
    )
