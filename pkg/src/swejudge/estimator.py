"""scikit-learn style estimator around the judge ensemble."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import EvalSample, ScoreScale, TaskKind, sample_trial_set
from .ensemble import EnsembledScore, Team, TeamTrialResult, ensemble_scores, select_team
from .stats import avg_correlation
from .strategies import ENSEMBLE_STRATEGIES, StrategyRunner


def check_samples(X) -> list[EvalSample]:
    """Coerce ``X`` (EvalSamples or sample dicts) to a list of EvalSample with unique ids."""
    if isinstance(X, (EvalSample, dict, str)):
        raise TypeError("X must be a sequence of samples, not a single sample")
    samples = []
    for item in X:
        if isinstance(item, EvalSample):
            samples.append(item)
        elif isinstance(item, dict):
            samples.append(EvalSample(**item))
        else:
            raise TypeError(f"cannot use {type(item).__name__} as an EvalSample")
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate sample ids: {dupes}")
    return samples


def check_scale(scale) -> ScoreScale:
    if isinstance(scale, ScoreScale):
        return scale
    if isinstance(scale, dict):
        return ScoreScale.from_dict(scale)
    if isinstance(scale, (tuple, list)) and len(scale) in (2, 3):
        return ScoreScale(*scale)
    raise TypeError(f"cannot interpret {scale!r} as a ScoreScale")


def check_team(team) -> Team | None:
    if team is None or isinstance(team, Team):
        return team
    if isinstance(team, str):
        return Team.parse(team)
    return Team(tuple(team))


def _with_labels(samples: list[EvalSample], y) -> list[EvalSample]:
    y = list(y)
    if len(y) != len(samples):
        raise ValueError(f"y has {len(y)} labels for {len(samples)} samples")
    out = []
    for sample, label in zip(samples, y):
        if label is not None and isinstance(label, float) and math.isnan(label):
            label = None
        out.append(EvalSample(sample.id, sample.requirement, sample.candidate, sample.reference,
                              None if label is None else float(label), sample.task_kind))
    return out


class SWEJudge(BaseEstimator):
    """Ensemble LLM judge with per-dataset team selection.

    ``fit`` draws a seeded trial set from the annotated samples, runs all six
    variants on it and keeps the team whose averaged, scale-mapped scores
    correlate best with the human scores. ``predict`` runs only that team's
    variants and returns scores on the human scale. Passing ``team`` skips
    selection entirely.

    Parameters
    ----------
    backend : JudgeBackend
        Executes conversations (live, mock or replay).
    scale : ScoreScale or (min, max[, step])
        Human score range the ensemble output is mapped onto.
    task_kind : str
        Default prompt family; samples may override it individually.
    team : Team, str or sequence of strategy ids, optional
        Fixed team, e.g. ``"P1b,P3"``.
    trial_size : int
        Number of annotated samples used for selection.
    seed : int
        Seed for the trial-set draw.
    max_workers : int
        Samples evaluated concurrently.
    """

    def __init__(self, backend=None, scale=(0, 4, 1), task_kind="code_generation",
                 team=None, trial_size=10, seed=42, max_workers=1):
        self.backend = backend
        self.scale = scale
        self.task_kind = task_kind
        self.team = team
        self.trial_size = trial_size
        self.seed = seed
        self.max_workers = max_workers

    def fit(self, X, y=None):
        if self.backend is None:
            raise ValueError("SWEJudge needs a backend")
        samples = check_samples(X)
        if y is not None:
            samples = _with_labels(samples, y)
        self.scale_ = check_scale(self.scale)
        self.runner_ = StrategyRunner(self.backend, TaskKind(self.task_kind))
        fixed = check_team(self.team)
        if fixed is not None:
            self.team_ = fixed
            self.trial_ids_: list[str] = []
            self.trial_result_: TeamTrialResult | None = None
            self.trial_results_: list[TeamTrialResult] = []
            return self
        trial = sample_trial_set(samples, self.trial_size, self.seed)
        records = self.runner_.evaluate(trial, ENSEMBLE_STRATEGIES, self.max_workers)
        best, results = select_team(trial, records, self.scale_)
        self.team_ = best.team
        self.trial_ids_ = [s.id for s in trial]
        self.trial_result_ = best
        self.trial_results_ = results
        return self

    def ensemble(self, X) -> list[EnsembledScore]:
        """Per-sample member scores, raw mean and mapped score for the fitted team."""
        check_is_fitted(self, "team_")
        samples = check_samples(X)
        records = self.runner_.evaluate(samples, self.team_.members, self.max_workers)
        return [
            ensemble_scores(self.team_, {m: records[(s.id, m)] for m in self.team_.members}, self.scale_)
            for s in samples
        ]

    def predict(self, X) -> np.ndarray:
        return np.array([e.mapped for e in self.ensemble(X)], dtype=float)

    def transform(self, X) -> np.ndarray:
        """Raw 0-100 member scores, one column per team member in canonical order."""
        return np.array(
            [[e.member_scores[m] for m in self.team_.members] for e in self.ensemble(X)],
            dtype=float,
        ).reshape(-1, len(self.team_))

    def score(self, X, y=None) -> float:
        """Average of Kendall tau-b, Spearman and Pearson against the human scores."""
        samples = check_samples(X)
        if y is not None:
            samples = _with_labels(samples, y)
        annotated = [s for s in samples if s.human_score is not None]
        return avg_correlation(self.predict(annotated), [s.human_score for s in annotated])

    @property
    def records_(self):
        check_is_fitted(self, "runner_")
        return self.runner_.records
