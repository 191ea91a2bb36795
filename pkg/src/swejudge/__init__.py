"""Ensemble LLM-as-judge scoring of generated software artifacts."""

__version__ = "0.1.0"

from .backend import BackendConfig, CallContext, JudgeBackend, MockScript, perfect_judge_script
from .core import DatasetManifest, EvalSample, ScoreScale, TaskKind, load_dataset, sample_trial_set
from .ensemble import (
    EnsembledScore,
    Team,
    TeamTrialResult,
    ensemble_scores,
    enumerate_teams,
    map_to_scale,
    select_team,
)
from .estimator import SWEJudge
from .pipeline import EvaluationReport, run_pipeline
from .strategies import JudgeRecord, StrategyId, StrategyRunner, parse_score

__all__ = [
    "BackendConfig", "CallContext", "DatasetManifest", "EnsembledScore", "EvalSample",
    "EvaluationReport", "JudgeBackend", "JudgeRecord", "MockScript", "SWEJudge",
    "ScoreScale", "StrategyId", "StrategyRunner", "TaskKind", "Team", "TeamTrialResult",
    "ensemble_scores", "enumerate_teams", "load_dataset", "map_to_scale", "parse_score",
    "perfect_judge_script", "run_pipeline", "sample_trial_set", "select_team",
]
