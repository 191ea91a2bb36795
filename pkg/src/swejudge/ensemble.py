"""Team enumeration, trial-set team selection, score averaging and scale mapping."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import EvalSample, ScoreScale
from .stats import CorrelationSummary, correlations
from .strategies import ENSEMBLE_STRATEGIES, JudgeRecord, StrategyId

# avg_cor values closer than this are treated as a tie
TIE_TOLERANCE = 1e-12

_RANK = {s: i for i, s in enumerate(ENSEMBLE_STRATEGIES)}


@dataclass(frozen=True, order=False)
class Team:
    members: tuple[StrategyId, ...]

    def __post_init__(self):
        members = tuple(StrategyId(m) for m in self.members)
        if StrategyId.P0 in members:
            raise ValueError("P0 is a baseline and cannot join an ensemble team")
        if len(set(members)) != len(members):
            raise ValueError(f"duplicate members in team {[m.value for m in members]}")
        if len(members) < 2:
            raise ValueError("a team needs at least two distinct strategies")
        object.__setattr__(self, "members", tuple(sorted(members, key=_RANK.__getitem__)))

    @classmethod
    def parse(cls, text: str) -> "Team":
        """Parse ``"P1b,P3"``-style text."""
        names = [part.strip() for part in text.split(",") if part.strip()]
        try:
            return cls(tuple(StrategyId(n) for n in names))
        except ValueError as exc:
            raise ValueError(f"invalid team {text!r}: {exc}") from exc

    def sort_key(self) -> tuple:
        return (len(self.members), tuple(_RANK[m] for m in self.members))

    def __str__(self) -> str:
        return ",".join(m.value for m in self.members)

    def __len__(self) -> int:
        return len(self.members)


def enumerate_teams() -> list[Team]:
    """All 57 subsets of the six variants with at least two members, by size then member order."""
    return [
        Team(combo)
        for size in range(2, len(ENSEMBLE_STRATEGIES) + 1)
        for combo in itertools.combinations(ENSEMBLE_STRATEGIES, size)
    ]


@dataclass(frozen=True)
class TeamTrialResult:
    team: Team
    tau: float | None
    spearman: float | None
    pearson: float | None
    avg_cor: float

    @classmethod
    def from_summary(cls, team: Team, summary: CorrelationSummary) -> "TeamTrialResult":
        return cls(team, summary.kendall_tau, summary.spearman, summary.pearson, summary.avg_cor)

    def to_dict(self) -> dict:
        return {
            "team": str(self.team),
            "kendall_tau": self.tau,
            "spearman": self.spearman,
            "pearson": self.pearson,
            "avg_cor": self.avg_cor,
        }


@dataclass(frozen=True)
class EnsembledScore:
    sample_id: str
    member_scores: Mapping[StrategyId, float]
    raw_mean: float
    mapped: float | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.sample_id,
            "member_scores": {s.value: v for s, v in sorted(self.member_scores.items(), key=lambda kv: _RANK[kv[0]])},
            "raw_mean": self.raw_mean,
            "mapped": self.mapped,
        }


def map_to_scale(raw: float, scale: ScoreScale) -> float:
    """Linear map of a 0-100 score onto ``scale``; 0 -> min and 100 -> max exactly."""
    if not 0.0 <= raw <= 100.0:
        raise ValueError(f"raw score {raw} outside [0, 100]")
    if raw == 100.0:
        return float(scale.max)
    mapped = raw / 100.0 * (scale.max - scale.min) + scale.min
    return min(float(scale.max), max(float(scale.min), mapped))


def ensemble_scores(
    team: Team,
    records: Mapping[StrategyId, JudgeRecord] | Iterable[JudgeRecord],
    scale: ScoreScale | None = None,
) -> EnsembledScore:
    """Average the team members' raw scores for one sample; map onto ``scale`` if given."""
    if not isinstance(records, Mapping):
        records = {r.strategy: r for r in records}
    missing = [m.value for m in team.members if m not in records]
    if missing:
        raise KeyError(f"missing record(s) for team member(s) {missing}")
    sample_ids = {records[m].sample_id for m in team.members}
    if len(sample_ids) != 1:
        raise ValueError(f"records span several samples: {sorted(sample_ids)}")
    member_scores = {m: records[m].raw_score for m in team.members}
    raw_mean = sum(member_scores.values()) / len(member_scores)
    # float summation order can push the mean a hair past the bounds
    raw_mean = min(100.0, max(0.0, raw_mean))
    mapped = map_to_scale(raw_mean, scale) if scale is not None else None
    return EnsembledScore(sample_ids.pop(), member_scores, raw_mean, mapped)


def score_team(
    team: Team,
    trial: Sequence[EvalSample],
    records: Mapping[tuple[str, StrategyId], JudgeRecord],
    scale: ScoreScale,
) -> TeamTrialResult:
    predicted = [
        ensemble_scores(team, {m: records[(s.id, m)] for m in team.members}, scale).mapped
        for s in trial
    ]
    truth = [s.human_score for s in trial]
    return TeamTrialResult.from_summary(team, correlations(predicted, truth))


def select_team(
    trial: Sequence[EvalSample],
    records: Mapping[tuple[str, StrategyId], JudgeRecord] | Iterable[JudgeRecord],
    scale: ScoreScale,
    teams: Sequence[Team] | None = None,
) -> tuple[TeamTrialResult, list[TeamTrialResult]]:
    """Score every team on the trial set; return the winner and all results.

    The winner has the highest avg_cor; ties go to the smaller team, then to
    the lexicographically smaller member list.
    """
    if len(trial) < 2:
        raise ValueError(f"team selection needs at least 2 trial samples, got {len(trial)}")
    unannotated = [s.id for s in trial if s.human_score is None]
    if unannotated:
        raise ValueError(f"trial samples without human_score: {unannotated}")
    if not isinstance(records, Mapping):
        records = {(r.sample_id, r.strategy): r for r in records}
    teams = sorted(teams if teams is not None else enumerate_teams(), key=Team.sort_key)
    needed = {m for t in teams for m in t.members}
    missing = [(s.id, m.value) for s in trial for m in sorted(needed, key=_RANK.__getitem__)
               if (s.id, m) not in records]
    if missing:
        raise KeyError(f"missing trial records: {missing[:5]}{'...' if len(missing) > 5 else ''}")
    results = [score_team(team, trial, records, scale) for team in teams]
    best = results[0]
    for result in results[1:]:
        if result.avg_cor > best.avg_cor + TIE_TOLERANCE:
            best = result
    return best, results
