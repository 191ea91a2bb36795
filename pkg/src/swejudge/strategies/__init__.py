from .parsing import FALLBACK_SCORE, extract_reasons, parse_score
from .prompts import (
    ENSEMBLE_STRATEGIES,
    Conversation,
    StrategyId,
    TemplateError,
    TemplateFamily,
    Turn,
    build_p0,
    build_p1,
    build_p2,
    build_p3,
    build_p4_phase1,
    build_p4_phase2,
    build_p5_phase1,
    build_p5_phase2,
    check_template,
    default_templates,
)
from .runner import JudgeRecord, SharedArtifactCache, SharedArtifactCacheKey, StrategyRunner

__all__ = [
    "ENSEMBLE_STRATEGIES", "FALLBACK_SCORE", "Conversation", "JudgeRecord",
    "SharedArtifactCache", "SharedArtifactCacheKey", "StrategyId", "StrategyRunner",
    "TemplateError", "TemplateFamily", "Turn", "build_p0", "build_p1", "build_p2",
    "build_p3", "build_p4_phase1", "build_p4_phase2", "build_p5_phase1",
    "build_p5_phase2", "check_template", "default_templates", "extract_reasons",
    "parse_score",
]
