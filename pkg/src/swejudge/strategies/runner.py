"""Execute strategy variants against a backend and collect JudgeRecords."""

from __future__ import annotations

import hashlib
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..core import EvalSample, TaskKind
from .parsing import FALLBACK_SCORE, parse_score
from .prompts import (
    Conversation,
    StrategyId,
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
    default_templates,
)

logger = logging.getLogger(__name__)

RETRY_PROMPT = (
    'Your reply did not contain a score. Reply with only the final line "Score: <number>", '
    "where <number> is within the 0-100 range."
)


@dataclass(frozen=True)
class JudgeRecord:
    sample_id: str
    strategy: StrategyId
    raw_score: float
    transcript: tuple[Conversation, ...]
    parse_note: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.raw_score <= 100.0:
            raise ValueError(f"raw_score {self.raw_score} outside [0, 100]")
        if len(self.transcript) != self.strategy.n_phases:
            raise ValueError(
                f"{self.strategy} needs {self.strategy.n_phases} transcript phase(s), "
                f"got {len(self.transcript)}"
            )

    @property
    def final_reply(self) -> str:
        last = self.transcript[-1]
        return last[-1].content if last and last[-1].role == "assistant" else ""


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SharedArtifactCacheKey:
    strategy: StrategyId
    requirement_digest: str
    reference_digest: str

    @classmethod
    def for_sample(cls, strategy: StrategyId, sample: EvalSample) -> "SharedArtifactCacheKey":
        if strategy not in (StrategyId.P4, StrategyId.P5):
            raise ValueError(f"{strategy} has no shared phase-1 artifact")
        return cls(strategy, _digest(sample.requirement), _digest(sample.reference))


class SharedArtifactCache:
    """Generated tests (P4) and reference properties (P5), shared across samples with equal (x, r).

    The first writer per key computes the artifact while holding that key's lock;
    later readers wait for it and then read concurrently.
    """

    def __init__(self):
        self._values: dict[SharedArtifactCacheKey, tuple[Conversation, str]] = {}
        self._locks: dict[SharedArtifactCacheKey, threading.Lock] = {}
        self._guard = threading.Lock()

    def get_or_create(self, key: SharedArtifactCacheKey, create) -> tuple[Conversation, str]:
        with self._guard:
            if key in self._values:
                return self._values[key]
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            with self._guard:
                if key in self._values:
                    return self._values[key]
            value = create()
            with self._guard:
                self._values[key] = value
            return value

    def __len__(self) -> int:
        return len(self._values)


class StrategyRunner:
    """Runs judge variants for samples through ``backend``.

    ``records`` accumulates every JudgeRecord produced, keyed by
    ``(sample_id, strategy)``, and is reused on later requests for the same pair.
    """

    def __init__(self, backend, task: TaskKind | str = TaskKind.CODE_GENERATION,
                 templates: dict[TaskKind, TemplateFamily] | None = None):
        self.backend = backend
        self.task = TaskKind(task)
        self.templates = dict(templates or {})
        self.shared = SharedArtifactCache()
        self.records: dict[tuple[str, StrategyId], JudgeRecord] = {}
        self._records_lock = threading.Lock()
        self._owners: dict[SharedArtifactCacheKey, EvalSample] = {}

    def _family(self, sample: EvalSample) -> TemplateFamily:
        task = sample.task_kind or self.task
        if task not in self.templates:
            self.templates[task] = default_templates(task)
        return self.templates[task]

    def _task(self, sample: EvalSample) -> TaskKind:
        return sample.task_kind or self.task

    def _ctx(self, sample: EvalSample, strategy: StrategyId, phase: int, attempt: int = 0):
        from ..backend import CallContext

        return CallContext(sample.id, strategy, phase, attempt)

    def _score_phase(self, sample: EvalSample, strategy: StrategyId, phase: int,
                     conversation: Conversation) -> tuple[float, Conversation, str | None]:
        """Ask for a score; retry once on an unparseable reply, then fall back."""
        reply = self.backend.complete(conversation, self._ctx(sample, strategy, phase))
        conversation = conversation + (Turn("assistant", reply),)
        score = parse_score(reply)
        if score is not None:
            return score, conversation, None
        conversation = conversation + (Turn("user", RETRY_PROMPT),)
        reply = self.backend.complete(conversation, self._ctx(sample, strategy, phase, attempt=1))
        conversation = conversation + (Turn("assistant", reply),)
        score = parse_score(reply)
        if score is not None:
            return score, conversation, "parsed on retry"
        logger.warning("unparseable score for sample %s %s; using %s", sample.id, strategy, FALLBACK_SCORE)
        return FALLBACK_SCORE, conversation, "unparseable"

    def _two_phase(self, sample: EvalSample, strategy: StrategyId) -> JudgeRecord:
        family = self._family(sample)
        task = self._task(sample)
        key = SharedArtifactCacheKey.for_sample(strategy, sample)
        # the first sample (in submission order) with this (x, r) owns the phase-1 call,
        # which keeps transcripts independent of thread scheduling
        owner = self._owners.get(key, sample)
        build1, build2 = (
            (build_p4_phase1, build_p4_phase2) if strategy is StrategyId.P4
            else (build_p5_phase1, build_p5_phase2)
        )

        def create():
            conv = build1(owner, task, family)
            reply = self.backend.complete(conv, self._ctx(owner, strategy, 1))
            return conv + (Turn("assistant", reply),), reply

        phase1, artifact = self.shared.get_or_create(key, create)
        if not artifact.strip():
            return JudgeRecord(sample.id, strategy, FALLBACK_SCORE, (phase1, ()),
                               parse_note=f"empty phase-1 reply; {FALLBACK_SCORE:g} substituted")
        conv = build2(sample, artifact, task, family)
        score, conv, note = self._score_phase(sample, strategy, 2, conv)
        return JudgeRecord(sample.id, strategy, score, (phase1, conv), note)

    def _p2(self, sample: EvalSample) -> JudgeRecord:
        family = self._family(sample)
        task = self._task(sample)
        with self._records_lock:
            p1b = self.records.get((sample.id, StrategyId.P1b))
        if p1b is not None:
            phase1 = p1b.transcript[0]
            phase1_score = p1b.raw_score
        else:
            phase1_score, phase1, _ = self._score_phase(
                sample, StrategyId.P2, 1, build_p1(sample, True, task, family)
            )
        # the P1b reply that carried the score is the last assistant turn of phase 1
        phase1_reply = phase1[-1].content
        conv = build_p2(sample, phase1_reply, phase1_score, task, family)
        score, conv, note = self._score_phase(sample, StrategyId.P2, 2, conv)
        return JudgeRecord(sample.id, StrategyId.P2, score, (phase1, conv), note)

    def run(self, sample: EvalSample, strategy: StrategyId | str) -> JudgeRecord:
        strategy = StrategyId(strategy)
        with self._records_lock:
            existing = self.records.get((sample.id, strategy))
        if existing is not None:
            return existing
        family = self._family(sample)
        task = self._task(sample)
        if strategy is StrategyId.P2:
            record = self._p2(sample)
        elif strategy in (StrategyId.P4, StrategyId.P5):
            record = self._two_phase(sample, strategy)
        else:
            if strategy is StrategyId.P0:
                conv = build_p0(sample, task, family)
            elif strategy is StrategyId.P3:
                conv = build_p3(sample, task, family)
            else:
                conv = build_p1(sample, strategy is StrategyId.P1b, task, family)
            score, conv, note = self._score_phase(sample, strategy, 1, conv)
            record = JudgeRecord(sample.id, strategy, score, (conv,), note)
        with self._records_lock:
            self.records[(sample.id, strategy)] = record
        return record

    def evaluate(
        self,
        samples: Sequence[EvalSample],
        strategies: Iterable[StrategyId | str],
        max_workers: int = 1,
    ) -> dict[tuple[str, StrategyId], JudgeRecord]:
        """Run every strategy on every sample; samples run concurrently, strategies in order.

        Strategies are executed in canonical order within a sample so that P2
        can reuse a P1b record for the same sample.
        """
        strategies = sorted({StrategyId(s) for s in strategies}, key=_strategy_order)
        for sample in samples:
            for strategy in (StrategyId.P4, StrategyId.P5):
                self._owners.setdefault(SharedArtifactCacheKey.for_sample(strategy, sample), sample)

        def one(sample: EvalSample):
            return [self.run(sample, strategy) for strategy in strategies]

        if max_workers <= 1:
            for sample in samples:
                one(sample)
        else:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                for _ in pool.map(one, samples):
                    pass
        return {
            (s.id, strategy): self.records[(s.id, strategy)]
            for s in samples for strategy in strategies
        }


_ORDER = {s: i for i, s in enumerate(StrategyId)}


def _strategy_order(strategy: StrategyId) -> int:
    return _ORDER[strategy]
