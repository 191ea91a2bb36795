"""Domain types, dataset loading and seeded trial-set sampling."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


class DatasetError(ValueError):
    """Raised when a manifest or samples file violates the dataset contract."""


class TaskKind(str, enum.Enum):
    CODE_GENERATION = "code_generation"
    PROGRAM_REPAIR = "program_repair"
    CODE_SUMMARIZATION = "code_summarization"


@dataclass(frozen=True)
class ScoreScale:
    """Human annotation range, e.g. ``ScoreScale(0, 4, 1)`` for a 0-4 integer scale."""

    min: float
    max: float
    step: float = 1.0

    def __post_init__(self):
        for name in ("min", "max", "step"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise DatasetError(f"scale.{name} must be a finite number, got {value!r}")
        if not self.min < self.max:
            raise DatasetError(f"scale.min ({self.min}) must be < scale.max ({self.max})")
        if self.step <= 0:
            raise DatasetError(f"scale.step must be positive, got {self.step}")
        span = self.max - self.min
        n = round(span / self.step)
        if abs(n * self.step - span) > 1e-9:
            raise DatasetError(
                f"scale range {span} is not an integer multiple of step {self.step}"
            )

    @property
    def n_steps(self) -> int:
        return round((self.max - self.min) / self.step)

    def grid(self) -> list[float]:
        return [self.min + k * self.step for k in range(self.n_steps + 1)]

    def contains(self, value: float) -> bool:
        return self.min <= value <= self.max

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max, "step": self.step}

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreScale":
        try:
            return cls(data["min"], data["max"], data.get("step", 1.0))
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"malformed scale {data!r}") from exc


@dataclass(frozen=True)
class EvalSample:
    """One judged item: requirement, candidate artifact, reference, optional human score.

    ``task_kind`` is an optional per-sample override of the manifest's task kind,
    used by mixed-task datasets such as the bundled toy set.
    """

    id: str
    requirement: str
    candidate: str
    reference: str
    human_score: float | None = None
    task_kind: TaskKind | None = None

    def __post_init__(self):
        for name in ("id", "requirement", "candidate", "reference"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise DatasetError(f"sample {self.id!r}: field {name!r} must be a nonempty string")
        if self.human_score is not None:
            hs = self.human_score
            if isinstance(hs, bool) or not isinstance(hs, (int, float)) or not math.isfinite(hs):
                raise DatasetError(f"sample {self.id!r}: human_score must be a finite number")
        if self.task_kind is not None and not isinstance(self.task_kind, TaskKind):
            object.__setattr__(self, "task_kind", TaskKind(self.task_kind))

    @property
    def annotated(self) -> bool:
        return self.human_score is not None

    def to_dict(self) -> dict:
        data = {
            "id": self.id,
            "requirement": self.requirement,
            "candidate": self.candidate,
            "reference": self.reference,
        }
        if self.human_score is not None:
            data["human_score"] = self.human_score
        if self.task_kind is not None:
            data["task_kind"] = self.task_kind.value
        return data


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    task_kind: TaskKind
    scale: ScoreScale
    samples_path: Path

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "task_kind": self.task_kind.value,
            "scale": self.scale.to_dict(),
            "samples_path": str(self.samples_path),
        }


_SAMPLE_FIELDS = {"id", "requirement", "candidate", "reference", "human_score", "task_kind"}


def _parse_sample(record: object, lineno: int) -> EvalSample:
    if not isinstance(record, dict):
        raise DatasetError(f"line {lineno}: expected an object, got {type(record).__name__}")
    unknown = set(record) - _SAMPLE_FIELDS
    if unknown:
        raise DatasetError(f"line {lineno}: unknown field(s) {sorted(unknown)}")
    missing = [f for f in ("id", "requirement", "candidate", "reference") if f not in record]
    if missing:
        raise DatasetError(f"line {lineno}: missing required field(s) {missing}")
    task_kind = record.get("task_kind")
    try:
        if task_kind is not None:
            task_kind = TaskKind(task_kind)
        return EvalSample(
            id=record["id"],
            requirement=record["requirement"],
            candidate=record["candidate"],
            reference=record["reference"],
            human_score=record.get("human_score"),
            task_kind=task_kind,
        )
    except (DatasetError, ValueError) as exc:
        raise DatasetError(f"line {lineno}: {exc}") from exc


def read_samples(path: str | Path, scale: ScoreScale | None = None) -> list[EvalSample]:
    """Read a line-delimited JSON samples file, validating every record."""
    path = Path(path)
    samples: list[EvalSample] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            sample = _parse_sample(record, lineno)
            if sample.id in seen:
                raise DatasetError(
                    f"line {lineno}: duplicate id {sample.id!r} (first seen on line {seen[sample.id]})"
                )
            if scale is not None and sample.human_score is not None and not scale.contains(sample.human_score):
                raise DatasetError(
                    f"line {lineno}: sample {sample.id!r} human_score {sample.human_score} "
                    f"outside scale [{scale.min}, {scale.max}]"
                )
            seen[sample.id] = lineno
            samples.append(sample)
    return samples


def write_samples(samples: Iterable[EvalSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample.to_dict(), ensure_ascii=False) + "\n")


def read_manifest(manifest_path: str | Path) -> DatasetManifest:
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DatasetError(f"manifest not found: {manifest_path}")
    try:
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"manifest {manifest_path}: malformed JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise DatasetError(f"manifest {manifest_path}: expected an object")
    missing = [k for k in ("name", "task_kind", "scale", "samples_path") if k not in data]
    if missing:
        raise DatasetError(f"manifest {manifest_path}: missing field(s) {missing}")
    try:
        task_kind = TaskKind(data["task_kind"])
    except ValueError as exc:
        raise DatasetError(f"manifest {manifest_path}: unknown task_kind {data['task_kind']!r}") from exc
    if not isinstance(data["scale"], dict):
        raise DatasetError(f"manifest {manifest_path}: scale must be an object")
    samples_path = Path(data["samples_path"])
    if not samples_path.is_absolute():
        samples_path = manifest_path.parent / samples_path
    return DatasetManifest(
        name=str(data["name"]),
        task_kind=task_kind,
        scale=ScoreScale.from_dict(data["scale"]),
        samples_path=samples_path,
    )


def load_dataset(manifest_path: str | Path) -> tuple[DatasetManifest, list[EvalSample]]:
    """Load a manifest and its samples file; samples come back in file order.

    Raises DatasetError for a missing or malformed manifest, unreadable samples
    file, malformed records (with line number), duplicate ids and human scores
    outside the manifest scale.
    """
    manifest = read_manifest(manifest_path)
    if not manifest.samples_path.is_file():
        raise DatasetError(f"samples file not found: {manifest.samples_path}")
    samples = read_samples(manifest.samples_path, manifest.scale)
    return manifest, samples


# 64-bit LCG (Knuth's MMIX constants). Output uses the high 32 bits because the
# low bits of a power-of-two-modulus LCG have short periods.
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
_MASK64 = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u32(self) -> int:
        self.state = (self.state * LCG_MULTIPLIER + LCG_INCREMENT) & _MASK64
        return self.state >> 32

    def below(self, bound: int) -> int:
        """Uniform-ish integer in ``[0, bound)``; modulo bias is accepted for bound << 2**32."""
        return self.next_u32() % bound


def seeded_draw(n: int, k: int, seed: int) -> list[int]:
    """First ``k`` indices of a partial Fisher-Yates shuffle of ``range(n)``.

    For position i = 0..k-1, swap i with i + below(n - i). The result is in draw order.
    """
    rng = Lcg64(seed)
    indices = list(range(n))
    k = min(k, n)
    for i in range(k):
        j = i + rng.below(n - i)
        indices[i], indices[j] = indices[j], indices[i]
    return indices[:k]


def sample_trial_set(samples: Sequence[EvalSample], k: int = 10, seed: int = 42) -> list[EvalSample]:
    """Seeded draw of ``min(k, #annotated)`` annotated samples without replacement."""
    if k < 2:
        raise ValueError(f"trial size must be >= 2, got {k}")
    annotated = [s for s in samples if s.human_score is not None]
    if len(annotated) < 2:
        raise DatasetError(
            f"team selection needs at least 2 annotated samples, found {len(annotated)}"
        )
    return [annotated[i] for i in seeded_draw(len(annotated), k, seed)]
