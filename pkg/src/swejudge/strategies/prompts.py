"""Strategy identifiers, conversations and prompt builders for each judge variant."""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from ..core import EvalSample, TaskKind

TEMPLATE_ROOT = Path(__file__).resolve().parent / "templates"

PLACEHOLDERS = frozenset(
    {"requirement", "candidate", "reference", "score", "reasons", "tests", "properties"}
)
TEMPLATE_NAMES = (
    "p0", "p1a", "p1b", "p2_rethink", "p3",
    "p4_generate", "p4_assess", "p5_analyze", "p5_assess",
)


class StrategyId(str, enum.Enum):
    P0 = "P0"
    P1a = "P1a"
    P1b = "P1b"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"

    @property
    def n_phases(self) -> int:
        return 2 if self in (StrategyId.P2, StrategyId.P4, StrategyId.P5) else 1

    def __str__(self) -> str:
        return self.value


# Canonical order; also the lexicographic order used for tie-breaking.
ENSEMBLE_STRATEGIES: tuple[StrategyId, ...] = (
    StrategyId.P1a, StrategyId.P1b, StrategyId.P2,
    StrategyId.P3, StrategyId.P4, StrategyId.P5,
)


@dataclass(frozen=True)
class Turn:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")


Conversation = tuple[Turn, ...]


def user(content: str) -> Conversation:
    return (Turn("user", content),)


def to_messages(conversation: Conversation) -> list[dict[str, str]]:
    return [{"role": t.role, "content": t.content} for t in conversation]


def from_messages(messages: list[dict[str, str]]) -> Conversation:
    return tuple(Turn(m["role"], m["content"]) for m in messages)


class TemplateError(ValueError):
    pass


def _strip_header(text: str) -> str:
    lines = text.splitlines(keepends=True)
    while lines and lines[0].startswith("#"):
        lines.pop(0)
    return "".join(lines)


def check_template(text: str, name: str = "<template>") -> set[str]:
    """Return the placeholders used by ``text``; raise TemplateError on unknown ones."""
    used = set()
    try:
        parsed = list(string.Formatter().parse(text))
    except ValueError as exc:
        raise TemplateError(f"{name}: {exc}") from exc
    for _, field, spec, conversion in parsed:
        if field is None:
            continue
        if field not in PLACEHOLDERS or spec or conversion:
            raise TemplateError(f"{name}: unknown placeholder {{{field}}}")
        used.add(field)
    return used


@dataclass(frozen=True)
class TemplateFamily:
    """The nine prompt templates for one task kind."""

    task: TaskKind
    texts: dict

    def render(self, name: str, **values: str) -> str:
        return self.texts[name].format(**values)

    @classmethod
    def from_dir(cls, directory: str | Path, task: TaskKind) -> "TemplateFamily":
        directory = Path(directory)
        texts = {}
        for name in TEMPLATE_NAMES:
            path = directory / f"{name}.txt"
            if not path.is_file():
                raise TemplateError(f"missing template {path}")
            text = _strip_header(path.read_text(encoding="utf-8"))
            check_template(text, str(path))
            texts[name] = text.rstrip("\n")
        return cls(task, texts)


@lru_cache(maxsize=None)
def default_templates(task: TaskKind) -> TemplateFamily:
    task = TaskKind(task)
    return TemplateFamily.from_dir(TEMPLATE_ROOT / task.value, task)


def _fields(sample: EvalSample) -> dict[str, str]:
    return {
        "requirement": sample.requirement,
        "candidate": sample.candidate,
        "reference": sample.reference,
    }


def _family(task: TaskKind, templates: TemplateFamily | None) -> TemplateFamily:
    return templates if templates is not None else default_templates(task)


def build_p0(sample: EvalSample, task: TaskKind, templates: TemplateFamily | None = None) -> Conversation:
    return user(_family(task, templates).render("p0", **_fields(sample)))


def build_p1(
    sample: EvalSample,
    include_reference: bool,
    task: TaskKind,
    templates: TemplateFamily | None = None,
) -> Conversation:
    name = "p1b" if include_reference else "p1a"
    return user(_family(task, templates).render(name, **_fields(sample)))


def format_score(score: float) -> str:
    return str(int(round(score)))


def build_p2(
    sample: EvalSample,
    phase1_reply: str,
    phase1_score: float,
    task: TaskKind,
    templates: TemplateFamily | None = None,
) -> Conversation:
    """P1b prompt, the model's P1b reply, then the rethink request."""
    from .parsing import extract_reasons

    family = _family(task, templates)
    rethink = family.render(
        "p2_rethink",
        **_fields(sample),
        score=format_score(phase1_score),
        reasons=extract_reasons(phase1_reply),
    )
    return build_p1(sample, True, task, family) + (
        Turn("assistant", phase1_reply),
        Turn("user", rethink),
    )


def build_p3(sample: EvalSample, task: TaskKind, templates: TemplateFamily | None = None) -> Conversation:
    if not sample.reference.strip():
        raise ValueError(f"sample {sample.id!r}: equivalence assessment needs a reference")
    return user(_family(task, templates).render("p3", **_fields(sample)))


def build_p4_phase1(sample: EvalSample, task: TaskKind, templates: TemplateFamily | None = None) -> Conversation:
    return user(_family(task, templates).render(
        "p4_generate", requirement=sample.requirement, reference=sample.reference,
    ))


def build_p4_phase2(
    sample: EvalSample,
    generated_tests: str,
    task: TaskKind,
    templates: TemplateFamily | None = None,
) -> Conversation:
    if not generated_tests.strip():
        raise ValueError(f"sample {sample.id!r}: no generated tests to assess against")
    return user(_family(task, templates).render(
        "p4_assess",
        requirement=sample.requirement,
        candidate=sample.candidate,
        tests=generated_tests,
    ))


def build_p5_phase1(sample: EvalSample, task: TaskKind, templates: TemplateFamily | None = None) -> Conversation:
    return user(_family(task, templates).render(
        "p5_analyze", requirement=sample.requirement, reference=sample.reference,
    ))


def build_p5_phase2(
    sample: EvalSample,
    properties: str,
    task: TaskKind,
    templates: TemplateFamily | None = None,
) -> Conversation:
    if not properties.strip():
        raise ValueError(f"sample {sample.id!r}: no reference properties to assess against")
    return user(_family(task, templates).render(
        "p5_assess",
        requirement=sample.requirement,
        candidate=sample.candidate,
        properties=properties,
    ))
