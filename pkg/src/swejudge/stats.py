"""Correlation and agreement statistics.

Every coefficient returns ``None`` when it is undefined (a constant input vector,
or chance agreement of 1 with observed agreement below 1). ``None`` is never
coerced to a number except inside :func:`avg_correlation`, where an undefined
coefficient contributes 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.stats

from .core import ScoreScale

Coefficient = float | None


def _paired(predicted: Sequence[float], truth: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(predicted, dtype=float)
    y = np.asarray(truth, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("score vectors must be one-dimensional")
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} predicted vs {y.size} truth")
    if x.size < 2:
        raise ValueError(f"need at least 2 paired scores, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("score vectors must not contain NaN or infinity")
    return x, y


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.all(v == v[0]))


def _clip(r: float) -> float:
    return float(min(1.0, max(-1.0, r)))


def kendall_tau(predicted: Sequence[float], truth: Sequence[float]) -> Coefficient:
    """Kendall's tau-b (tie-corrected)."""
    x, y = _paired(predicted, truth)
    if _is_constant(x) or _is_constant(y):
        return None
    # integer pair counts keep identical orderings at exactly 1.0; scipy's
    # two separate square roots can land one ulp short
    n = x.size
    net = tied_x = tied_y = 0
    for i in range(n - 1):
        dx = np.sign(x[i + 1:] - x[i])
        dy = np.sign(y[i + 1:] - y[i])
        net += int(np.sum(dx * dy))
        tied_x += int(np.count_nonzero(dx == 0))
        tied_y += int(np.count_nonzero(dy == 0))
    pairs = n * (n - 1) // 2
    return _clip(net / math.sqrt((pairs - tied_x) * (pairs - tied_y)))


def _pearson(x: np.ndarray, y: np.ndarray) -> Coefficient:
    if _is_constant(x) or _is_constant(y):
        return None
    xm = x - x.mean()
    ym = y - y.mean()
    denom = math.sqrt(float(np.dot(xm, xm)) * float(np.dot(ym, ym)))
    if denom == 0.0:
        return None
    return _clip(float(np.dot(xm, ym)) / denom)


def pearson(predicted: Sequence[float], truth: Sequence[float]) -> Coefficient:
    return _pearson(*_paired(predicted, truth))


def spearman(predicted: Sequence[float], truth: Sequence[float]) -> Coefficient:
    """Pearson correlation of average (fractional) ranks."""
    x, y = _paired(predicted, truth)
    return _pearson(scipy.stats.rankdata(x), scipy.stats.rankdata(y))


@dataclass(frozen=True)
class CorrelationSummary:
    n: int
    kendall_tau: Coefficient
    spearman: Coefficient
    pearson: Coefficient

    @property
    def avg_cor(self) -> float:
        return _average(self.kendall_tau, self.spearman, self.pearson)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kendall_tau": self.kendall_tau,
            "spearman": self.spearman,
            "pearson": self.pearson,
            "avg_cor": self.avg_cor,
        }


def _average(*coefs: Coefficient) -> float:
    return sum(0.0 if c is None else c for c in coefs) / len(coefs)


def correlations(predicted: Sequence[float], truth: Sequence[float]) -> CorrelationSummary:
    return CorrelationSummary(
        n=len(predicted),
        kendall_tau=kendall_tau(predicted, truth),
        spearman=spearman(predicted, truth),
        pearson=pearson(predicted, truth),
    )


def avg_correlation(predicted: Sequence[float], truth: Sequence[float]) -> float:
    return correlations(predicted, truth).avg_cor


def grid_index(value: float, scale: ScoreScale) -> int:
    """Index of ``value`` on the scale grid; raises ValueError if it is off-grid."""
    k = round((value - scale.min) / scale.step)
    if k < 0 or k > scale.n_steps or abs(scale.min + k * scale.step - value) > 1e-9 * max(1.0, abs(value)):
        raise ValueError(f"label {value} is not on the grid of {scale}")
    return k


def cohen_kappa(a: Sequence[float], b: Sequence[float], scale: ScoreScale) -> Coefficient:
    """Unweighted Cohen's kappa between two raters labelling on ``scale``'s grid."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 1:
        raise ValueError("need at least one labelled item")
    n_labels = scale.n_steps + 1
    ia = np.array([grid_index(v, scale) for v in a])
    ib = np.array([grid_index(v, scale) for v in b])
    confusion = np.zeros((n_labels, n_labels), dtype=np.int64)
    np.add.at(confusion, (ia, ib), 1)
    # integer form (n*agree - chance) / (n^2 - chance): one rounding, so
    # identical raters give exactly 1.0
    n = len(a)
    agree = int(np.trace(confusion))
    chance = int(confusion.sum(axis=1) @ confusion.sum(axis=0))
    if chance == n * n:
        return 1.0 if agree == n else None
    return (n * agree - chance) / (n * n - chance)


def discretize(mapped: float, scale: ScoreScale) -> float:
    """Nearest grid point of ``scale``; exact halves round toward ``scale.max``."""
    if not (scale.min - 1e-9 <= mapped <= scale.max + 1e-9):
        raise ValueError(f"{mapped} outside [{scale.min}, {scale.max}]")
    # small epsilon so that 2.5 stored as 2.4999999999999996 still rounds up
    k = math.floor((mapped - scale.min) / scale.step + 0.5 + 1e-9)
    k = min(max(k, 0), scale.n_steps)
    return scale.min + k * scale.step
