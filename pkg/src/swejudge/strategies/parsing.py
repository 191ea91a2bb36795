"""Score extraction from free-form judge replies."""

from __future__ import annotations

import math
import re

FALLBACK_SCORE = 50.0

_NUMBER = r"[-+]?(?:\d+(?:\.\d+)?|\.\d+)"
# "score" then, on the same line, the first number (skipping words and punctuation).
_SCORE_LINE = re.compile(r"score\b[^\d\n+-]*?(" + _NUMBER + r")", re.IGNORECASE)
# a standalone number: not glued to letters, digits or a decimal point
_STANDALONE = re.compile(r"(?<![\w.])(" + _NUMBER + r")(?![\w]|\.\d)")
# "85/100" and "85 out of 100" denote 85, not 100
_OUT_OF_100 = re.compile(r"(?:\s*/\s*|\s*\(?\s*out\s+of\s+)100(?:\.0+)?\b\)?", re.IGNORECASE)
# range annotations such as "(0-100)" or "0 to 100"
_RANGE = re.compile(r"\(?(?<![\w.])0\s*(?:-|\u2013|to)\s*100(?![\w.])\)?", re.IGNORECASE)


def _clamp(value: float) -> float:
    return min(100.0, max(0.0, value))


def _to_float(token: str) -> float | None:
    try:
        value = float(token)
    except (ValueError, OverflowError):
        return None
    if math.isnan(value):
        return None
    return value


def parse_score(reply: str) -> float | None:
    """Extract a 0-100 score from ``reply``, or None if it has no number.

    The last line mentioning "score" with a number wins; otherwise the last
    standalone number in the reply. The result is clamped to [0, 100].
    """
    if not isinstance(reply, str) or not reply:
        return None
    text = _RANGE.sub("", _OUT_OF_100.sub("", reply))
    for line in reversed(text.splitlines()):
        matches = _SCORE_LINE.findall(line)
        if matches:
            value = _to_float(matches[-1])
            if value is not None:
                return _clamp(value)
    for token in reversed(_STANDALONE.findall(text)):
        value = _to_float(token)
        if value is not None:
            return _clamp(value)
    return None


def extract_reasons(reply: str) -> str:
    """The reply minus its score line(s); the whole reply if nothing else is left."""
    kept = [line for line in reply.splitlines() if not _SCORE_LINE.search(line)]
    reasons = "\n".join(kept).strip()
    return reasons if reasons else reply.strip() or reply
