"""Match-based baseline metrics: sentence BLEU, ROUGE-L and chrF++.

BLEU uses add-one smoothing for higher-order n-gram precisions that have zero
matches (the unigram precision is never smoothed), so its numbers are not
interchangeable with other BLEU implementations.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

TOKENIZERS = ("whitespace", "code_punct")

_CODE_TOKEN = re.compile(r"[^\W\d]\w*|\d+(?:\.\d+)?|[^\w\s]")

CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2


def tokenize(text: str, tokenizer: str = "whitespace") -> list[str]:
    if tokenizer == "whitespace":
        return text.split()
    if tokenizer == "code_punct":
        return _CODE_TOKEN.findall(text)
    raise ValueError(f"unknown tokenizer {tokenizer!r}; expected one of {TOKENIZERS}")


@dataclass(frozen=True)
class TokenizedPair:
    hypothesis: tuple[str, ...]
    reference: tuple[str, ...]
    tokenizer_id: str = "whitespace"

    @classmethod
    def from_text(cls, hypothesis: str, reference: str, tokenizer: str = "whitespace") -> "TokenizedPair":
        return cls(tuple(tokenize(hypothesis, tokenizer)), tuple(tokenize(reference, tokenizer)), tokenizer)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(pair: TokenizedPair, max_n: int = 4) -> float:
    hyp, ref = pair.hypothesis, pair.reference
    if not ref:
        raise ValueError("BLEU needs a nonempty reference")
    if not hyp:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        hyp_counts = _ngrams(hyp, n)
        matches = sum((hyp_counts & _ngrams(ref, n)).values())
        total = sum(hyp_counts.values())
        if matches == 0:
            if n == 1:
                return 0.0
            precision = 1.0 / (total + 1)
        else:
            precision = matches / total
        log_sum += math.log(precision)
    bp = 1.0 if len(hyp) >= len(ref) else math.exp(1.0 - len(ref) / len(hyp))
    return min(1.0, bp * math.exp(log_sum / max_n))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(pair: TokenizedPair) -> float:
    """LCS-based F1."""
    hyp, ref = pair.hypothesis, pair.reference
    if not ref:
        raise ValueError("ROUGE-L needs a nonempty reference")
    lcs = lcs_length(hyp, ref)
    if lcs == 0:
        return 0.0
    p = lcs / len(hyp)
    r = lcs / len(ref)
    return 2 * p * r / (p + r)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def chrf_words(text: str) -> list[str]:
    """Whitespace tokens with one leading or trailing punctuation mark split off."""
    words = []
    for token in text.split():
        if len(token) > 1 and _is_punct(token[-1]):
            words.extend([token[:-1], token[-1]])
        elif len(token) > 1 and _is_punct(token[0]):
            words.extend([token[0], token[1:]])
        else:
            words.append(token)
    return words


def _char_ngrams(text: str, n: int) -> Counter:
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def chrf_statistics(hypothesis: str, reference: str) -> list[tuple[int, int, int]]:
    """(hypothesis count, reference count, matches) per order: chars 1..6, then words 1..2."""
    hyp_chars = "".join(hypothesis.split())
    ref_chars = "".join(reference.split())
    stats = []
    for n in range(1, CHRF_CHAR_ORDER + 1):
        h, r = _char_ngrams(hyp_chars, n), _char_ngrams(ref_chars, n)
        stats.append((sum(h.values()), sum(r.values()), sum((h & r).values())))
    hyp_words, ref_words = chrf_words(hypothesis), chrf_words(reference)
    for n in range(1, CHRF_WORD_ORDER + 1):
        h, r = _ngrams(hyp_words, n), _ngrams(ref_words, n)
        stats.append((sum(h.values()), sum(r.values()), sum((h & r).values())))
    return stats


def chrf_pp(hypothesis: str, reference: str, beta: float = CHRF_BETA) -> float:
    """chrF++ on a 0-100 scale.

    Precision and recall are averaged over the orders where both sides have
    n-grams, then combined with F-beta.
    """
    if not reference.strip():
        raise ValueError("chrF++ needs a nonempty reference")
    precision = recall = 0.0
    effective = 0
    for hyp_count, ref_count, matches in chrf_statistics(hypothesis, reference):
        if hyp_count > 0 and ref_count > 0:
            precision += matches / hyp_count
            recall += matches / ref_count
            effective += 1
    if effective == 0:
        return 0.0
    precision /= effective
    recall /= effective
    if precision + recall == 0:
        return 0.0
    b2 = beta ** 2
    return 100.0 * (1 + b2) * precision * recall / (b2 * precision + recall)


METRICS = ("bleu", "rougeL", "chrfpp")


def score_pair(metric: str, hypothesis: str, reference: str, tokenizer: str = "whitespace") -> float:
    if metric == "bleu":
        return bleu(TokenizedPair.from_text(hypothesis, reference, tokenizer))
    if metric == "rougeL":
        return rouge_l(TokenizedPair.from_text(hypothesis, reference, tokenizer))
    if metric == "chrfpp":
        return chrf_pp(hypothesis, reference)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
