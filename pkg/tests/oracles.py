"""Brute-force reference implementations used only by the tests.

Deliberately naive and independent of the package: pure Python, pair counting,
explicit rank construction, direct textbook formulas.
"""

import itertools
import math
from collections import Counter


def kendall_tau_b(x, y):
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx == 0 or dy == 0:
                continue
            if (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = (n0 - ties_x) * (n0 - ties_y)
    if denom == 0:
        return None
    return (concordant - discordant) / math.sqrt(denom)


def average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def pearson(x, y):
    n = len(x)
    if len(set(x)) == 1 or len(set(y)) == 1:
        return None
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def spearman(x, y):
    return pearson(average_ranks(x), average_ranks(y))


def avg_cor(x, y):
    vals = [kendall_tau_b(x, y), spearman(x, y), pearson(x, y)]
    return sum(0.0 if v is None else v for v in vals) / 3


def cohen_kappa(a, b):
    n = len(a)
    p_o = sum(1 for u, v in zip(a, b) if u == v) / n
    ca, cb = Counter(a), Counter(b)
    p_e = sum(ca[k] * cb[k] for k in set(ca) | set(cb)) / (n * n)
    if p_e == 1:
        return 1.0 if p_o == 1 else None
    return (p_o - p_e) / (1 - p_e)


ELIGIBLE = ("P1a", "P1b", "P2", "P3", "P4", "P5")


def best_team(raw_scores, truth, scale_min, scale_max):
    """Exhaustive search: raw_scores[strategy] is a list of 0-100 scores per trial sample.

    Returns (members, avg_cor) of the best team with ties going to the smaller
    team and then the lexicographically earlier member list.
    """
    candidates = []
    for size in range(2, 7):
        for members in itertools.combinations(ELIGIBLE, size):
            mapped = []
            for i in range(len(truth)):
                mean = sum(raw_scores[m][i] for m in members) / len(members)
                mapped.append(mean / 100 * (scale_max - scale_min) + scale_min)
            candidates.append((members, avg_cor(mapped, truth)))
    top = max(c for _, c in candidates)
    for members, c in candidates:  # already in (size, lexicographic) order
        if c >= top - 1e-12:
            return members, c


def char_ngram_counts(text, n):
    counts = Counter()
    for start in range(len(text)):
        if start + n <= len(text):
            counts[text[start:start + n]] += 1
    return counts


def clipped_matches(hyp, ref):
    return sum(min(c, ref[g]) for g, c in hyp.items())
