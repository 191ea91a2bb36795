"""Regenerate the bundled toy dataset, its scripted judge and the replay cache.

The replies below are hand-written, not produced by a model. They are recorded
into ``data/toy/cache`` by running every variant (P0 included) on every sample
through the mock backend, so replay runs work for any seed or team.

    python tools/make_toy_fixtures.py
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

from swejudge.backend import BackendConfig, JudgeBackend, MockScript
from swejudge.core import EvalSample, TaskKind, load_dataset, write_samples
from swejudge.strategies import StrategyId, StrategyRunner

ROOT = Path(__file__).resolve().parent.parent / "data" / "toy"

SORT_REQ = "Return a new list with the dicts in `people` sorted by the key 'age', oldest first."
SORT_REF = "sorted(people, key=lambda p: p['age'], reverse=True)"

SAMPLES = [
    EvalSample("cg-1", "Reverse the string `s`.", "s[::-1]", "''.join(reversed(s))", 4,
               TaskKind.CODE_GENERATION),
    EvalSample("cg-2", SORT_REQ, "sorted(people, key=lambda p: p['age'])", SORT_REF, 2,
               TaskKind.CODE_GENERATION),
    EvalSample("cg-3", SORT_REQ, "sorted(people, key=lambda p: -p['age'])", SORT_REF, 3,
               TaskKind.CODE_GENERATION),
    EvalSample("cg-4", "Remove duplicates from the list `lst`, keeping the first occurrence order.",
               "list(set(lst))", "list(dict.fromkeys(lst))", 1, TaskKind.CODE_GENERATION),
    EvalSample("pr-1",
               "total() skips the last element.\n\ndef total(a):\n    t = 0\n    for i in range(len(a) - 1):\n"
               "        t += a[i]\n    return t",
               "-    for i in range(len(a) - 1):\n+    for i in range(len(a)):",
               "-    for i in range(len(a) - 1):\n-        t += a[i]\n+    for x in a:\n+        t += x",
               4, TaskKind.PROGRAM_REPAIR),
    EvalSample("pr-2",
               "get_name() crashes when user is None.\n\ndef get_name(user):\n    return user.name.strip()",
               "-    return user.name.strip()\n+    return user.name.strip() if user.name else ''",
               "+    if user is None:\n+        return ''\n     return user.name.strip()",
               1, TaskKind.PROGRAM_REPAIR),
    EvalSample("pr-3",
               "is_adult() rejects people who are exactly 18.\n\ndef is_adult(age):\n    return age > 18",
               "-    return age > 18\n+    return age > 17",
               "-    return age > 18\n+    return age >= 18",
               2, TaskKind.PROGRAM_REPAIR),
    EvalSample("pr-4",
               "mean() divides by zero on an empty list.\n\ndef mean(xs):\n    return sum(xs) / len(xs)",
               "+    if not xs:\n+        return None\n     return sum(xs) / len(xs)",
               "+    if not xs:\n+        return 0.0\n     return sum(xs) / len(xs)",
               3, TaskKind.PROGRAM_REPAIR),
    EvalSample("cs-1", "def fact(n):\n    return 1 if n <= 1 else n * fact(n - 1)",
               "Returns the factorial of n, computed recursively.",
               "Recursively computes n factorial.", 4, TaskKind.CODE_SUMMARIZATION),
    EvalSample("cs-2", "def is_pal(s):\n    return s == s[::-1]",
               "Reverses the given string.",
               "Checks whether a string reads the same forwards and backwards.", 1,
               TaskKind.CODE_SUMMARIZATION),
    EvalSample("cs-3", "def count_lines(path):\n    with open(path) as f:\n        return sum(1 for _ in f)",
               "Reads a file and returns its contents.",
               "Returns the number of lines in the file at path.", 2, TaskKind.CODE_SUMMARIZATION),
    EvalSample("cs-4",
               "def merge(a, b):\n    out = []\n    while a and b:\n        out.append((a if a[0] <= b[0] else b).pop(0))\n"
               "    return out + a + b",
               "Combines two lists into one sorted list.",
               "Merges two sorted lists into a single sorted list.", 3, TaskKind.CODE_SUMMARIZATION),
]

# final-phase scores per sample: P0, P1a, P1b, P2 (after rethink), P3, P4, P5
SCORES = {
    "cg-1": (90, 95, 100, 100, 90, 100, 95),
    "cg-2": (70, 60, 40, 45, 30, 40, 50),
    "cg-3": (80, 85, 75, 70, 80, 60, 75),
    "cg-4": (60, 70, 35, 30, 40, 20, 45),
    "pr-1": (85, 80, 95, 95, 100, 90, 90),
    "pr-2": (70, 55, 30, 25, 20, 35, 40),
    "pr-3": (75, 65, 50, 55, 35, 50, None),
    "pr-4": (80, 75, 70, 75, 60, 80, 70),
    "cs-1": (95, 90, 95, 95, 90, 85, 95),
    "cs-2": (50, 20, 15, 20, 10, 30, 25),
    "cs-3": (70, 50, 45, 50, 40, 55, 45),
    "cs-4": (75, 60, 70, 65, 65, 70, 60),
}

REASONS = {
    "cg-1": "The slice reverses the string exactly as required.",
    "cg-2": "The list is sorted by age but in ascending order, so the oldest person comes last.",
    "cg-3": "Negating the age gives descending order, but it only works for numeric ages.",
    "cg-4": "set() removes duplicates but does not keep the original order.",
    "pr-1": "The loop now covers every index, which fixes the skipped element.",
    "pr-2": "The patch guards user.name, but user itself can still be None.",
    "pr-3": "age > 17 accepts 18 for integers but also accepts 17.5.",
    "pr-4": "The empty case no longer divides by zero, though it returns None instead of 0.0.",
    "cs-1": "The summary states the purpose and the recursive method.",
    "cs-2": "The function compares the string with its reverse; it does not return the reverse.",
    "cs-3": "The function counts lines; it does not return the file contents.",
    "cs-4": "The summary omits that both inputs must already be sorted.",
}

TESTS = {
    "cg-1": "assert f('abc') == 'cba'\nassert f('') == ''\nassert f('a') == 'a'",
    "cg-2": "people = [{'age': 30}, {'age': 50}, {'age': 40}]\nassert [p['age'] for p in f(people)] == [50, 40, 30]",
    "cg-4": "assert f([3, 1, 3, 2, 1]) == [3, 1, 2]\nassert f([]) == []",
    "pr-1": "assert total([1, 2, 3]) == 6\nassert total([]) == 0",
    "pr-2": "assert get_name(None) == ''\nassert get_name(User(' Ann ')) == 'Ann'",
    "pr-3": "assert is_adult(18)\nassert not is_adult(17)\nassert is_adult(30)",
    "pr-4": "assert mean([]) == 0.0\nassert mean([2, 4]) == 3",
    "cs-1": "Q: What does fact(4) return? A: 24\nQ: Is it iterative or recursive? A: recursive",
    "cs-2": "Q: What does is_pal('abba') return? A: True\nQ: Does it modify s? A: no",
    "cs-3": "Q: What is returned for a 3-line file? A: 3\nQ: Are the contents returned? A: no",
    "cs-4": "Q: merge([1, 4], [2, 3])? A: [1, 2, 3, 4]\nQ: Must inputs be sorted? A: yes",
}

PROPERTIES = {
    "cg-1": "- returns a new string\n- characters in reverse order\n- works for the empty string",
    "cg-2": "- returns a new list\n- ordered by age, largest first\n- input list untouched",
    "cg-4": "- every value appears once\n- first-occurrence order preserved",
    "pr-1": "- every element of a is added\n- empty list gives 0",
    "pr-2": "- a None user returns ''\n- otherwise the stripped name is returned",
    "pr-3": "- 18 counts as adult\n- values below 18 do not",
    "pr-4": "- empty input returns 0.0\n- non-empty input returns the arithmetic mean",
    "cs-1": "- computes factorial\n- uses recursion",
    "cs-2": "- boolean result\n- compares the string with its reverse",
    "cs-3": "- opens the file at path\n- returns the line count",
    "cs-4": "- inputs are sorted lists\n- output is a single sorted list",
}

ORDER = (StrategyId.P0, StrategyId.P1a, StrategyId.P1b, StrategyId.P2,
         StrategyId.P3, StrategyId.P4, StrategyId.P5)


def shared_key(sample_id: str) -> str:
    # cg-3 shares requirement and reference with cg-2, so it never issues its own phase 1
    return "cg-2" if sample_id == "cg-3" else sample_id


def build_script() -> MockScript:
    script = MockScript()
    for sample in SAMPLES:
        sid = sample.id
        scores = dict(zip(ORDER, SCORES[sid]))
        reason = REASONS[sid]
        script.add(sid, StrategyId.P0, 1, f"Score: {scores[StrategyId.P0]}")
        # one reply without the word "score" exercises the fallback number rule
        p1a = (f"{reason} I'd give this {scores[StrategyId.P1a]}/100." if sid == "cg-3"
               else f"{reason}\nScore: {scores[StrategyId.P1a]}")
        script.add(sid, StrategyId.P1a, 1, p1a)
        p1b = f"{reason}\nScore: {scores[StrategyId.P1b]}"
        script.add(sid, StrategyId.P1b, 1, p1b)
        script.add(sid, StrategyId.P2, 1, p1b)
        verdict = ("The reason is validated to be True, so the score is unchanged."
                   if scores[StrategyId.P2] == scores[StrategyId.P1b]
                   else "Part of the earlier reason does not hold, so the score is adjusted.")
        script.add(sid, StrategyId.P2, 2, f"{verdict}\nAdjusted score: {scores[StrategyId.P2]}")
        script.add(sid, StrategyId.P3, 1, f"Equivalence: {reason}\nScore: {scores[StrategyId.P3]}")
        if sid != "cg-3":
            script.add(sid, StrategyId.P4, 1, TESTS[sid])
            script.add(sid, StrategyId.P5, 1, PROPERTIES[sid])
        script.add(sid, StrategyId.P4, 2,
                   f"Traced the candidate against each test.\nFunctional correctness score: {scores[StrategyId.P4]}")
        p5 = scores[StrategyId.P5]
        script.add(sid, StrategyId.P5, 2,
                   "I cannot judge this without running the program." if p5 is None
                   else f"Checked each property.\nScore: {p5}")
    return script


def main() -> None:
    ROOT.mkdir(parents=True, exist_ok=True)
    write_samples(SAMPLES, ROOT / "samples.jsonl")
    (ROOT / "manifest.json").write_text(json.dumps({
        "name": "toy",
        "task_kind": "code_generation",
        "scale": {"min": 0, "max": 4, "step": 1},
        "samples_path": "samples.jsonl",
    }, indent=2) + "\n", encoding="utf-8")
    script = build_script()
    script.save(ROOT / "judge_script.json")

    cache_dir = ROOT / "cache"
    if cache_dir.exists():
        shutil.rmtree(cache_dir)
    manifest, samples = load_dataset(ROOT / "manifest.json")
    backend = JudgeBackend(BackendConfig(kind="mock", cache_dir=cache_dir), script=script)
    runner = StrategyRunner(backend, manifest.task_kind)
    runner.evaluate(samples, ORDER)
    # strip the creation time from sidecars so regeneration is byte-stable
    for meta in cache_dir.glob("??/*.meta"):
        data = json.loads(meta.read_text())
        data.pop("created", None)
        meta.write_text(json.dumps(data, indent=2, sort_keys=True))
    print(f"recorded {backend.stats.live_calls} replies into {cache_dir}")


if __name__ == "__main__":
    main()
