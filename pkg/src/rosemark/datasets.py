"""Dataset ingestion and the synthetic desk-scale corpus.

Records mirror common program-synthesis benchmarks: a prompt, a
canonical solution, and assert-style test cases. The synthesizer emits
small single-function programs covering every transformation family,
with tests derived by executing the canonical solution at build time.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import MalformedRecordError
from .syntax import parse
from .transforms import enumerate_sites

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetRecord:
    task_id: str
    prompt: str
    canonical_solution: str
    tests: Tuple[str, ...]

    @property
    def entry_point(self) -> str:
        line = next(
            ln for ln in self.canonical_solution.splitlines() if ln.startswith("def ")
        )
        return line[4 : line.index("(")].strip()


@dataclass
class IngestReport:
    records: List[DatasetRecord]
    skipped: List[Tuple[int, str]] = field(default_factory=list)


def ingest(path) -> IngestReport:
    """Read a JSONL dataset; skip records outside the supported subset."""
    report = IngestReport(records=[])
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(line_no, f"bad JSON: {exc}") from None
            missing = {"task_id", "prompt", "canonical_solution", "tests"} - set(raw)
            if missing:
                raise MalformedRecordError(line_no, f"missing fields {sorted(missing)}")
            record = DatasetRecord(
                task_id=str(raw["task_id"]),
                prompt=str(raw["prompt"]),
                canonical_solution=str(raw["canonical_solution"]),
                tests=tuple(raw["tests"]),
            )
            try:
                parse(record.canonical_solution)
            except Exception as exc:
                reason = f"{type(exc).__name__}: {exc}"
                report.skipped.append((line_no, reason))
                logger.info("skipping %s (line %d): %s", record.task_id, line_no, reason)
                continue
            report.records.append(record)
    return report


def write_jsonl(records: Sequence[DatasetRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "task_id": r.task_id,
                "prompt": r.prompt,
                "canonical_solution": r.canonical_solution,
                "tests": list(r.tests),
            }, sort_keys=True) + "\n")


# --- synthetic corpus ----------------------------------------------------------


_FIXTURES = [
    (
        "parity of a prefix sum",
        '''def check_last(arr, n, p):
    _sum = 0
    for i in range(n):
        _sum = _sum + arr[i]
    if p == 1:
        if _sum % 2 == 1:
            return 'ODD'
    return 'EVEN'
''',
        [
            "assert check_last([1, 2, 3], 3, 1) == 'EVEN'",
            "assert check_last([1, 2], 2, 1) == 'ODD'",
            "assert check_last([1, 2], 2, 0) == 'EVEN'",
        ],
    ),
    (
        "most frequent words of a sentence",
        '''def histogram(test):
    dict1 = {}
    list1 = test.split(' ')
    t = 0
    for item in list1:
        if list1.count(item) > t:
            if item != '':
                t = list1.count(item)
    if t > 0:
        for item in list1:
            if list1.count(item) == t:
                dict1[item] = t
    return dict1
''',
        [
            "assert histogram('a b b') == {'b': 2}",
            "assert histogram('a b c') == {'a': 1, 'b': 1, 'c': 1}",
            "assert histogram('') == {}",
        ],
    ),
    (
        "closest vowel flanked by consonants, from the right",
        '''def get_closest_vowel(word):
    vowels = {'a', 'e', 'i', 'o', 'u', 'A', 'E', 'O', 'U', 'I'}
    if len(word) < 3:
        return ''
    for i in range(len(word) - 2, 0, -1):
        if word[i] in vowels:
            if word[i + 1] not in vowels:
                if word[i - 1] not in vowels:
                    return word[i]
    return ''
''',
        [
            "assert get_closest_vowel('yogurt') == 'u'",
            "assert get_closest_vowel('FULL') == 'U'",
            "assert get_closest_vowel('ab') == ''",
        ],
    ),
    (
        "index where two arrays first differ",
        '''def find_extra(arr1, arr2, n):
    for i in range(0, n):
        if arr1[i] != arr2[i]:
            return i
    return n
''',
        [
            "assert find_extra([1, 2, 3], [1, 2, 4], 3) == 2",
            "assert find_extra([1], [1], 1) == 1",
        ],
    ),
    (
        "count sevens among numbers divisible by 11 or 13",
        '''def fizz_buzz(n):
    ns = []
    for i in range(n):
        if i % 11 == 0 or i % 13 == 0:
            ns.append(i)
    s = ''.join(list(map(str, ns)))
    ans = 0
    for c in s:
        ans += c == '7'
    return ans
''',
        [
            "assert fizz_buzz(50) == 0",
            "assert fizz_buzz(78) == 2",
            "assert fizz_buzz(79) == 3",
        ],
    ),
]


_LIST_PARAMS = ("xs", "items", "values", "nums", "arr", "seq", "entries")
_SCALAR_PARAMS = ("k", "limit", "target", "bound", "factor", "pivot", "cap")
_ACC_NAMES = ("total", "result", "acc", "tally", "summed", "outcome")
_COUNT_NAMES = ("count", "hits", "matches", "found", "seen_count")
_IDX_NAMES = ("i", "j", "idx", "pos")
_CAMEL = ("myTotal", "itemCount", "runningSum", "bestSoFar", "curValue")
_FN_WORDS = ("calc", "scan", "fold", "probe", "tally", "sweep", "rank", "sift")


def _pick(rng, pool):
    return pool[int(rng.integers(0, len(pool)))]


def _sample_list(rng, size=5, lo=-9, hi=9):
    return [int(v) for v in rng.integers(lo, hi, size=size)]


class _Templates:
    """Each template returns (code, list of call-argument tuples)."""

    @staticmethod
    def scaled_sum(rng, fn):
        xs, k = _pick(rng, _LIST_PARAMS), _pick(rng, _SCALAR_PARAMS)
        t = _pick(rng, _ACC_NAMES)
        i = _pick(rng, _IDX_NAMES)
        op = _pick(rng, ("+", "*"))
        code = (
            f"def {fn}({xs}, {k}):\n"
            f"    {t} = 0\n"
            f"    for {i} in range(len({xs})):\n"
            f"        {t} = {t} + {xs}[{i}] {op} {k}\n"
            f"    return {t}\n"
        )
        return code, [(_sample_list(rng), int(rng.integers(1, 4))) for _ in range(3)]

    @staticmethod
    def count_over(rng, fn):
        xs, k = _pick(rng, _LIST_PARAMS), _pick(rng, _SCALAR_PARAMS)
        c = _pick(rng, _COUNT_NAMES)
        i = _pick(rng, _IDX_NAMES)
        cmp = _pick(rng, (">", "<", ">=", "=="))
        code = (
            f"def {fn}({xs}, {k}):\n"
            f"    {c} = 0\n"
            f"    for {i} in range(len({xs})):\n"
            f"        if {xs}[{i}] {cmp} {k}:\n"
            f"            {c} += 1\n"
            f"    return {c}\n"
        )
        return code, [(_sample_list(rng), int(rng.integers(-3, 4))) for _ in range(3)]

    @staticmethod
    def find_while(rng, fn):
        xs, k = _pick(rng, _LIST_PARAMS), _pick(rng, _SCALAR_PARAMS)
        i = _pick(rng, _IDX_NAMES)
        cmp = _pick(rng, (">", "==", "<"))
        code = (
            f"def {fn}({xs}, {k}):\n"
            f"    {i} = 0\n"
            f"    while {i} < len({xs}):\n"
            f"        if {xs}[{i}] {cmp} {k}:\n"
            f"            return {i}\n"
            f"        {i} += 1\n"
            f"    return -1\n"
        )
        return code, [(_sample_list(rng), int(rng.integers(-3, 4))) for _ in range(3)]

    @staticmethod
    def guarded_product(rng, fn):
        a, b = "a_val", _pick(rng, _SCALAR_PARAMS)
        r = _pick(rng, _ACC_NAMES)
        code = (
            f"def {fn}({a}, {b}):\n"
            f"    {r} = 0\n"
            f"    if {a} > 0:\n"
            f"        if {b} > 0:\n"
            f"            {r} = {a} * {b}\n"
            f"    return {r}\n"
        )
        return code, [
            (int(rng.integers(-4, 6)), int(rng.integers(-4, 6))) for _ in range(4)
        ]

    @staticmethod
    def sentinel_loop(rng, fn):
        nv = _pick(rng, _SCALAR_PARAMS)
        s = _pick(rng, _ACC_NAMES)
        j = _pick(rng, _IDX_NAMES)
        spelling = _pick(rng, ("True", "1"))
        step = int(rng.integers(1, 3))
        code = (
            f"def {fn}({nv}):\n"
            f"    {s} = 0\n"
            f"    {j} = 0\n"
            f"    while {spelling}:\n"
            f"        if {j} >= {nv}:\n"
            f"            break\n"
            f"        {s} = {s} + {j}\n"
            f"        {j} += {step}\n"
            f"    return {s}\n"
        )
        return code, [(int(rng.integers(0, 12)),) for _ in range(3)]

    @staticmethod
    def poly_eval(rng, fn):
        x = _pick(rng, ("x", "val", "point"))
        a, b, c = "coef_a", "coef_b", "coef_c"
        code = (
            f"def {fn}({x}, {a}, {b}, {c}):\n"
            f"    outcome = {a} * {x} ** 2 + {b} * {x} + {c}\n"
            f"    outcome += {x}\n"
            f"    return outcome\n"
        )
        return code, [
            tuple(int(v) for v in rng.integers(-3, 4, size=4)) for _ in range(3)
        ]

    @staticmethod
    def best_scan(rng, fn):
        xs = _pick(rng, _LIST_PARAMS)
        best = _pick(rng, _CAMEL)
        i = _pick(rng, _IDX_NAMES)
        cmp = _pick(rng, (">", "<"))
        code = (
            f"def {fn}({xs}):\n"
            f"    {best} = {xs}[0]\n"
            f"    for {i} in range(len({xs})):\n"
            f"        if {xs}[{i}] {cmp} {best}:\n"
            f"            {best} = {xs}[{i}]\n"
            f"    return {best}\n"
        )
        return code, [(_sample_list(rng, size=6),) for _ in range(3)]

    @staticmethod
    def digit_fold(rng, fn):
        nv = _pick(rng, ("n", "number", "figure"))
        t = _pick(rng, _ACC_NAMES)
        base = int(rng.integers(7, 12))
        code = (
            f"def {fn}({nv}):\n"
            f"    {t} = 0\n"
            f"    while {nv} > 0:\n"
            f"        {t} += {nv} % {base}\n"
            f"        {nv} = {nv} // {base}\n"
            f"    return {t}\n"
        )
        return code, [(int(rng.integers(1, 4000)),) for _ in range(3)]

    @staticmethod
    def pick_filter(rng, fn):
        xs, k = _pick(rng, _LIST_PARAMS), _pick(rng, _SCALAR_PARAMS)
        out = "kept"
        i = _pick(rng, _IDX_NAMES)
        cmp = _pick(rng, ("<", ">"))
        code = (
            f"def {fn}({xs}, {k}):\n"
            f"    {out} = []\n"
            f"    for {i} in range(len({xs})):\n"
            f"        if {xs}[{i}] {cmp} {k}:\n"
            f"            {out}.append({xs}[{i}])\n"
            f"    return {out}\n"
        )
        return code, [(_sample_list(rng), int(rng.integers(-2, 3))) for _ in range(3)]

    @staticmethod
    def window_pairs(rng, fn):
        xs = _pick(rng, _LIST_PARAMS)
        c = _pick(rng, _COUNT_NAMES)
        i = _pick(rng, _IDX_NAMES)
        code = (
            f"def {fn}({xs}):\n"
            f"    {c} = 0\n"
            f"    for {i} in range(len({xs}) - 1):\n"
            f"        if {xs}[{i}] < {xs}[{i} + 1]:\n"
            f"            {c} = {c} + 1\n"
            f"    return {c}\n"
        )
        return code, [(_sample_list(rng, size=6),) for _ in range(3)]

    @staticmethod
    def range_product(rng, fn):
        nv, step_name = _pick(rng, _SCALAR_PARAMS), "growth"
        acc = _pick(rng, _ACC_NAMES)
        kk = _pick(rng, _IDX_NAMES)
        code = (
            f"def {fn}({nv}, {step_name}):\n"
            f"    {acc} = 1\n"
            f"    {kk} = 1\n"
            f"    while {kk} < {nv}:\n"
            f"        {acc} = {acc} * {step_name}\n"
            f"        {kk} += 1\n"
            f"    return {acc}\n"
        )
        return code, [
            (int(rng.integers(1, 7)), int(rng.integers(1, 4))) for _ in range(3)
        ]

    @staticmethod
    def countdown_sum(rng, fn):
        nv = _pick(rng, ("n", "ticks", "steps"))
        s = _pick(rng, _ACC_NAMES)
        i = _pick(rng, _IDX_NAMES)
        code = (
            f"def {fn}({nv}):\n"
            f"    {s} = 0\n"
            f"    for {i} in range({nv}, 0, -1):\n"
            f"        {s} += {i} * {i}\n"
            f"    return {s}\n"
        )
        return code, [(int(rng.integers(1, 10)),) for _ in range(3)]

    @staticmethod
    def clamp_chain(rng, fn):
        v = _pick(rng, ("value", "reading", "level"))
        code = (
            f"def {fn}({v}, low_cut, high_cut):\n"
            f"    if ({v} < low_cut):\n"
            f"        return low_cut\n"
            f"    if ({v} > high_cut):\n"
            f"        return high_cut\n"
            f"    return {v}\n"
        )
        return code, [
            (int(rng.integers(-9, 10)), -2, int(rng.integers(3, 7))) for _ in range(4)
        ]

    @staticmethod
    def band_pick(rng, fn):
        xs = _pick(rng, _LIST_PARAMS)
        lo, hi = "low_bar", "high_bar"
        i = _pick(rng, _IDX_NAMES)
        code = (
            f"def {fn}({xs}, {lo}, {hi}):\n"
            f"    for {i} in range(len({xs})):\n"
            f"        if {xs}[{i}] > {lo} and {xs}[{i}] < {hi}:\n"
            f"            return {i}\n"
            f"    return -1\n"
        )
        return code, [(_sample_list(rng), -2, 4) for _ in range(3)]

    @staticmethod
    def vowel_tally(rng, fn):
        s = _pick(rng, ("text", "word", "phrase"))
        c = _pick(rng, _COUNT_NAMES)
        i = _pick(rng, _IDX_NAMES)
        code = (
            f"def {fn}({s}):\n"
            f"    letters = 'aeiou'\n"
            f"    {c} = 0\n"
            f"    for {i} in range(len({s})):\n"
            f"        if letters.count({s}[{i}]) > 0:\n"
            f"            {c} = {c} + 1\n"
            f"    return {c}\n"
        )
        words = ("stream", "gateway", "unit", "froze", "plateau", "crypt")
        return code, [(_pick(rng, words),) for _ in range(3)]

    @staticmethod
    def keyed_table(rng, fn):
        ks = _pick(rng, ("keys", "labels", "names"))
        v = _pick(rng, _SCALAR_PARAMS)
        i = _pick(rng, _IDX_NAMES)
        code = (
            f"def {fn}({ks}, {v}):\n"
            f"    table = {{}}\n"
            f"    for {i} in range(len({ks})):\n"
            f"        table[{ks}[{i}]] = {v} * {i}\n"
            f"    return table\n"
        )
        return code, [
            ((["a", "b", "c"], int(rng.integers(1, 5)))),
            ((["x"], int(rng.integers(1, 5)))),
        ]

    @staticmethod
    def abs_fold(rng, fn):
        xs = _pick(rng, _LIST_PARAMS)
        t = _pick(rng, _CAMEL)
        i = _pick(rng, _IDX_NAMES)
        code = (
            f"def {fn}({xs}):\n"
            f"    {t} = 0\n"
            f"    for {i} in range(len({xs})):\n"
            f"        if {xs}[{i}] < 0:\n"
            f"            {t} = {t} - {xs}[{i}]\n"
            f"        else:\n"
            f"            {t} = {t} + {xs}[{i}]\n"
            f"    return {t}\n"
        )
        return code, [(_sample_list(rng),) for _ in range(3)]


_TEMPLATE_FNS = [
    _Templates.scaled_sum,
    _Templates.count_over,
    _Templates.find_while,
    _Templates.guarded_product,
    _Templates.sentinel_loop,
    _Templates.poly_eval,
    _Templates.best_scan,
    _Templates.digit_fold,
    _Templates.pick_filter,
    _Templates.window_pairs,
    _Templates.range_product,
    _Templates.countdown_sum,
    _Templates.clamp_chain,
    _Templates.band_pick,
    _Templates.vowel_tally,
    _Templates.keyed_table,
    _Templates.abs_fold,
]


def _tests_for(code: str, fn_name: str, calls) -> Tuple[str, ...]:
    namespace: dict = {}
    exec(code, namespace)  # trusted: code built by this module
    func = namespace[fn_name]
    tests = []
    for args in calls:
        expected = func(*[list(a) if isinstance(a, list) else a for a in args])
        arg_text = ", ".join(repr(a) for a in args)
        tests.append(f"assert {fn_name}({arg_text}) == {expected!r}")
    return tuple(tests)


def synth_corpus(n: int = 240, seed: int = 0,
                 min_sites: int = 6) -> List[DatasetRecord]:
    """Deterministic desk-scale corpus of single-function programs."""
    rng = np.random.default_rng(seed)
    records: List[DatasetRecord] = []
    for idx, (prompt, code, tests) in enumerate(_FIXTURES):
        records.append(DatasetRecord(f"fixture_{idx:03d}", prompt, code, tuple(tests)))
    serial = 0
    while len(records) < n:
        template = _TEMPLATE_FNS[serial % len(_TEMPLATE_FNS)]
        fn_name = f"{_pick(rng, _FN_WORDS)}_{serial:03d}"
        code, calls = template(rng, fn_name)
        serial += 1
        tree = parse(code)
        if len(enumerate_sites(tree)) < min_sites:
            continue
        tests = _tests_for(code, fn_name, calls)
        records.append(
            DatasetRecord(
                task_id=f"synth_{serial:04d}",
                prompt=f"{template.__name__} variant",
                canonical_solution=code,
                tests=tests,
            )
        )
    return records


def main(argv: Optional[List[str]] = None) -> int:
    import argparse

    ap = argparse.ArgumentParser(description="emit the synthetic corpus as JSONL")
    ap.add_argument("--out", required=True)
    ap.add_argument("--n", type=int, default=240)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    write_jsonl(synth_corpus(args.n, args.seed), args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
