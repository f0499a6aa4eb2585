"""Regenerate the randomized fixture KBs and their frozen verdicts.

Each strong verdict is corroborated before it is frozen: a Separable verdict
must come with a strong separator that passes the entailment check, and an
Inseparable verdict must coexist with no strong separator up to size 6.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from support import FIXTURES, random_labeled_kb  # noqa: E402

from alcisep.concepts import format_concept  # noqa: E402
from alcisep.enumeration import SeparatorSearch  # noqa: E402
from alcisep.parser import format_kb, parse_kb  # noqa: E402
from alcisep.strong import check_strong_separator, strong_separable  # noqa: E402
from alcisep.typeengine import kb_satisfiable  # noqa: E402
from alcisep.weak import WeakBudget, weak_separable  # noqa: E402

WEAK_BUDGET = WeakBudget(max_size=6, helpers=0, depth=1, outdegree=1, max_candidates=50)


def main(count: int = 20, seed: int = 20261015) -> None:
    rng = random.Random(seed)
    verdicts: dict = {}
    quota = {True: count // 2, False: count - count // 2}
    while len(verdicts) < count:
        lkb = random_labeled_kb(rng, pos_max=2, neg_max=2, cis=rng.randint(1, 2))
        if not kb_satisfiable(lkb.kb):
            continue
        name = f"random_{len(verdicts):02d}.kb"
        text = format_kb(lkb)
        lkb = parse_kb(text)
        sv = strong_separable(lkb, synthesize=True, max_size=6)
        if quota[sv.separable] == 0:
            continue
        quota[sv.separable] -= 1
        found, _ = SeparatorSearch(lkb, strong=True).search(lkb.sigma_concepts, lkb.sigma_roles, 6)
        if sv.separable:
            assert sv.separator is None or check_strong_separator(lkb, sv.separator)
        else:
            assert found is None, (name, format_concept(found))
        wv = weak_separable(lkb, WEAK_BUDGET)
        (FIXTURES / name).write_text(text, encoding="utf-8")
        verdicts[name] = {
            "strong": "Separable" if sv.separable else "Inseparable",
            "strongSeparator": None if sv.separator is None else format_concept(sv.separator),
            "weak": wv.status.value,
        }
    (FIXTURES / "random_verdicts.json").write_text(
        json.dumps(verdicts, indent=2, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
