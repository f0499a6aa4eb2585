"""Canonical enumeration of ALCI concepts and certified separator search.

Concepts come out in nondecreasing size and, within one size, in the order of
their printed form.  Obviously redundant shapes are never produced: double
negation, ``∃R.⊥``, conjunctions with ``⊤`` or ``⊥`` as a conjunct, and
conjunctions containing both ``C`` and ``¬C``.

Candidates are screened against a pool of finite models of the KB before any
exact entailment test.  A failed exact test returns a finite countermodel,
which joins the pool, so the pool learns the reasons candidates fail.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .concepts import (BOT, TOP, Atom, Concept, Exists, Not, conj, conjuncts, neg,
                       roles_of, size, sort_key)
from .kb import LabeledKB
from .structures import FiniteStructure, extension
from .typeengine import entails_concept, model_with, random_models


def _conj_ok(c: Concept) -> bool:
    parts = set(conjuncts(c))
    if TOP in parts or BOT in parts:
        return False
    return not any(neg(p) in parts for p in parts)


def enumerate_concepts(concept_names: Iterable[str], role_names: Iterable[str],
                       max_size: int) -> Iterator[Concept]:
    """All canonical concepts over the given symbols of size at most ``max_size``."""
    names = sorted(set(concept_names))
    roles = roles_of(set(role_names))
    levels: list[list[Concept]] = [[]]
    seen: set[Concept] = set()
    for s in range(1, max_size + 1):
        level: set[Concept] = set()
        if s == 1:
            level.add(TOP)
            level.update(Atom(n) for n in names)
        else:
            for c in levels[s - 1]:
                if not isinstance(c, Not):
                    level.add(Not(c))
                if c != BOT:
                    level.update(Exists(r, c) for r in roles)
            for i in range(1, (s - 1) // 2 + 1):
                for left in levels[i]:
                    for right in levels[s - 1 - i]:
                        c = conj(left, right)
                        if size(c) == s and _conj_ok(c):
                            level.add(c)
        level -= seen
        ordered = sorted(level, key=sort_key)
        seen.update(ordered)
        levels.append(ordered)
        yield from ordered


def helper_names(lkb: LabeledKB, count: int) -> list[str]:
    """``count`` fresh concept names outside sig(K)."""
    taken = lkb.kb.signature()
    out, i = [], 1
    while len(out) < count:
        name = f"H{i}"
        if name not in taken:
            out.append(name)
        i += 1
    return out


@dataclass
class SearchReport:
    max_size: int
    helpers: tuple[str, ...]
    candidates: int = 0
    exact_checks: int = 0
    pool_size: int = 0
    exhausted_size: int = 0
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"maxSize": self.max_size, "helpers": list(self.helpers),
                "candidates": self.candidates, "exactChecks": self.exact_checks,
                "poolSize": self.pool_size, "exhaustedSize": self.exhausted_size}


@dataclass
class SeparatorSearch:
    """Searches for a weak (``strong=False``) or strong separator.

    The pool holds models of K; a candidate is rejected on the spot when some
    pool model puts a positive outside it (or, in strong mode, a negative
    inside it).  For weak separation a pool model with a negative outside the
    candidate already proves non-entailment.
    """

    lkb: LabeledKB
    strong: bool = False
    seed: int = 0
    pool: list[FiniteStructure] = field(default_factory=list)

    def __post_init__(self):
        if not self.pool:
            self.pool = random_models(self.lkb.kb, 6, seed=self.seed)

    def _holds(self, c: Concept, s: FiniteStructure, a: str, memo: dict) -> bool:
        return s.const_map[a] in extension(c, s, memo)

    def _learn(self, model: FiniteStructure | None):
        if model is not None:
            self.pool.append(model)

    def accepts(self, c: Concept, report: SearchReport | None = None) -> bool:
        kb, pos, negs = self.lkb.kb, self.lkb.positives, self.lkb.negatives
        memos = [{} for _ in self.pool]
        for s, memo in zip(self.pool, memos):
            if any(not self._holds(c, s, a, memo) for a in pos):
                return False
            if self.strong and any(self._holds(c, s, b, memo) for b in negs):
                return False
        refuted_neg = set()
        if not self.strong:
            for s, memo in zip(self.pool, memos):
                refuted_neg |= {b for b in negs if not self._holds(c, s, b, memo)}
        if report is not None:
            report.exact_checks += 1
        for a in pos:
            if not entails_concept(kb, c, a):
                self._learn(model_with(kb, [(neg(c), a)]))
                return False
        for b in negs:
            if self.strong:
                if not entails_concept(kb, neg(c), b):
                    self._learn(model_with(kb, [(c, b)]))
                    return False
            elif b not in refuted_neg and entails_concept(kb, c, b):
                return False
        return True

    def search(self, concept_names: Iterable[str], role_names: Iterable[str], max_size: int,
               helpers: tuple[str, ...] = ()) -> tuple[Concept | None, SearchReport]:
        report = SearchReport(max_size, tuple(helpers))
        start = time.perf_counter()
        found = None
        for c in enumerate_concepts(set(concept_names) | set(helpers), role_names, max_size):
            report.candidates += 1
            report.exhausted_size = max(report.exhausted_size, size(c) - 1)
            if self.accepts(c, report):
                found = c
                break
        if found is None:
            report.exhausted_size = max_size
        report.pool_size = len(self.pool)
        report.seconds = time.perf_counter() - start
        return found, report
