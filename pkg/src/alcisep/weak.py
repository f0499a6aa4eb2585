"""Weak ALCI(Σ)-separability as a certified semi-decision procedure.

Two engines run per negative example ``b``:

* separator enumeration, which returns a concept re-verified by exact
  entailment checks;
* (projective only) a search for a finite forest model ``A`` of K in which no
  positive example's database component maps into ``A, b`` in the
  homomorphism-plus-types sense.  Such a model certifies projective
  separability.

Neither engine ever proves inseparability, so the only negative outcome is
``UNKNOWN``, except for two degenerate inputs that are provably inseparable:
an unsatisfiable KB (it entails every concept at every negative example) and
an example that is both positive and negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .bisim import hom_c_check
from .concepts import Concept, Role, conj, signature
from .enumeration import SeparatorSearch, helper_names
from .kb import KnowledgeBase, LabeledKB
from .structures import FiniteStructure, is_forest_model, is_model
from .typeengine import (TypeTable, entails_concept, initial_domains, kb_satisfiable,
                         solve_assignments, table_for)


class SignatureError(ValueError):
    """A candidate separator uses symbols it is not allowed to use."""


class Status(str, Enum):
    SEPARABLE = "Separable"
    INSEPARABLE = "Inseparable"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Separator:
    concept: Concept
    helpers: tuple[str, ...] = ()


@dataclass(frozen=True)
class ModelWitness:
    structure: FiniteStructure
    negative: str


Certificate = Separator | ModelWitness


@dataclass(frozen=True)
class WeakBudget:
    max_size: int = 8
    helpers: int = 1
    depth: int = 2
    outdegree: int = 2
    max_candidates: int = 200


@dataclass
class WeakVerdict:
    status: Status
    certificates: dict[str, Certificate] = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    note: str = ""

    @property
    def separator(self) -> Concept | None:
        """Conjunction of the per-negative separators, when all are concepts."""
        certs = list(self.certificates.values())
        if self.status is not Status.SEPARABLE or not certs:
            return None
        if not all(isinstance(c, Separator) for c in certs):
            return None
        return conj(*(c.concept for c in certs))

    @property
    def helpers(self) -> tuple[str, ...]:
        names = {h for c in self.certificates.values() if isinstance(c, Separator) for h in c.helpers}
        return tuple(sorted(names))


def _check_signature(lkb: LabeledKB, c: Concept, projective: bool):
    sig = signature(c)
    if projective:
        bad = (sig & lkb.kb.signature()) - lkb.sigma
    else:
        bad = sig - lkb.sigma
    if bad:
        raise SignatureError(f"symbols outside the allowed signature: {sorted(bad)}")


def check_separator(lkb: LabeledKB, c: Concept, projective: bool = False) -> bool:
    """Does ``c`` weakly separate ``lkb``?"""
    _check_signature(lkb, c, projective)
    kb = lkb.kb
    return (all(entails_concept(kb, c, a) for a in lkb.positives)
            and not any(entails_concept(kb, c, b) for b in lkb.negatives))


def _degenerate(lkb: LabeledKB) -> WeakVerdict | None:
    clash = sorted(set(lkb.positives) & set(lkb.negatives))
    if clash:
        return WeakVerdict(Status.INSEPARABLE, note=f"examples {clash} are both positive and negative")
    if not kb_satisfiable(lkb.kb):
        return WeakVerdict(Status.INSEPARABLE,
                           note="the KB is unsatisfiable, so it entails every concept at every negative")
    return None


def enumerate_separators(lkb: LabeledKB, max_size: int, helpers: int = 0,
                         projective: bool = False, seed: int = 0,
                         search: SeparatorSearch | None = None) -> WeakVerdict:
    """First separator in canonical order up to ``max_size``, or ``UNKNOWN``."""
    if max_size < 1:
        raise ValueError("max_size must be positive")
    if helpers and not projective:
        raise ValueError("helper symbols are only allowed in projective mode")
    names = helper_names(lkb, helpers)
    search = search or SeparatorSearch(lkb, seed=seed)
    found, report = search.search(lkb.sigma_concepts, lkb.sigma_roles, max_size, tuple(names))
    budget = {"enumeration": report.to_json()}
    if found is None:
        return WeakVerdict(Status.UNKNOWN, budget=budget)
    used = tuple(h for h in names if h in signature(found))
    if not check_separator(lkb, found, projective):
        raise AssertionError(f"separator {found} failed re-verification")
    cert = Separator(found, used)
    return WeakVerdict(Status.SEPARABLE, {b: cert for b in lkb.negatives}, budget)


# -- forest model witnesses ------------------------------------------------------------

def _witnessed(table: TypeTable, types: dict, adj: dict, d, role: Role, arg: Concept) -> bool:
    fill = table.holds(arg)
    return any(fill[types[e]] for e in adj.get((d, role), ()))


def _add_edge(adj: dict, role: Role, d, e):
    adj.setdefault((d, role), []).append(e)
    adj.setdefault((e, role.inverse()), []).append(d)


def _child_options(table: TypeTable, t: int, role: Role, arg: Concept) -> list[int]:
    ok = np.flatnonzero(table.compat_matrix(role)[t] & table.holds(arg))
    return sorted((int(i) for i in ok), key=lambda i: (len(table.obligations(i)), i))


def forest_models(kb: KnowledgeBase, depth: int, outdegree: int,
                  table: TypeTable | None = None) -> Iterator[FiniteStructure]:
    """Finite forest models of ``kb`` built by decorating constants with types
    and unfolding unmet existential obligations into trees.

    Trees have at most ``depth`` levels and every element at most
    ``outdegree`` children; elements on the last level must have no unmet
    obligations.  Simpler children types are tried first.
    """
    table = table or table_for(kb)
    db = kb.database
    if table.n == 0:
        return
    doms = initial_domains(table, db)
    for assignment in solve_assignments(table, db, doms):
        types = dict(assignment)
        adj: dict = {}
        edges: list = []
        for r, x, y in db.binary():
            _add_edge(adj, Role(r), x, y)
            edges.append((r, x, y))
        level = {c: 0 for c in db.constants}
        yield from _unfold(table, db, types, adj, edges, level, list(db.constants), depth, outdegree)


def _unfold(table, db, types, adj, edges, level, pending, depth, outdegree):
    if not pending:
        unary: dict = {}
        for e, t in types.items():
            for name in table.atoms_of(t):
                unary.setdefault(name, set()).add(e)
        binary: dict = {}
        for r, x, y in edges:
            binary.setdefault(r, set()).add((x, y))
        yield FiniteStructure(frozenset(types), unary, binary, {c: c for c in db.constants})
        return
    d, rest = pending[0], pending[1:]
    unmet = [(r, c) for r, c in table.obligations(types[d]) if not _witnessed(table, types, adj, d, r, c)]
    if not unmet:
        yield from _unfold(table, db, types, adj, edges, level, rest, depth, outdegree)
        return
    if level[d] >= depth:
        return

    def choose(i, children):
        if i == len(unmet):
            yield from _unfold(table, db, types, adj, edges, level, rest + children, depth, outdegree)
            return
        role, arg = unmet[i]
        if _witnessed(table, types, adj, d, role, arg):
            yield from choose(i + 1, children)
            return
        if len(children) >= outdegree:
            return
        for t in _child_options(table, types[d], role, arg):
            k = len(types)
            while f"_{k}" in types:
                k += 1
            e = f"_{k}"
            types[e] = t
            level[e] = level[d] + 1
            _add_edge(adj, role, d, e)
            edge = (role.name, e, d) if role.inverted else (role.name, d, e)
            edges.append(edge)
            yield from choose(i + 1, children + [e])
            edges.pop()
            adj[(d, role)].pop()
            adj[(e, role.inverse())].pop()
            del types[e], level[e]

    yield from choose(0, [])


def verify_model_witness(lkb: LabeledKB, s: FiniteStructure, b: str) -> bool:
    kb = lkb.kb
    if not (is_model(s, kb) and is_forest_model(s, kb)):
        return False
    return not any(hom_c_check(kb, a, s, s.const_map[b], lkb.sigma) for a in lkb.positives)


def witness_model_search(lkb: LabeledKB, depth: int, outdegree: int,
                         max_candidates: int = 200) -> WeakVerdict:
    """Look for a forest model certifying projective separability of one negative."""
    if len(lkb.negatives) != 1:
        raise ValueError("witness search handles exactly one negative example")
    (b,) = lkb.negatives
    tried = 0
    for s in forest_models(lkb.kb, depth, outdegree):
        if tried >= max_candidates:
            break
        tried += 1
        if verify_model_witness(lkb, s, b):
            return WeakVerdict(Status.SEPARABLE, {b: ModelWitness(s, b)},
                               {"witness": {"depth": depth, "outdegree": outdegree, "candidates": tried}})
    return WeakVerdict(Status.UNKNOWN,
                       budget={"witness": {"depth": depth, "outdegree": outdegree, "candidates": tried}})


# -- orchestration -----------------------------------------------------------------

def weak_separable(lkb: LabeledKB, budget: WeakBudget = WeakBudget(), projective: bool = False,
                   seed: int = 0) -> WeakVerdict:
    """Per-negative search; the per-negative separators combine by conjunction."""
    degenerate = _degenerate(lkb)
    if degenerate is not None:
        return degenerate
    helpers = budget.helpers if projective else 0
    search = SeparatorSearch(lkb, seed=seed)
    certs: dict[str, Certificate] = {}
    report: dict = {}
    status = Status.SEPARABLE
    for b in lkb.negatives:
        sub = lkb.with_examples(lkb.positives, [b])
        search.lkb = sub
        v = enumerate_separators(sub, budget.max_size, helpers, projective, seed, search)
        if v.status is not Status.SEPARABLE and projective:
            w = witness_model_search(sub, budget.depth, budget.outdegree, budget.max_candidates)
            v.budget.update(w.budget)
            if w.status is Status.SEPARABLE:
                v = WeakVerdict(Status.SEPARABLE, w.certificates, v.budget)
        report[b] = v.budget
        if v.status is Status.SEPARABLE:
            certs[b] = v.certificates[b]
        else:
            status = Status.UNKNOWN
    return WeakVerdict(status, certs if status is Status.SEPARABLE else {}, {"perNegative": report})
