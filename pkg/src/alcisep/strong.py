"""Exact decision of strong ALCI(Σ)-separability.

A labeled KB ``(K, {a}, {b})`` is strongly separable iff no model of K (or of
K with a renamed copy of the database, when ``a`` and ``b`` share a
component) makes ``a`` and ``b`` Σ-bisimilar.  Such a model exists iff some
assignment Ψ of a type ``t_c`` and a type set ``Φ_c`` to every constant is
K,a,b-satisfiable, which is checked against the (O,Σ)-amalgamable sets of
types.

Conditions used for Ψ (``t_c ∈ Φ_c`` always):

1. the ``t_c`` are jointly realizable in a model of K;
2. every ``Φ_c`` is amalgamable;
3. ``Φ_a ∪ Φ_b`` is amalgamable, with ``t_b ∈ Φ_a`` and ``t_a ∈ Φ_b``;
4. for every database atom ``R(d, e)`` with ``R ∈ Σ``, each type in ``Φ_d``
   has an R-coherent partner in ``Φ_e``, and each type in ``Φ_e`` has an
   R⁻-coherent partner in ``Φ_d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .concepts import TOP, Atom, Concept, Role, neg, roles_of, signature
from .enumeration import SearchReport, SeparatorSearch
from .kb import Database, KnowledgeBase, LabeledKB, connected_component
from .typeengine import (TypeTable, entails_concept, first_assignment, initial_domains,
                         kb_satisfiable, solve_assignments, table_for)

TypeSet = frozenset  # of type indices into a TypeTable


class Amalgamator:
    """Lazily decides (O,Σ)-amalgamability of type sets for one type table.

    A set is explored together with everything its successor conditions can
    reach, then decided by a greatest-fixpoint pass over that finite family.
    Amalgamable sets are closed under subsets, so a set passes the successor
    condition as soon as some inclusion-minimal hitting set of the
    per-member successor candidates is amalgamable.
    """

    def __init__(self, table: TypeTable, sigma: Iterable[str]):
        self.table = table
        sigma = set(sigma)
        names = [n for n in sorted(sigma) if Atom(n) in table.closure.index]
        self.labels = [frozenset(n for n in names if table.contains(i, Atom(n))) for i in range(table.n)]
        self.roles = [r for r in roles_of(sigma & set(table.role_names))]
        self.succ = {r: table.compat_matrix(r) for r in self.roles}
        self.obligations = []
        for i in range(table.n):
            obl = []
            for k, c in table.existentials:
                if c.role in self.succ and (int(table.masks[i]) >> k) & 1:
                    obl.append((c.role, table.holds(c.arg)))
            self.obligations.append(obl)
        self.memo: dict[TypeSet, bool] = {}
        self.explored = 0

    def agree(self, phi: TypeSet) -> bool:
        return len({self.labels[i] for i in phi}) <= 1

    def alternatives(self, phi: TypeSet) -> list[list[TypeSet]] | None:
        """Per Σ-existential of a member: the minimal successor sets that
        would discharge it; ``None`` if one has no option at all."""
        members = sorted(phi)
        out, seen = [], set()
        for i in members:
            for role, fill in self.obligations[i]:
                m = self.succ[role]
                clauses = tuple(frozenset(np.flatnonzero(m[j] & fill if j == i else m[j]).tolist())
                                for j in members)
                if clauses in seen:
                    continue
                seen.add(clauses)
                hits = minimal_hitting_sets(clauses)
                if not hits:
                    return None
                out.append(hits)
        return out

    def __call__(self, phi: Iterable[int]) -> bool:
        phi = frozenset(int(i) for i in phi)
        if not phi:
            return True
        known = self._known(phi)
        if known is not None:
            return known
        graph: dict[TypeSet, list | None] = {}
        stack = [phi]
        while stack:
            x = stack.pop()
            if x in graph or self._known(x) is not None:
                continue
            alts = self.alternatives(x) if self.agree(x) else None
            graph[x] = alts
            self.explored += 1
            if alts:
                for group in alts:
                    stack.extend(y for y in group if y not in graph)
        valid = {x: alts is not None for x, alts in graph.items()}

        def ok(y):
            k = self._known(y)
            return valid[y] if k is None else k

        changed = True
        while changed:
            changed = False
            for x, alts in graph.items():
                if valid[x] and any(not any(ok(y) for y in group) for group in alts):
                    valid[x] = False
                    changed = True
        self.memo.update(valid)
        return valid[phi]

    def _known(self, phi: TypeSet) -> bool | None:
        if len(phi) == 1:
            return True  # a realizable type is bisimilar to itself
        return self.memo.get(phi)


def minimal_hitting_sets(clauses: tuple[frozenset, ...]) -> list[TypeSet]:
    """Inclusion-minimal sets meeting every clause, in a deterministic order."""
    if any(not c for c in clauses):
        return []
    found: set[TypeSet] = set()

    def grow(chosen: frozenset):
        open_ = [c for c in clauses if not (c & chosen)]
        if not open_:
            if all(any(not (c & (chosen - {x})) for c in clauses) for x in chosen):
                found.add(chosen)
            return
        for x in sorted(min(open_, key=len)):
            grow(chosen | {x})

    grow(frozenset())
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def eager_amalgamable_sets(table: TypeTable, sigma: Iterable[str]) -> set[TypeSet]:
    """Reference elimination over all nonempty type sets; tiny tables only."""
    am = Amalgamator(table, sigma)
    universe = range(table.n)
    current = {frozenset(s) for k in range(1, table.n + 1) for s in itertools.combinations(universe, k)}
    while True:
        keep = set()
        for phi in current:
            if not am.agree(phi):
                continue
            members = sorted(phi)
            good = True
            for i in members:
                for role, fill in am.obligations[i]:
                    m = am.succ[role]
                    options = [np.flatnonzero(m[j] & fill if j == i else m[j]).tolist() for j in members]
                    if not any(frozenset(v) in current for v in itertools.product(*options)):
                        good = False
                        break
                if not good:
                    break
            if good:
                keep.add(phi)
        if keep == current:
            return current
        current = keep


# -- Ψ ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PsiAssignment:
    types: dict[str, int]
    phi: dict[str, TypeSet]

    def to_json(self, table: TypeTable) -> dict:
        return {c: {"type": table.describe(self.types[c]),
                    "phi": [table.describe(t) for t in sorted(self.phi[c])]}
                for c in sorted(self.types)}


def _sigma_atoms(db: Database, sigma: set[str]) -> list[tuple[Role, str, str]]:
    out = []
    for r, x, y in db.binary():
        if r in sigma:
            out.append((Role(r), x, y))
            out.append((Role(r, True), y, x))
    return out


def psi_satisfiable(psi: PsiAssignment, kb: KnowledgeBase, sigma: Iterable[str], a: str, b: str,
                    table: TypeTable | None = None, amalgamator: Amalgamator | None = None,
                    literal: bool = False) -> bool:
    """Check Ψ against the four conditions.

    ``literal=True`` drops the memberships ``t_c ∈ Φ_c``, ``t_b ∈ Φ_a``,
    ``t_a ∈ Φ_b`` and the inverse-role half of the edge condition; that weaker reading
    is kept only to demonstrate that it accepts assignments it should not.
    """
    sigma = set(sigma)
    table = table or table_for(kb)
    am = amalgamator or Amalgamator(table, sigma)
    db = kb.database
    if set(psi.types) != set(db.constants) or set(psi.phi) != set(db.constants):
        return False
    if not literal:
        if any(psi.types[c] not in psi.phi[c] for c in db.constants):
            return False
        if psi.types[b] not in psi.phi[a] or psi.types[a] not in psi.phi[b]:
            return False
    constraints = {}
    for c, t in psi.types.items():
        v = np.zeros(table.n, dtype=bool)
        v[t] = True
        constraints[c] = v
    if first_assignment(table, db, constraints) is None:
        return False
    if not all(am(psi.phi[c] | {psi.types[c]}) for c in db.constants):
        return False
    if not am(psi.phi[a] | psi.phi[b] | {psi.types[a], psi.types[b]}):
        return False
    for role, d, e in _sigma_atoms(db, sigma):
        if literal and role.inverted:
            continue
        m = table.compat_matrix(role)
        for t in psi.phi[d]:
            if not any(m[t, u] for u in psi.phi[e]):
                return False
    return True


@dataclass
class PsiSearch:
    kb: KnowledgeBase
    sigma: frozenset[str]
    phi_cap: int | None = None
    table: TypeTable = None  # type: ignore[assignment]
    amalgamator: Amalgamator = None  # type: ignore[assignment]
    incomplete: bool = False
    states: int = 0

    def __post_init__(self):
        self.table = self.table or table_for(self.kb)
        self.amalgamator = self.amalgamator or Amalgamator(self.table, self.sigma)

    def witness(self, a: str, b: str) -> PsiAssignment | None:
        """Search Ψ for constants ``a`` and ``b`` in distinct components."""
        db, table = self.kb.database, self.table
        comp_a = connected_component(db, a).constants
        comp_b = connected_component(db, b).constants
        if set(comp_a) & set(comp_b):
            raise ValueError("a and b must lie in distinct connected components")
        focus = list(comp_a) + list(comp_b)
        rest = db.restrict(set(db.constants) - set(focus))
        rest_types = first_assignment(table, rest) if rest.atoms else {}
        if rest_types is None:
            return None
        doms = initial_domains(table, db)
        atoms = [x for x in _sigma_atoms(db, self.sigma) if x[1] in focus]
        for assignment in solve_assignments(table, db, {c: doms[c] for c in focus}):
            ta, tb = assignment[a], assignment[b]
            if not self.amalgamator(frozenset({ta, tb})):
                continue
            phi = {c: frozenset({assignment[c]}) for c in focus}
            phi[a] |= {tb}
            phi[b] |= {ta}
            found = self._dfs(phi, a, b, atoms, set())
            if found is not None:
                types = dict(rest_types)
                types.update(assignment)
                full = {c: frozenset({t}) for c, t in rest_types.items()}
                full.update(found)
                return PsiAssignment(types, full)
        return None

    def _admissible(self, phi, a, b, changed) -> bool:
        am = self.amalgamator
        if self.phi_cap is not None and len(phi[changed]) > self.phi_cap:
            self.incomplete = True
            return False
        if not am(phi[changed]):
            return False
        if changed in (a, b) and not am(phi[a] | phi[b]):
            return False
        return True

    def _dfs(self, phi, a, b, atoms, seen):
        key = tuple(sorted((c, tuple(sorted(s))) for c, s in phi.items()))
        if key in seen:
            return None
        seen.add(key)
        self.states += 1
        if not all(self._admissible(phi, a, b, c) for c in (a, b)):
            return None
        for role, d, e in atoms:
            m = self.table.compat_matrix(role)
            for t in sorted(phi[d]):
                if any(m[t, u] for u in phi[e]):
                    continue
                for u in np.flatnonzero(m[t]).tolist():
                    new = dict(phi)
                    new[e] = phi[e] | {u}
                    if self._admissible(new, a, b, e):
                        out = self._dfs(new, a, b, atoms, seen)
                        if out is not None:
                            return out
                return None
        return phi


def strong_inseparable_witness(kb: KnowledgeBase, sigma: Iterable[str], a: str, b: str,
                               phi_cap: int | None = None) -> PsiAssignment | None:
    return PsiSearch(kb, frozenset(sigma), phi_cap).witness(a, b)


# -- verdicts ---------------------------------------------------------------------

def duplicate_database(db: Database) -> tuple[Database, dict[str, str]]:
    """``D ⊎ D'`` with every constant of the copy renamed by priming it."""
    taken = set(db.constants)
    copy = {}
    for c in db.constants:
        name = c + "'"
        while name in taken:
            name += "'"
        taken.add(name)
        copy[c] = name
    return db | db.rename(copy), copy


@dataclass
class StrongVerdict:
    separable: bool
    witnesses: dict[tuple[str, str], PsiAssignment] = field(default_factory=dict)
    separator: Concept | None = None
    copy_map: dict[str, str] = field(default_factory=dict)
    incomplete: bool = False
    note: str = ""
    search: dict = field(default_factory=dict)
    kbs: dict[tuple[str, str], KnowledgeBase] = field(default_factory=dict)


def strong_separable(lkb: LabeledKB, phi_cap: int | None = None, synthesize: bool = False,
                     max_size: int = 8, seed: int = 0, all_pairs: bool = False) -> StrongVerdict:
    """Decide strong separability; optionally look for a separating concept.

    With ``all_pairs`` every (a, b) pair is examined; otherwise the search stops
    at the first inseparable pair.
    """
    kb, sigma = lkb.kb, frozenset(lkb.sigma)
    if not kb_satisfiable(kb):
        return StrongVerdict(True, separator=TOP, note="the KB is unsatisfiable")
    verdict = StrongVerdict(True)
    table = table_for(kb)
    am = Amalgamator(table, sigma)
    dup = None
    states = 0
    for a in lkb.positives:
        for b in lkb.negatives:
            comp = connected_component(kb.database, a).constants
            if b in comp:
                if dup is None:
                    dup = duplicate_database(kb.database)
                db2, copy = dup
                work, b2 = kb.with_database(db2), copy[b]
                verdict.copy_map = dict(copy)
            else:
                work, b2 = kb, b
            search = PsiSearch(work, sigma, phi_cap, table, am)
            psi = search.witness(a, b2)
            states += search.states
            verdict.incomplete |= search.incomplete
            if psi is not None:
                if not psi_satisfiable(psi, work, sigma, a, b2, table, am):
                    raise AssertionError("Ψ witness failed re-verification")
                verdict.separable = False
                verdict.witnesses[(a, b)] = psi
                verdict.kbs[(a, b)] = work
                if not all_pairs:
                    break
        if not verdict.separable and not all_pairs:
            break
    if verdict.incomplete and verdict.separable:
        verdict.note = "Φ cap reached; separability is not certain"
    verdict.search = {"psiStates": states, "amalgamableSets": am.explored}
    if verdict.separable and synthesize and not verdict.incomplete:
        verdict.separator, report = strong_separator_synthesize(lkb, max_size, seed)
        verdict.search["synthesis"] = report.to_json()
    return verdict


def strong_separator_synthesize(lkb: LabeledKB, max_size: int, seed: int = 0
                                ) -> tuple[Concept | None, SearchReport]:
    search = SeparatorSearch(lkb, strong=True, seed=seed)
    return search.search(lkb.sigma_concepts, lkb.sigma_roles, max_size)


def check_strong_separator(lkb: LabeledKB, c: Concept) -> bool:
    if signature(c) - set(lkb.sigma):
        return False
    kb = lkb.kb
    return (all(entails_concept(kb, c, a) for a in lkb.positives)
            and all(entails_concept(kb, neg(c), b) for b in lkb.negatives))
