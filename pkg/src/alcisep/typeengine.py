"""K-types, type elimination and satisfiability for ALCI knowledge bases.

A type is stored as a ``uint64`` bitmask over the *positive* members of the
closure (everything that is not a negation); ``¬C`` belongs to a type exactly
when the bit of ``C`` is clear.  Hintikka consistency for conjunctions is
built in when candidate types are generated, concept inclusions are applied
as a filter, and the standard elimination loop removes types with an
existential obligation that no surviving type can satisfy.  The survivors are
exactly the types realizable in models of the ontology, and two survivors are
R-coherent exactly when no universal restriction (in either direction) is
violated across the edge.

A database is handled as a constraint problem over constants: each constant
gets a surviving type compatible with its unary atoms, and every binary atom
``R(c, d)`` needs R-coherent types.  Anonymous parts of a model can always be
unravelled into trees, so this is exact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .concepts import (TOP_NAME, And, Atom, Concept, Exists, Not, Role, neg, sort_key,
                       subconcepts)
from .kb import CI, Database, KnowledgeBase
from .structures import FiniteStructure

MAX_BASE_VARIABLES = 20
MAX_CLOSURE = 64


class ReasoningLimitError(RuntimeError):
    """The closure is too large for explicit type enumeration."""


@dataclass(frozen=True)
class Closure:
    """Positive members of sub(K); negations are implicit."""

    concepts: tuple[Concept, ...]

    @property
    def index(self) -> dict[Concept, int]:
        return _index(self.concepts)

    def members(self) -> list[Concept]:
        return [m for c in self.concepts for m in (c, neg(c))]

    def __contains__(self, c: Concept) -> bool:
        base = c.arg if isinstance(c, Not) else c
        return base in self.index

    def __len__(self) -> int:
        return len(self.concepts)


@lru_cache(maxsize=None)
def _index(concepts: tuple) -> dict:
    return {c: i for i, c in enumerate(concepts)}


def make_closure(concepts: Iterable[Concept]) -> Closure:
    pos = {s for c in concepts for s in subconcepts(c) if not isinstance(s, Not)}
    return Closure(tuple(sorted(pos, key=sort_key)))


def kb_concepts(kb: KnowledgeBase) -> frozenset[Concept]:
    out = set(kb.ontology_concepts())
    out |= {Atom(n) for n in kb.database.concept_names()}
    return frozenset(out)


def sub_closure(kb: KnowledgeBase, extra: Iterable[Concept] = ()) -> Closure:
    return make_closure(kb_concepts(kb) | set(extra))


class TypeTable:
    """Realizable types over a closure w.r.t. an ontology."""

    def __init__(self, ontology: frozenset[CI], closure: Closure):
        self.ontology = ontology
        self.closure = closure
        if len(closure) > MAX_CLOSURE:
            raise ReasoningLimitError(f"closure has {len(closure)} positive members (> {MAX_CLOSURE})")
        self._build()

    # -- construction ------------------------------------------------------
    def _build(self):
        pos = self.closure.concepts
        idx = self.closure.index
        base = [i for i, c in enumerate(pos)
                if isinstance(c, Exists) or (isinstance(c, Atom) and c.name != TOP_NAME)]
        if len(base) > MAX_BASE_VARIABLES:
            raise ReasoningLimitError(f"{len(base)} independent closure members (> {MAX_BASE_VARIABLES})")
        codes = np.arange(1 << len(base), dtype=np.int64)
        vals: list[np.ndarray | None] = [None] * len(pos)
        for j, i in enumerate(base):
            vals[i] = ((codes >> j) & 1).astype(bool)
        ones = np.ones(len(codes), dtype=bool)

        def ev(c):
            if isinstance(c, Not):
                return ~vals[idx[c.arg]]
            return vals[idx[c]]

        for i, c in enumerate(pos):  # sorted by size: children come first
            if isinstance(c, Atom) and c.name == TOP_NAME:
                vals[i] = ones
            elif isinstance(c, And):
                vals[i] = ev(c.left) & ev(c.right)
        ok = ones.copy()
        for ci in self.ontology:
            ok &= ~ev(ci.lhs) | ev(ci.rhs)
        masks = np.zeros(int(ok.sum()), dtype=np.uint64)
        for i in range(len(pos)):
            masks |= vals[i][ok].astype(np.uint64) << np.uint64(i)
        self._raw_masks = masks
        self.masks = masks
        self._setup_existentials()
        alive = self._eliminate(np.ones(len(masks), dtype=bool))
        self._restrict(alive)

    def _bits(self, i: int) -> np.ndarray:
        return ((self.masks >> np.uint64(i)) & np.uint64(1)).astype(bool)

    def holds(self, c: Concept) -> np.ndarray:
        """Boolean vector: which types contain ``c`` (``c`` or its negation in the closure)."""
        if isinstance(c, Not):
            return ~self.holds(c.arg)
        return self._bits(self.closure.index[c])

    def _setup_existentials(self):
        pos = self.closure.concepts
        self.existentials = [(i, c) for i, c in enumerate(pos) if isinstance(c, Exists)]
        self.role_names = sorted({c.role.name for _, c in self.existentials})

    def _compute_compat(self) -> dict[str, np.ndarray]:
        n = len(self.masks)
        out = {}
        for r in self.role_names:
            bad = np.zeros((n, n), dtype=bool)
            for i, c in self.existentials:
                if c.role.name != r:
                    continue
                ex = self._bits(i)
                fill = self.holds(c.arg)
                if not c.role.inverted:
                    bad |= np.outer(~ex, fill)  # t -r-> t' with C in t' forces ∃r.C in t
                else:
                    bad |= np.outer(fill, ~ex)  # t -r-> t' with C in t forces ∃r⁻.C in t'
            out[r] = ~bad
        return out

    def _eliminate(self, alive: np.ndarray) -> np.ndarray:
        compat = self._compute_compat()
        obligations = []
        for i, c in self.existentials:
            m = compat[c.role.name]
            obligations.append((self._bits(i), self.holds(c.arg), m.T if c.role.inverted else m))
        changed = True
        while changed:
            changed = False
            for ex, fill, m in obligations:
                sel = np.flatnonzero(alive & fill)
                need = alive & ex
                if not need.any():
                    continue
                supported = m[:, sel].any(axis=1) if len(sel) else np.zeros_like(alive)
                kill = need & ~supported
                if kill.any():
                    alive = alive & ~kill
                    changed = True
        return alive

    def _restrict(self, alive: np.ndarray):
        self.masks = self.masks[alive]
        self.n = len(self.masks)
        self.compat = self._compute_compat()
        self._all = np.ones((self.n, self.n), dtype=bool)

    # -- queries -----------------------------------------------------------
    def compat_matrix(self, role: Role) -> np.ndarray:
        """``M[i, j]`` iff type ``j`` may be a ``role``-successor of type ``i``."""
        m = self.compat.get(role.name, self._all)
        return m.T if role.inverted else m

    def coherent(self, i: int, role: Role, j: int) -> bool:
        return bool(self.compat_matrix(role)[i, j])

    def concepts_of(self, i: int) -> frozenset[Concept]:
        m = int(self.masks[i])
        return frozenset(c if (m >> k) & 1 else neg(c) for k, c in enumerate(self.closure.concepts))

    def positive_of(self, i: int) -> list[Concept]:
        m = int(self.masks[i])
        return [c for k, c in enumerate(self.closure.concepts) if (m >> k) & 1]

    def contains(self, i: int, c: Concept) -> bool:
        if isinstance(c, Not):
            return not self.contains(i, c.arg)
        return bool((int(self.masks[i]) >> self.closure.index[c]) & 1)

    def index_of(self, concepts: Iterable[Concept]) -> int | None:
        """Index of the surviving type equal to the given Hintikka set, if any."""
        sel = self.matching(concepts)
        hits = np.flatnonzero(sel)
        return int(hits[0]) if len(hits) == 1 else (None if len(hits) == 0 else -1)

    def matching(self, concepts: Iterable[Concept]) -> np.ndarray:
        sel = np.ones(self.n, dtype=bool)
        for c in concepts:
            sel &= self.holds(c)
        return sel

    def obligations(self, i: int) -> list[tuple[Role, Concept]]:
        m = int(self.masks[i])
        return [(c.role, c.arg) for k, c in self.existentials if (m >> k) & 1]

    def atoms_of(self, i: int) -> set[str]:
        return {c.name for c in self.positive_of(i) if isinstance(c, Atom) and c.name != TOP_NAME}

    def sigma_label(self, i: int, names: Iterable[str]) -> frozenset[str]:
        return frozenset(n for n in names if Atom(n) in self.closure.index and self.contains(i, Atom(n)))

    def describe(self, i: int) -> list[str]:
        from .concepts import format_concept
        return sorted(format_concept(c) for c in self.concepts_of(i))


@lru_cache(maxsize=512)
def type_table(ontology: frozenset[CI], concepts: frozenset[Concept]) -> TypeTable:
    return TypeTable(ontology, make_closure(set(concepts) | {c for ci in ontology for c in (ci.lhs, ci.rhs)}))


def table_for(kb: KnowledgeBase, extra: Iterable[Concept] = ()) -> TypeTable:
    return type_table(kb.ontology, kb_concepts(kb) | frozenset(extra))


# -- constant assignments ----------------------------------------------------

def initial_domains(table: TypeTable, db: Database,
                    constraints: Mapping[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    doms = {}
    for c in db.constants:
        d = np.ones(table.n, dtype=bool)
        for name in db.labels(c):
            d &= table.holds(Atom(name))
        if constraints and c in constraints:
            d &= constraints[c]
        doms[c] = d
    return doms


def solve_assignments(table: TypeTable, db: Database,
                      domains: Mapping[str, np.ndarray],
                      rng: random.Random | None = None) -> Iterator[dict[str, int]]:
    """All assignments of surviving types to ``domains``' constants that respect
    the binary atoms of ``db`` among those constants."""
    cons = list(domains)
    keep = set(cons)
    arcs: dict[str, list[tuple[str, np.ndarray]]] = {c: [] for c in cons}
    for r, x, y in db.binary():
        if x in keep and y in keep:
            m = table.compat_matrix(Role(r))
            arcs[x].append((y, m))
            arcs[y].append((x, m.T))
    doms = {c: domains[c].copy() for c in cons}
    if any(not d.any() for d in doms.values()):
        return
    if not _propagate(doms, arcs, cons):
        return
    yield from _search(doms, arcs, {}, rng)


def _propagate(doms, arcs, queue) -> bool:
    queue = list(queue)
    while queue:
        x = queue.pop()
        dx = doms[x]
        for y, m in arcs[x]:
            support = m[dx].any(axis=0) if dx.any() else np.zeros_like(doms[y])
            new = doms[y] & support
            if not new.any():
                return False
            if (new != doms[y]).any():
                doms[y] = new
                queue.append(y)
    return True


def _search(doms, arcs, assigned, rng):
    free = [c for c in doms if c not in assigned]
    if not free:
        yield dict(assigned)
        return
    x = min(free, key=lambda c: (int(doms[c].sum()), c))
    values = list(np.flatnonzero(doms[x]))
    if rng is not None:
        rng.shuffle(values)
    for v in values:
        new = {c: d.copy() for c, d in doms.items()}
        new[x] = np.zeros_like(new[x])
        new[x][v] = True
        if _propagate(new, arcs, [x]):
            assigned[x] = int(v)
            yield from _search(new, arcs, assigned, rng)
            del assigned[x]


def first_assignment(table: TypeTable, db: Database,
                     constraints: Mapping[str, np.ndarray] | None = None,
                     rng: random.Random | None = None) -> dict[str, int] | None:
    """One consistent assignment for every constant, solving components separately."""
    if table.n == 0:
        return None
    doms = initial_domains(table, db, constraints)
    out: dict[str, int] = {}
    for comp in db.components():
        sol = next(solve_assignments(table, db, {c: doms[c] for c in comp}, rng), None)
        if sol is None:
            return None
        out.update(sol)
    return out


# -- public operations ---------------------------------------------------------

def enumerate_types(kb: KnowledgeBase) -> list[frozenset[Concept]]:
    t = table_for(kb)
    return [t.concepts_of(i) for i in range(t.n)]


def kb_satisfiable(kb: KnowledgeBase) -> bool:
    return first_assignment(table_for(kb), kb.database) is not None


def extended_satisfiable(kb: KnowledgeBase, assertions: Iterable[tuple[Concept, str]]) -> bool:
    """Is ``(O, D ∪ {C(c) | (C, c) ∈ assertions})`` satisfiable?  ``c`` may be fresh."""
    assertions = list(assertions)
    table = table_for(kb, [c for c, _ in assertions])
    if table.n == 0:
        return False
    constraints: dict[str, np.ndarray] = {}
    fresh: dict[str, np.ndarray] = {}
    cons = set(kb.constants)
    for c, a in assertions:
        target = constraints if a in cons else fresh
        target[a] = target.get(a, np.ones(table.n, dtype=bool)) & table.holds(c)
    if any(not d.any() for d in fresh.values()):
        return False
    return first_assignment(table, kb.database, constraints) is not None


def entails_concept(kb: KnowledgeBase, c: Concept, a: str) -> bool:
    if a not in kb.constants:
        raise KeyError(f"unknown constant {a!r}")
    return not extended_satisfiable(kb, [(neg(c), a)])


def realizable(ontology: frozenset[CI], t: Iterable[Concept]) -> bool:
    t = list(t)
    table = type_table(frozenset(ontology), frozenset(t))
    return bool(table.matching(t).any())


def coherent(ontology: frozenset[CI], t1: Iterable[Concept], role: Role, t2: Iterable[Concept]) -> bool:
    t1, t2 = list(t1), list(t2)
    table = type_table(frozenset(ontology), frozenset(t1) | frozenset(t2))
    m = table.compat_matrix(role)
    return bool(m[np.ix_(table.matching(t1), table.matching(t2))].any())


# -- finite models ---------------------------------------------------------------

def build_model(table: TypeTable, db: Database, assignment: Mapping[str, int],
                rng: random.Random | None = None, extra_edges: int = 0,
                roles: Sequence[str] = (), fresh_bias: float = 0.0) -> FiniteStructure:
    """Finite model of ``(O, db)`` from a consistent constant assignment.

    Open existential obligations are closed by reusing an existing element of
    a suitable type whenever one exists, so at most one fresh element per type
    is ever needed (``fresh_bias`` occasionally forces a second copy to vary
    the shape).  Every edge joins coherent types, which makes each element
    satisfy exactly the closure members of its type.
    """
    types: dict = dict(assignment)
    edges: dict[str, set] = {}
    for r, x, y in db.binary():
        edges.setdefault(r, set()).add((x, y))
    counter = 0

    def has_witness(d, role, fill):
        rel = edges.get(role.name, ())
        for x, y in rel:
            e = y if (not role.inverted and x == d) else (x if role.inverted and y == d else None)
            if e is not None and fill[types[e]]:
                return True
        return False

    pending = list(types)
    while pending:
        d = pending.pop(0)
        for role, arg in table.obligations(types[d]):
            fill = table.holds(arg)
            if has_witness(d, role, fill):
                continue
            ok = table.compat_matrix(role)[types[d]] & fill
            reuse = [e for e in types if ok[types[e]]]
            if rng is not None:
                rng.shuffle(reuse)
            copies = {}
            for e in types:
                copies[types[e]] = copies.get(types[e], 0) + 1
            if reuse and not (rng is not None and rng.random() < fresh_bias
                              and copies[types[reuse[0]]] < 2):
                e = reuse[0]
            else:
                choices = list(np.flatnonzero(ok))
                if rng is not None:
                    rng.shuffle(choices)
                counter += 1
                e = f"_{counter}"
                while e in types:
                    counter += 1
                    e = f"_{counter}"
                types[e] = int(choices[0])
                pending.append(e)
            pair = (e, d) if role.inverted else (d, e)
            edges.setdefault(role.name, set()).add(pair)
    if rng is not None and extra_edges:
        elems = sorted(types)
        names = sorted(set(roles) | set(edges))
        for _ in range(extra_edges):
            if not names:
                break
            r = rng.choice(names)
            d, e = rng.choice(elems), rng.choice(elems)
            if table.coherent(types[d], Role(r), types[e]):
                edges.setdefault(r, set()).add((d, e))
    unary: dict[str, set] = {}
    for e, t in types.items():
        for name in table.atoms_of(t):
            unary.setdefault(name, set()).add(e)
    return FiniteStructure(frozenset(types), unary, edges, {c: c for c in db.constants})


def random_models(kb: KnowledgeBase, count: int, seed: int = 0,
                  extra_roles: Sequence[str] = ()) -> list[FiniteStructure]:
    """Diverse small finite models of ``kb`` (empty if ``kb`` is unsatisfiable)."""
    table = table_for(kb)
    rng = random.Random(seed)
    out = []
    roles = sorted(set(kb.role_names()) | set(extra_roles))
    for k in range(count):
        assignment = first_assignment(table, kb.database, rng=rng)
        if assignment is None:
            return []
        out.append(build_model(table, kb.database, assignment, rng=rng,
                               extra_edges=rng.randint(0, 4), roles=roles,
                               fresh_bias=0.3 if k % 2 else 0.0))
    return out


def type_of_element(table: TypeTable, s: FiniteStructure, d) -> int | None:
    """Index of ``tp(s, d)`` restricted to the table's closure."""
    from .structures import extension
    memo: dict = {}
    mask = 0
    for k, c in enumerate(table.closure.concepts):
        if d in extension(c, s, memo):
            mask |= 1 << k
    hits = np.flatnonzero(table.masks == np.uint64(mask))
    return int(hits[0]) if len(hits) else None


def model_with(kb: KnowledgeBase, assertions: Iterable[tuple[Concept, str]],
               rng: random.Random | None = None) -> FiniteStructure | None:
    """A finite model of ``kb`` satisfying the given assertions on database
    constants, or ``None`` if there is none."""
    assertions = list(assertions)
    table = table_for(kb, [c for c, _ in assertions])
    if table.n == 0:
        return None
    constraints: dict[str, np.ndarray] = {}
    for c, a in assertions:
        constraints[a] = constraints.get(a, np.ones(table.n, dtype=bool)) & table.holds(c)
    assignment = first_assignment(table, kb.database, constraints, rng)
    if assignment is None:
        return None
    return build_model(table, kb.database, assignment, rng)


def countermodel(kb: KnowledgeBase, c: Concept, a: str) -> FiniteStructure | None:
    """A finite model of ``kb`` in which ``a`` is not in ``c``."""
    return model_with(kb, [(neg(c), a)])
