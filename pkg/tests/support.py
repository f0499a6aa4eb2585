"""Random instance generators shared by the property tests and oracle suites."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

import numpy as np

from alcisep.concepts import TOP, Atom, Concept, Role, concept_names, conj, exists, neg, role_names
from alcisep.kb import CI, Database, KnowledgeBase, LabeledKB
from alcisep.structures import FiniteStructure, extension, is_model

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "alcisep" / "fixtures"


def random_concept(rng: random.Random, names, roles, depth: int) -> Concept:
    roles = list(roles)
    if depth == 0 or rng.random() < 0.25:
        return rng.choice([TOP, *[Atom(n) for n in names]])
    k = rng.randrange(3 if roles else 2)
    if k == 0:
        return neg(random_concept(rng, names, roles, depth - 1))
    if k == 1:
        return conj(random_concept(rng, names, roles, depth - 1),
                    random_concept(rng, names, roles, depth - 1))
    r = rng.choice(roles)
    role = Role(r, rng.random() < 0.4)
    return exists(role, random_concept(rng, names, roles, depth - 1))


def random_structure(rng: random.Random, n: int, names, roles, constants=()) -> FiniteStructure:
    dom = list(range(n))
    unary = {a: {d for d in dom if rng.random() < 0.4} for a in names}
    binary = {r: {(d, e) for d in dom for e in dom if rng.random() < 0.3} for r in roles}
    cmap = {c: rng.choice(dom) for c in constants}
    return FiniteStructure(frozenset(dom), unary, binary, cmap)


def random_database(rng: random.Random, constants, names, roles, density=0.3) -> Database:
    atoms = set()
    for c in constants:
        for a in names:
            if rng.random() < density:
                atoms.add((a, (c,)))
    for c, d in itertools.product(constants, repeat=2):
        for r in roles:
            if rng.random() < density / 2:
                atoms.add((r, (c, d)))
    # every constant must occur in some atom
    for c in constants:
        if not any(c in args for _, args in atoms):
            atoms.add((rng.choice(list(names)), (c,)))
    return Database.of(atoms)


def random_kb(rng: random.Random, names=("A", "B"), roles=("R",), constants=("a", "b", "c"),
              cis: int = 1, depth: int = 2) -> KnowledgeBase:
    onto = [CI(random_concept(rng, names, roles, 1), random_concept(rng, names, roles, depth))
            for _ in range(cis)]
    return KnowledgeBase.of(onto, random_database(rng, constants, names, roles))


def random_labeled_kb(rng: random.Random, pos_max=1, neg_max=1, **kw) -> LabeledKB:
    kb = random_kb(rng, **kw)
    cons = list(kb.constants)
    rng.shuffle(cons)
    p = rng.randint(1, min(pos_max, len(cons) - 1))
    n = rng.randint(1, min(neg_max, len(cons) - p))
    sig = kb.signature()
    sigma = {s for s in sig if rng.random() < 0.7} or {rng.choice(sorted(sig))}
    return LabeledKB(kb, tuple(sorted(cons[:p])), tuple(sorted(cons[p:p + n])), frozenset(sigma))


def fixture(name: str) -> Path:
    return FIXTURES / name


def all_structures(n: int, names, roles, constants):
    """Every structure over ``n`` elements with every constant map."""
    dom = list(range(n))
    pairs = [(d, e) for d in dom for e in dom]
    names, roles, constants = list(names), list(roles), list(constants)
    for ubits in itertools.product(range(2 ** n), repeat=len(names)):
        unary = {a: {d for d in dom if ubits[i] >> d & 1} for i, a in enumerate(names)}
        for bbits in itertools.product(range(2 ** len(pairs)), repeat=len(roles)):
            binary = {r: {p for k, p in enumerate(pairs) if bbits[i] >> k & 1} for i, r in enumerate(roles)}
            for img in itertools.product(dom, repeat=len(constants)):
                yield FiniteStructure(frozenset(dom), unary, binary, dict(zip(constants, img)))


def brute_model(kb: KnowledgeBase, max_elems: int, require=()):
    """A model of ``kb`` with at most ``max_elems`` elements in which every
    (concept, constant) pair in ``require`` holds, or None."""
    names = sorted(kb.concept_names() | {n for c, _ in require for n in concept_names(c)})
    roles = sorted(kb.role_names() | {r for c, _ in require for r in role_names(c)})
    for n in range(1, max_elems + 1):
        for s in all_structures(n, names, roles, kb.constants):
            if is_model(s, kb) and all(s.const_map[a] in extension(c, s) for c, a in require):
                return s
    return None


def brute_hom(src: Database, a, target: FiniteStructure, elem, sigma):
    """Exhaustive enumeration of all maps cons(src) -> dom(target)."""
    cons = list(src.constants)
    dom = sorted(target.domain, key=repr)
    for img in itertools.product(dom, repeat=len(cons)):
        h = dict(zip(cons, img))
        if h[a] != elem:
            continue
        ok = True
        for p, args in src.atoms:
            if p not in sigma:
                continue
            if len(args) == 1:
                ok = h[args[0]] in target.unary.get(p, ())
            else:
                ok = (h[args[0]], h[args[1]]) in target.binary.get(p, ())
            if not ok:
                break
        if ok:
            return h
    return None


def reference_amalgamable(table, sigma):
    """Plain greatest-fixpoint elimination over all type sets, from the table only."""
    names = [Atom(n) for n in sigma if Atom(n) in table.closure.index]
    obligations = {i: [(c.role, table.holds(c.arg)) for _, c in table.existentials
                       if c.role.name in sigma and table.contains(i, c)] for i in range(table.n)}
    current = {frozenset(s) for k in range(1, table.n + 1)
               for s in itertools.combinations(range(table.n), k)}
    current = {s for s in current
               if all(len({table.contains(i, n) for i in s}) == 1 for n in names)}
    while True:
        keep = set()
        for phi in current:
            members = sorted(phi)
            ok = True
            for i in members:
                for role, fill in obligations[i]:
                    m = table.compat_matrix(role)
                    opts = [np.flatnonzero(m[j] & fill if j == i else m[j]).tolist() for j in members]
                    if not any(frozenset(p) in current for p in itertools.product(*opts)):
                        ok = False
                if not ok:
                    break
            if ok:
                keep.add(phi)
        if keep == current:
            return current
        current = keep
