"""ALCI(Σ)-bisimulations, Σ-homomorphisms and the combined
homomorphism-plus-types check used by the weak separability characterization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .concepts import Atom, roles_of
from .kb import Database, KnowledgeBase, connected_component
from .structures import FiniteStructure
from .typeengine import TypeTable, first_assignment, table_for


def _sigma_parts(s1: FiniteStructure, s2: FiniteStructure, sigma: Iterable[str]):
    sigma = set(sigma)
    names = sorted(sigma & (set(s1.unary) | set(s2.unary)))
    roles = roles_of(sigma & (set(s1.binary) | set(s2.binary)))
    return names, roles


def max_bisimulation(s1: FiniteStructure, s2: FiniteStructure, sigma: Iterable[str]) -> frozenset:
    """Greatest ALCI(Σ)-bisimulation between ``s1`` and ``s2``."""
    names, roles = _sigma_parts(s1, s2, sigma)
    succ1 = {r: s1.successors(r) for r in roles}
    succ2 = {r: s2.successors(r) for r in roles}
    lab1 = {d: frozenset(n for n in names if d in s1.label(n)) for d in s1.domain}
    lab2 = {e: frozenset(n for n in names if e in s2.label(n)) for e in s2.domain}
    rel = {(d, e) for d in s1.domain for e in s2.domain if lab1[d] == lab2[e]}
    changed = True
    while changed:
        changed = False
        for d, e in list(rel):
            ok = True
            for r in roles:
                n1, n2 = succ1[r].get(d, ()), succ2[r].get(e, ())
                if any(not any((d2, e2) in rel for e2 in n2) for d2 in n1) or \
                        any(not any((d2, e2) in rel for d2 in n1) for e2 in n2):
                    ok = False
                    break
            if not ok:
                rel.discard((d, e))
                changed = True
    return frozenset(rel)


def is_bisimulation(rel: Iterable, s1: FiniteStructure, s2: FiniteStructure, sigma: Iterable[str]) -> bool:
    rel = set(rel)
    names, roles = _sigma_parts(s1, s2, sigma)
    for d, e in rel:
        if any((d in s1.label(n)) != (e in s2.label(n)) for n in names):
            return False
        for r in roles:
            n1, n2 = s1.successors(r).get(d, ()), s2.successors(r).get(e, ())
            if any(not any((d2, e2) in rel for e2 in n2) for d2 in n1):
                return False
            if any(not any((d2, e2) in rel for d2 in n1) for e2 in n2):
                return False
    return True


def bisimilar(s1: FiniteStructure, d, s2: FiniteStructure, e, sigma: Iterable[str]) -> bool:
    return (d, e) in max_bisimulation(s1, s2, sigma)


def functional_bisimulation(s1: FiniteStructure, d, s2: FiniteStructure, e,
                            sigma: Iterable[str]) -> dict | None:
    """A bisimulation containing ``(d, e)`` that is a function on ``s1``'s side.

    Forth forces the whole Σ-connected part of ``d`` into the domain, and the
    map must send each Σ-role neighbourhood of ``x`` onto that of ``f(x)``.
    """
    sigma = set(sigma)
    maxb = max_bisimulation(s1, s2, sigma)
    if (d, e) not in maxb:
        return None
    _, roles = _sigma_parts(s1, s2, sigma)
    succ1 = {r: s1.successors(r) for r in roles}
    succ2 = {r: s2.successors(r) for r in roles}
    comp, frontier = [d], [d]
    seen = {d}
    while frontier:
        x = frontier.pop()
        for r in roles:
            for y in succ1[r].get(x, ()):
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    frontier.append(y)
    cand = {x: {y for (x2, y) in maxb if x2 == x} for x in comp}
    cand[d] = {e}

    def consistent(f, x) -> bool:
        fx = f[x]
        for r in roles:
            nx = succ1[r].get(x, ())
            for y in nx:
                if y in f and f[y] not in succ2[r].get(fx, ()):
                    return False
            if all(y in f for y in nx):
                if {f[y] for y in nx} != set(succ2[r].get(fx, ())):
                    return False
        return True

    def affected(f, x):
        out = [x]
        for r in roles:
            out.extend(y for y in succ1[r].get(x, ()) if y in f)
        return out

    order = comp  # BFS-ish order from d keeps constraints local

    def search(i, f):
        if i == len(order):
            return dict(f)
        x = order[i]
        for y in sorted(cand[x], key=repr):
            f[x] = y
            if all(consistent(f, z) for z in affected(f, x)):
                out = search(i + 1, f)
                if out is not None:
                    return out
            del f[x]
        return None

    return search(0, {})


def functional_bisim_exists(s1, d, s2, e, sigma) -> bool:
    return functional_bisimulation(s1, d, s2, e, sigma) is not None


# -- homomorphisms ---------------------------------------------------------------

def homomorphisms(src: Database, target: FiniteStructure, sigma: Iterable[str],
                  fixed: Mapping[str, object] | None = None,
                  allowed: Mapping[str, set] | None = None) -> Iterator[dict]:
    """All Σ-homomorphisms from the database structure of ``src`` into ``target``."""
    sigma = set(sigma)
    cons = list(src.constants)
    doms = {c: set(target.domain) for c in cons}
    for p, a in src.atoms:
        if p in sigma and len(a) == 1:
            doms[a[0]] &= target.label(p)
    for c, v in (fixed or {}).items():
        doms[c] &= {v}
    for c, vs in (allowed or {}).items():
        if c in doms:
            doms[c] &= set(vs)
    arcs: dict[str, list] = {c: [] for c in cons}
    for p, x, y in src.binary():
        if p in sigma:
            rel = target.binary.get(p, frozenset())
            arcs[x].append((y, rel, False))
            arcs[y].append((x, rel, True))

    def propagate(doms, queue):
        while queue:
            x = queue.pop()
            for y, rel, rev in arcs[x]:
                if rev:
                    sup = {u for (u, v) in rel if v in doms[x]}
                else:
                    sup = {v for (u, v) in rel if u in doms[x]}
                new = doms[y] & sup
                if not new:
                    return False
                if new != doms[y]:
                    doms[y] = new
                    queue.append(y)
        return True

    if any(not d for d in doms.values()) or not propagate(doms, list(cons)):
        return

    def search(doms):
        free = [c for c in cons if len(doms[c]) > 1]
        if not free:
            yield {c: next(iter(doms[c])) for c in cons}
            return
        x = min(free, key=lambda c: (len(doms[c]), cons.index(c)))
        for v in sorted(doms[x], key=repr):
            new = {c: set(s) for c, s in doms.items()}
            new[x] = {v}
            if propagate(new, [x]):
                yield from search(new)

    yield from search(doms)


def sigma_hom_exists(src: Database, a: str, target: FiniteStructure, elem,
                     sigma: Iterable[str]) -> dict | None:
    if a not in src.constants:
        raise KeyError(f"unknown constant {a!r}")
    return next(homomorphisms(src, target, sigma, {a: elem}), None)


# -- types bisimilar to elements --------------------------------------------------------

def bisimilar_type_matrix(table: TypeTable, sigma: Iterable[str], target: FiniteStructure) -> tuple[np.ndarray, list]:
    """Greatest set of pairs (type, element) such that some model of the
    ontology realizes the type at a point Σ-bisimilar to the element.

    Returns the boolean matrix ``P[type, element]`` and the element order.
    Tree-shaped witnesses suffice, so a pair survives when Σ-concept names
    agree, every Σ-role existential of the type is matched by a surviving
    pair across a target edge, and every Σ-role edge of the element is
    matched by a coherent surviving type.  Non-Σ obligations only need
    realizability, which every table type has.
    """
    sigma = set(sigma)
    elems = target.sorted_domain()
    pos = {v: i for i, v in enumerate(elems)}
    n, m = table.n, len(elems)
    P = np.ones((n, m), dtype=bool)
    for name in sorted(sigma):
        if Atom(name) in table.closure.index:
            has = table.holds(Atom(name))
            lab = np.array([v in target.label(name) for v in elems], dtype=bool)
            P &= has[:, None] == lab[None, :]
    roles = roles_of(sigma)
    adj = {}
    for r in roles:
        a = np.zeros((m, m), dtype=np.int64)
        for d, e in target.edges(r):
            a[pos[d], pos[e]] = 1
        adj[r] = a
    mats = {r: table.compat_matrix(r).astype(np.int64) for r in roles}
    forth = [(table._bits(k), table.holds(c.arg), c.role) for k, c in table.existentials
             if c.role.name in sigma]
    while True:
        Pi = P.astype(np.int64)
        bad = np.zeros_like(P)
        for r in roles:
            q = (mats[r] @ Pi) > 0
            bad |= ((~q).astype(np.int64) @ adj[r].T) > 0
        for ex, fill, r in forth:
            qk = (mats[r] @ (Pi * fill[:, None])) > 0
            ok = (qk.astype(np.int64) @ adj[r].T) > 0
            bad |= ex[:, None] & ~ok
        new = P & ~bad
        if (new == P).all():
            return P, elems
        P = new


def realizable_bisimilar(ontology, sigma: Iterable[str], t: Iterable, target: FiniteStructure, v) -> bool:
    """Is the type ``t`` realized in a model of ``ontology`` at a point
    Σ-bisimilar to ``target, v``?"""
    from .typeengine import type_table
    t = list(t)
    table = type_table(frozenset(ontology), frozenset(t))
    P, elems = bisimilar_type_matrix(table, sigma, target)
    return bool((P[:, elems.index(v)] & table.matching(t)).any())


@dataclass(frozen=True)
class HomTypesWitness:
    hom: dict
    types: dict  # constant -> type index


def hom_c_witness(kb: KnowledgeBase, a: str, target: FiniteStructure, elem,
                  sigma: Iterable[str], table: TypeTable | None = None) -> HomTypesWitness | None:
    """Witness for ``D_con(a), a →Σc target, elem``: a Σ-homomorphism of a's
    component plus types for its constants that are realizable at points
    bisimilar to their images and jointly satisfiable with the database."""
    sigma = set(sigma)
    table = table or table_for(kb)
    comp = connected_component(kb.database, a)
    P, elems = bisimilar_type_matrix(table, sigma, target)
    col = {v: i for i, v in enumerate(elems)}
    allowed = {}
    for c in comp.constants:
        lab = np.ones(table.n, dtype=bool)
        for name in kb.database.labels(c):
            lab &= table.holds(Atom(name))
        allowed[c] = {v for v in elems if (P[:, col[v]] & lab).any()}
    for h in homomorphisms(comp, target, sigma, {a: elem}, allowed):
        constraints = {c: P[:, col[h[c]]] for c in comp.constants}
        types = first_assignment(table, kb.database, constraints)
        if types is not None:
            return HomTypesWitness(h, {c: types[c] for c in comp.constants})
    return None


def hom_c_check(kb: KnowledgeBase, a: str, target: FiniteStructure, elem, sigma: Iterable[str]) -> bool:
    return hom_c_witness(kb, a, target, elem, sigma) is not None
