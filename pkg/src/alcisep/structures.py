"""Finite relational structures and the semantics of ALCI concepts over them."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .concepts import TOP_NAME, And, Atom, Concept, Exists, Not, Role
from .kb import Database, KnowledgeBase

Element = Hashable


@dataclass(frozen=True)
class FiniteStructure:
    """Domain, unary and binary relations, and a (not necessarily injective)
    interpretation of constants."""

    domain: frozenset
    unary: Mapping[str, frozenset] = field(default_factory=dict)
    binary: Mapping[str, frozenset] = field(default_factory=dict)
    const_map: Mapping[str, Element] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "domain", frozenset(self.domain))
        object.__setattr__(self, "unary", {k: frozenset(v) for k, v in self.unary.items()})
        object.__setattr__(self, "binary",
                           {k: frozenset(tuple(p) for p in v) for k, v in self.binary.items()})
        object.__setattr__(self, "const_map", dict(self.const_map))
        for k, v in self.unary.items():
            if not v <= self.domain:
                raise ValueError(f"{k}: extension leaves the domain")
        for k, v in self.binary.items():
            if any(d not in self.domain or e not in self.domain for d, e in v):
                raise ValueError(f"{k}: extension leaves the domain")
        for c, d in self.const_map.items():
            if d not in self.domain:
                raise ValueError(f"constant {c} is mapped outside the domain")

    @classmethod
    def from_database(cls, db: Database) -> "FiniteStructure":
        unary: dict = defaultdict(set)
        binary: dict = defaultdict(set)
        for p, a in db.atoms:
            (unary if len(a) == 1 else binary)[p].add(a if len(a) == 2 else a[0])
        return cls(frozenset(db.constants), unary, binary, {c: c for c in db.constants})

    def label(self, name: str) -> frozenset:
        if name == TOP_NAME:
            return self.domain
        return self.unary.get(name, frozenset())

    def edges(self, role: Role) -> frozenset:
        rel = self.binary.get(role.name, frozenset())
        if role.inverted:
            return frozenset((e, d) for d, e in rel)
        return rel

    def successors(self, role: Role) -> dict:
        out: dict = defaultdict(set)
        for d, e in self.edges(role):
            out[d].add(e)
        return out

    def labels_of(self, d: Element) -> set[str]:
        return {k for k, v in self.unary.items() if d in v}

    def sorted_domain(self) -> list:
        return sorted(self.domain, key=repr)

    def to_json(self) -> dict:
        names = {d: str(d) for d in self.domain}
        return {
            "domain": sorted(names.values()),
            "unary": {k: sorted(names[d] for d in v) for k, v in sorted(self.unary.items()) if v},
            "binary": {k: sorted([names[d], names[e]] for d, e in v)
                       for k, v in sorted(self.binary.items()) if v},
            "constants": {c: names[d] for c, d in sorted(self.const_map.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteStructure":
        return cls(frozenset(data["domain"]),
                   {k: frozenset(v) for k, v in data.get("unary", {}).items()},
                   {k: frozenset(tuple(p) for p in v) for k, v in data.get("binary", {}).items()},
                   dict(data.get("constants", {})))


def extension(c: Concept, s: FiniteStructure, _memo: dict | None = None) -> frozenset:
    """Exact extension of ``c`` in ``s`` by structural recursion."""
    memo = {} if _memo is None else _memo
    if c in memo:
        return memo[c]
    if isinstance(c, Atom):
        out = s.label(c.name)
    elif isinstance(c, Not):
        out = s.domain - extension(c.arg, s, memo)
    elif isinstance(c, And):
        out = extension(c.left, s, memo) & extension(c.right, s, memo)
    elif isinstance(c, Exists):
        target = extension(c.arg, s, memo)
        out = frozenset(d for d, e in s.edges(c.role) if e in target)
    else:
        raise TypeError(f"not a concept: {c!r}")
    memo[c] = out
    return out


def satisfies_database(s: FiniteStructure, db: Database) -> bool:
    for p, a in db.atoms:
        if any(x not in s.const_map for x in a):
            return False
        img = tuple(s.const_map[x] for x in a)
        if len(a) == 1:
            if img[0] not in s.unary.get(p, ()):
                return False
        elif img not in s.binary.get(p, ()):
            return False
    return True


def is_model(s: FiniteStructure, kb: KnowledgeBase) -> bool:
    if not s.domain or not satisfies_database(s, kb.database):
        return False
    memo: dict = {}
    return all(extension(ci.lhs, s, memo) <= extension(ci.rhs, s, memo) for ci in kb.ontology)


def is_forest_structure(s: FiniteStructure, constants: Iterable[str]) -> bool:
    """Edges not joining two constants must form an undirected forest, without
    self-loops or parallel edges on non-constant elements."""
    named = {s.const_map[c] for c in constants if c in s.const_map}
    seen: set = set()
    parent = {d: d for d in s.domain}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for rel in s.binary.values():
        for d, e in rel:
            if d in named and e in named:
                continue
            if d == e:
                return False
            key = frozenset((d, e))
            if key in seen:
                return False
            seen.add(key)
            rd, re_ = find(d), find(e)
            if rd == re_:
                return False
            parent[rd] = re_
    return True


def is_forest_model(s: FiniteStructure, kb: KnowledgeBase) -> bool:
    return is_model(s, kb) and is_forest_structure(s, kb.constants)


def disjoint_union(*structs: FiniteStructure) -> FiniteStructure:
    """Tag elements with the index of their structure; later constant maps win."""
    dom, unary, binary, cmap = set(), defaultdict(set), defaultdict(set), {}
    for i, s in enumerate(structs):
        dom |= {(i, d) for d in s.domain}
        for k, v in s.unary.items():
            unary[k] |= {(i, d) for d in v}
        for k, v in s.binary.items():
            binary[k] |= {((i, d), (i, e)) for d, e in v}
        cmap.update({c: (i, d) for c, d in s.const_map.items()})
    return FiniteStructure(frozenset(dom), unary, binary, cmap)
