"""Databases, knowledge bases and labeled separability problems."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .concepts import Concept, concept_names, role_names, subconcepts

GroundAtom = tuple[str, tuple[str, ...]]


@dataclass(frozen=True)
class Database:
    """A finite set of unary and binary ground atoms."""

    atoms: frozenset[GroundAtom]
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        for pred, args in self.atoms:
            if len(args) not in (1, 2):
                raise ValueError(f"{pred}{args}: only unary and binary atoms are allowed")
        occurring = []
        for pred, args in sorted(self.atoms):
            for c in args:
                if c not in occurring:
                    occurring.append(c)
        if self.constants:
            if set(self.constants) != set(occurring):
                raise ValueError("constants must be exactly the constants occurring in atoms")
        else:
            object.__setattr__(self, "constants", tuple(occurring))

    @classmethod
    def of(cls, atoms: Iterable[GroundAtom]) -> "Database":
        atoms = frozenset((p, tuple(a)) for p, a in atoms)
        return cls(atoms)

    def unary(self) -> list[tuple[str, str]]:
        return sorted((p, a[0]) for p, a in self.atoms if len(a) == 1)

    def binary(self) -> list[tuple[str, str, str]]:
        return sorted((p, a[0], a[1]) for p, a in self.atoms if len(a) == 2)

    def concept_names(self) -> set[str]:
        return {p for p, a in self.atoms if len(a) == 1}

    def role_names(self) -> set[str]:
        return {p for p, a in self.atoms if len(a) == 2}

    def labels(self, c: str) -> set[str]:
        return {p for p, a in self.atoms if len(a) == 1 and a[0] == c}

    def neighbours(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {c: set() for c in self.constants}
        for _, (x, y) in ((p, a) for p, a in self.atoms if len(a) == 2):
            adj[x].add(y)
            adj[y].add(x)
        return adj

    def components(self) -> list[tuple[str, ...]]:
        """Maximal connected components of the Gaifman graph, in constant order."""
        adj = self.neighbours()
        seen: set[str] = set()
        out = []
        for c in self.constants:
            if c in seen:
                continue
            comp, stack = [], [c]
            seen.add(c)
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            order = {k: i for i, k in enumerate(self.constants)}
            out.append(tuple(sorted(comp, key=order.__getitem__)))
        return out

    def restrict(self, constants: Iterable[str]) -> "Database":
        keep = set(constants)
        return Database.of((p, a) for p, a in self.atoms if set(a) <= keep)

    def rename(self, mapping: dict[str, str]) -> "Database":
        return Database.of((p, tuple(mapping.get(c, c) for c in a)) for p, a in self.atoms)

    def __or__(self, other: "Database") -> "Database":
        return Database.of(self.atoms | other.atoms)


def connected_component(db: Database, a: str) -> Database:
    """Sub-database induced by the constants reachable from ``a``."""
    if a not in db.constants:
        raise KeyError(f"unknown constant {a!r}")
    for comp in db.components():
        if a in comp:
            return db.restrict(comp)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class CI:
    """Concept inclusion ``lhs ⊑ rhs``."""

    lhs: Concept
    rhs: Concept

    def __str__(self) -> str:
        return f"{self.lhs} subsumedBy {self.rhs}"


@dataclass(frozen=True)
class KnowledgeBase:
    ontology: frozenset[CI]
    database: Database

    @classmethod
    def of(cls, cis: Iterable[CI | tuple[Concept, Concept]], atoms: Iterable[GroundAtom] | Database) -> "KnowledgeBase":
        onto = frozenset(ci if isinstance(ci, CI) else CI(*ci) for ci in cis)
        db = atoms if isinstance(atoms, Database) else Database.of(atoms)
        return cls(onto, db)

    @property
    def constants(self) -> tuple[str, ...]:
        return self.database.constants

    def ontology_concepts(self) -> list[Concept]:
        return [c for ci in sorted(self.ontology, key=str) for c in (ci.lhs, ci.rhs)]

    def concept_names(self) -> set[str]:
        names = set(self.database.concept_names())
        for c in self.ontology_concepts():
            names |= concept_names(c)
        return names

    def role_names(self) -> set[str]:
        names = set(self.database.role_names())
        for c in self.ontology_concepts():
            names |= role_names(c)
        return names

    def signature(self) -> set[str]:
        return self.concept_names() | self.role_names()

    def with_database(self, db: Database) -> "KnowledgeBase":
        return KnowledgeBase(self.ontology, db)

    def subconcepts(self) -> set[Concept]:
        return {s for c in self.ontology_concepts() for s in subconcepts(c)}


@dataclass(frozen=True)
class LabeledKB:
    kb: KnowledgeBase
    positives: tuple[str, ...]
    negatives: tuple[str, ...]
    sigma: frozenset[str] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.sigma is None:
            object.__setattr__(self, "sigma", frozenset(self.kb.signature()))
        else:
            object.__setattr__(self, "sigma", frozenset(self.sigma))
        object.__setattr__(self, "positives", tuple(self.positives))
        object.__setattr__(self, "negatives", tuple(self.negatives))
        if not self.positives or not self.negatives:
            raise ValueError("positive and negative examples must be non-empty")
        cons = set(self.kb.constants)
        for c in self.positives + self.negatives:
            if c not in cons:
                raise ValueError(f"example {c!r} is not a database constant")
        extra = self.sigma - self.kb.signature()
        if extra:
            raise ValueError(f"signature symbols not in sig(K): {sorted(extra)}")

    @property
    def sigma_concepts(self) -> set[str]:
        return set(self.sigma) & self.kb.concept_names()

    @property
    def sigma_roles(self) -> set[str]:
        return set(self.sigma) & self.kb.role_names()

    def with_sigma(self, sigma: Iterable[str]) -> "LabeledKB":
        return LabeledKB(self.kb, self.positives, self.negatives, frozenset(sigma))

    def with_examples(self, positives, negatives) -> "LabeledKB":
        return LabeledKB(self.kb, tuple(positives), tuple(negatives), self.sigma)


def arity_table(kb: KnowledgeBase) -> dict[str, set[int]]:
    table: dict[str, set[int]] = defaultdict(set)
    for name in kb.concept_names():
        table[name].add(1)
    for name in kb.role_names():
        table[name].add(2)
    return table
