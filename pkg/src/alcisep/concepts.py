"""ALCI concept syntax.

Concepts are stored over four primitive constructors only: ``Atom``, ``Not``,
``And`` and ``Exists``.  The usual sugar (top, bottom, disjunction,
implication, value restriction) is expanded by the smart constructors below,
so two concepts that differ only in how they were written compare equal.

Normal form:

* ``Not(Not(C))`` never occurs;
* conjunctions are flattened, de-duplicated, sorted by :func:`sort_key` and
  stored as a right-nested chain of binary ``And`` nodes;
* the top concept is the reserved atom ``⊤`` and bottom is ``Not(⊤)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union

TOP_NAME = "⊤"


@dataclass(frozen=True)
class Role:
    name: str
    inverted: bool = False

    def inverse(self) -> "Role":
        return Role(self.name, not self.inverted)

    def __str__(self) -> str:
        return f"inv({self.name})" if self.inverted else self.name


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return format_concept(self)


@dataclass(frozen=True)
class Not:
    arg: "Concept"

    def __str__(self) -> str:
        return format_concept(self)


@dataclass(frozen=True)
class And:
    left: "Concept"
    right: "Concept"

    def __str__(self) -> str:
        return format_concept(self)


@dataclass(frozen=True)
class Exists:
    role: Role
    arg: "Concept"

    def __str__(self) -> str:
        return format_concept(self)


Concept = Union[Atom, Not, And, Exists]

TOP: Concept = Atom(TOP_NAME)
BOT: Concept = Not(TOP)


# -- smart constructors ----------------------------------------------------

def atom(name: str) -> Concept:
    return Atom(name)


def neg(c: Concept) -> Concept:
    if isinstance(c, Not):
        return c.arg
    return Not(c)


def conjuncts(c: Concept) -> Iterator[Concept]:
    while isinstance(c, And):
        yield c.left
        c = c.right
    yield c


def conj(*cs: Concept) -> Concept:
    """Conjunction in normal form.  ``conj()`` is top."""
    parts = {p for c in cs for p in conjuncts(c)}
    if not parts:
        return TOP
    ordered = sorted(parts, key=sort_key)
    out = ordered[-1]
    for p in reversed(ordered[:-1]):
        out = And(p, out)
    return out


def disj(*cs: Concept) -> Concept:
    if not cs:
        return BOT
    return neg(conj(*(neg(c) for c in cs)))


def implies(c: Concept, d: Concept) -> Concept:
    return disj(neg(c), d)


def exists(role: Role | str, c: Concept = TOP) -> Concept:
    if isinstance(role, str):
        role = Role(role)
    return Exists(role, c)


def forall(role: Role | str, c: Concept) -> Concept:
    return neg(exists(role, neg(c)))


def normalize(c: Concept) -> Concept:
    """Rebuild ``c`` through the smart constructors."""
    if isinstance(c, Atom):
        return c
    if isinstance(c, Not):
        return neg(normalize(c.arg))
    if isinstance(c, And):
        return conj(normalize(c.left), normalize(c.right))
    return Exists(c.role, normalize(c.arg))


# -- measures --------------------------------------------------------------

@lru_cache(maxsize=None)
def size(c: Concept) -> int:
    """Number of constructors (atoms count one)."""
    if isinstance(c, Atom):
        return 1
    if isinstance(c, Not):
        return 1 + size(c.arg)
    if isinstance(c, And):
        return 1 + size(c.left) + size(c.right)
    return 1 + size(c.arg)


@lru_cache(maxsize=None)
def depth(c: Concept) -> int:
    if isinstance(c, Atom):
        return 0
    if isinstance(c, Not):
        return depth(c.arg)
    if isinstance(c, And):
        return max(depth(c.left), depth(c.right))
    return 1 + depth(c.arg)


@lru_cache(maxsize=None)
def sort_key(c: Concept) -> tuple[int, str]:
    return (size(c), format_concept(c))


def subconcepts(c: Concept) -> Iterator[Concept]:
    yield c
    if isinstance(c, Not):
        yield from subconcepts(c.arg)
    elif isinstance(c, And):
        yield from subconcepts(c.left)
        yield from subconcepts(c.right)
    elif isinstance(c, Exists):
        yield from subconcepts(c.arg)


def concept_names(c: Concept) -> set[str]:
    return {s.name for s in subconcepts(c) if isinstance(s, Atom) and s.name != TOP_NAME}


def role_names(c: Concept) -> set[str]:
    return {s.role.name for s in subconcepts(c) if isinstance(s, Exists)}


def signature(c: Concept) -> set[str]:
    return concept_names(c) | role_names(c)


def relativize(c: Concept, name: str) -> Concept:
    """Replace every ``∃R.D`` by ``∃R.(name ⊓ D')`` recursively."""
    if isinstance(c, Atom):
        return c
    if isinstance(c, Not):
        return neg(relativize(c.arg, name))
    if isinstance(c, And):
        return conj(relativize(c.left, name), relativize(c.right, name))
    return Exists(c.role, conj(Atom(name), relativize(c.arg, name)))


# -- printing --------------------------------------------------------------
# Precedence levels: 0 implies, 1 or, 2 and, 3 unary (not / quantifiers).

def format_concept(c: Concept) -> str:
    return _fmt(c, 0)


def _paren(s: str, level: int, needed: int) -> str:
    return f"({s})" if level > needed else s


def _fmt(c: Concept, level: int) -> str:
    if isinstance(c, Atom):
        return "top" if c.name == TOP_NAME else c.name
    if isinstance(c, And):
        return _paren(" and ".join(_fmt(p, 3) for p in conjuncts(c)), level, 2)
    if isinstance(c, Exists):
        return f"exists {c.role} . {_fmt(c.arg, 3)}"
    inner = c.arg
    if inner == TOP:
        return "bot"
    if isinstance(inner, Exists):
        return f"forall {inner.role} . {_fmt(neg(inner.arg), 3)}"
    if isinstance(inner, And):
        parts = list(conjuncts(inner))
        if len(parts) >= 2:
            return _paren(" or ".join(_fmt(neg(p), 2) for p in parts), level, 1)
    return f"not {_fmt(inner, 3)}"


def pretty(c: Concept) -> str:
    """Unicode DL rendering, for humans only."""
    if isinstance(c, Atom):
        return "⊤" if c.name == TOP_NAME else c.name
    if isinstance(c, Not):
        if c.arg == TOP:
            return "⊥"
        return "¬" + _pretty_unary(c.arg)
    if isinstance(c, And):
        return " ⊓ ".join(_pretty_unary(p) for p in conjuncts(c))
    role = c.role.name + ("⁻" if c.role.inverted else "")
    return f"∃{role}.{_pretty_unary(c.arg)}"


def _pretty_unary(c: Concept) -> str:
    s = pretty(c)
    return f"({s})" if isinstance(c, And) else s


def roles_of(names: Iterable[str]) -> list[Role]:
    """All roles (names and their inverses) over the given role names."""
    out = []
    for n in sorted(names):
        out.append(Role(n))
        out.append(Role(n, True))
    return out
