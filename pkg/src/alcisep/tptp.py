"""A small validating reader for TPTP FOF problems.

Covers annotated ``fof(name, role, formula).`` lines with the full set of
binary connectives, quantifiers, equality and ``$true``/``$false``.  Besides
syntax it checks that every formula is closed and that each predicate is
used with one arity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

ROLES = {"axiom", "hypothesis", "definition", "assumption", "lemma", "theorem",
         "corollary", "conjecture", "negated_conjecture", "plain", "type", "unknown"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<op><=>|<~>|=>|<=|~\||~&|!=|[=~|&!?:,()\[\].])
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<dollar>\$[a-z]+)
  | (?P<squote>'[^']*')
""", re.VERBOSE)


class TPTPError(ValueError):
    pass


def _tokens(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TPTPError(f"bad character {text[pos]!r} at offset {pos}")
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group()))
        pos = m.end()
    out.append(("eof", ""))
    return out


@dataclass
class Problem:
    formulas: list[tuple[str, str]] = field(default_factory=list)  # (name, role)
    predicates: dict[str, int] = field(default_factory=dict)


class _Reader:
    BINARY = ("<=>", "<~>", "=>", "<=", "~|", "~&")

    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0
        self.problem = Problem()

    def peek(self) -> tuple[str, str]:
        return self.toks[self.i]

    def take(self, text: str | None = None, kind: str | None = None) -> str:
        k, t = self.toks[self.i]
        if (text is not None and t != text) or (kind is not None and k != kind):
            raise TPTPError(f"expected {text or kind}, found {t or 'end of input'!r}")
        self.i += 1
        return t

    def problem_(self) -> Problem:
        while self.peek()[0] != "eof":
            self.take("fof")
            self.take("(")
            name = self.take(kind="lower") if self.peek()[0] == "lower" else self.take(kind="squote")
            self.take(",")
            role = self.take(kind="lower")
            if role not in ROLES:
                raise TPTPError(f"unknown role {role!r}")
            self.take(",")
            self.formula(set())
            self.take(")")
            self.take(".")
            self.problem.formulas.append((name, role))
        return self.problem

    def formula(self, bound: set[str]):
        self.unitary(bound)
        t = self.peek()[1]
        if t in self.BINARY:
            self.take()
            self.unitary(bound)
        elif t in ("&", "|"):
            while self.peek()[1] == t:
                self.take()
                self.unitary(bound)

    def unitary(self, bound: set[str]):
        k, t = self.peek()
        if t in ("!", "?"):
            self.take()
            self.take("[")
            names = [self.take(kind="upper")]
            while self.peek()[1] == ",":
                self.take()
                names.append(self.take(kind="upper"))
            self.take("]")
            self.take(":")
            self.unitary(bound | set(names))
        elif t == "~":
            self.take()
            self.unitary(bound)
        elif t == "(":
            self.take()
            self.formula(bound)
            self.take(")")
        else:
            self.atomic(bound)

    def term(self, bound: set[str]):
        k, t = self.peek()
        if k == "upper":
            if t not in bound:
                raise TPTPError(f"free variable {t}")
            self.take()
        elif k == "lower":
            self.take()
            if self.peek()[1] == "(":
                self.args(bound)
        else:
            raise TPTPError(f"expected a term, found {t!r}")

    def args(self, bound: set[str]) -> int:
        self.take("(")
        n = 1
        self.term(bound)
        while self.peek()[1] == ",":
            self.take()
            self.term(bound)
            n += 1
        self.take(")")
        return n

    def atomic(self, bound: set[str]):
        k, t = self.peek()
        if k == "dollar":
            if t not in ("$true", "$false"):
                raise TPTPError(f"unsupported defined symbol {t}")
            self.take()
            return
        if k == "lower" and self.toks[self.i + 1][1] not in ("=", "!="):
            self.take()
            arity = self.args(bound) if self.peek()[1] == "(" else 0
            seen = self.problem.predicates.setdefault(t, arity)
            if seen != arity:
                raise TPTPError(f"predicate {t} used with arities {seen} and {arity}")
            return
        self.term(bound)
        op = self.take()
        if op not in ("=", "!="):
            raise TPTPError(f"expected an equality, found {op!r}")
        self.term(bound)


def check_fof(text: str) -> Problem:
    """Parse and validate a FOF problem; raises :class:`TPTPError`."""
    return _Reader(text).problem_()
