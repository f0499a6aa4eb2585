"""Reader and writer for the ``.kb`` text format.

::

    ontology  { A subsumedBy exists R . B and exists R . not B ; }
    database  { A(a); R(b, c); }
    positive  { a }
    negative  { b }
    signature { R }

Concept syntax, loosest to tightest binding: ``implies`` (right associative),
``or``, ``and``, then the unary forms ``not C``, ``exists R . C``,
``forall R . C`` (``R`` may be ``inv(S)``).  Atoms are ``top``, ``bot`` or a
name.  ``#`` and ``%`` start line comments.  Every section is optional except
that a labeled KB needs ``positive`` and ``negative``; a missing ``signature``
means the full signature of the KB.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

from .concepts import (BOT, TOP, Atom, Concept, Role, conj, disj, exists, forall, implies,
                       neg)
from .kb import CI, Database, KnowledgeBase, LabeledKB, arity_table

KEYWORDS = {
    "top", "bot", "not", "and", "or", "implies", "exists", "forall", "inv",
    "subsumedBy", "ontology", "database", "positive", "negative", "signature",
}

_TOKEN = re.compile(r"\s+|[#%][^\n]*|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<punct>[{}();,.])")


class KBSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


class KBSemanticError(ValueError):
    pass


@dataclass
class _Tok:
    kind: str  # "name", "punct", "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise KBSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str) -> KBSyntaxError:
        t = self.cur
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return KBSyntaxError(f"{msg}, found {found}", t.line, t.col)

    def at(self, text: str) -> bool:
        return self.cur.kind != "eof" and self.cur.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def advance(self) -> _Tok:
        t = self.cur
        self.i += 1
        return t

    def name(self, what: str) -> str:
        t = self.cur
        if t.kind != "name" or t.text in KEYWORDS:
            raise self.error(f"expected {what}")
        self.i += 1
        return t.text

    # concepts
    def concept(self) -> Concept:
        left = self.disjunction()
        if self.at("implies"):
            self.advance()
            return implies(left, self.concept())
        return left

    def disjunction(self) -> Concept:
        parts = [self.conjunction()]
        while self.at("or"):
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else disj(*parts)

    def conjunction(self) -> Concept:
        parts = [self.unary()]
        while self.at("and"):
            self.advance()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else conj(*parts)

    def role(self) -> Role:
        if self.at("inv"):
            self.advance()
            self.expect("(")
            r = Role(self.name("role name"), True)
            self.expect(")")
            return r
        return Role(self.name("role name"))

    def unary(self) -> Concept:
        if self.at("not"):
            self.advance()
            return neg(self.unary())
        if self.at("exists") or self.at("forall"):
            quant = self.advance().text
            r = self.role()
            self.expect(".")
            body = self.unary()
            return exists(r, body) if quant == "exists" else forall(r, body)
        if self.at("("):
            self.advance()
            c = self.concept()
            self.expect(")")
            return c
        if self.at("top"):
            self.advance()
            return TOP
        if self.at("bot"):
            self.advance()
            return BOT
        return Atom(self.name("concept"))

    # sections
    def ontology(self) -> list[CI]:
        cis = []
        self.expect("{")
        while not self.at("}"):
            lhs = self.concept()
            self.expect("subsumedBy")
            rhs = self.concept()
            cis.append(CI(lhs, rhs))
            if not self.at("}"):
                self.expect(";")
        self.expect("}")
        return cis

    def database(self) -> tuple[list, list[str]]:
        atoms, order = [], []
        self.expect("{")
        while not self.at("}"):
            pred = self.name("relation symbol")
            self.expect("(")
            args = [self.name("constant")]
            while self.at(","):
                self.advance()
                args.append(self.name("constant"))
            self.expect(")")
            if len(args) > 2:
                raise KBSemanticError(f"{pred}: arity {len(args)} > 2 is not supported")
            atoms.append((pred, tuple(args)))
            order.extend(c for c in args if c not in order)
            if not self.at("}"):
                self.expect(";")
        self.expect("}")
        return atoms, order

    def names(self, what: str) -> list[str]:
        out = []
        self.expect("{")
        while not self.at("}"):
            out.append(self.name(what))
            if self.at(",") or self.at(";"):
                self.advance()
        self.expect("}")
        return out

    def document(self) -> dict:
        doc: dict = {}
        while self.cur.kind != "eof":
            t = self.cur
            if t.text not in ("ontology", "database", "positive", "negative", "signature"):
                raise self.error("expected a section keyword")
            if t.text in doc:
                raise KBSyntaxError(f"duplicate section {t.text!r}", t.line, t.col)
            self.advance()
            if t.text == "ontology":
                doc["ontology"] = self.ontology()
            elif t.text == "database":
                doc["database"] = self.database()
            elif t.text == "signature":
                doc["signature"] = self.names("symbol")
            else:
                doc[t.text] = self.names("constant")
        return doc


def parse_concept(text: str) -> Concept:
    p = _Parser(text)
    c = p.concept()
    if p.cur.kind != "eof":
        raise p.error("unexpected trailing input")
    return c


def parse_kb_document(text: str) -> tuple[KnowledgeBase, dict]:
    doc = _Parser(text).document()
    atoms, order = doc.get("database", ([], []))
    db = Database(frozenset(atoms), tuple(order))
    kb = KnowledgeBase(frozenset(doc.get("ontology", [])), db)
    arities = arity_table(kb)
    clash = sorted(n for n, a in arities.items() if len(a) > 1)
    if clash:
        raise KBSemanticError(f"symbols used both as concept and role names: {clash}")
    return kb, doc


def parse_kb(text: str) -> LabeledKB:
    """Parse a labeled KB document."""
    kb, doc = parse_kb_document(text)
    pos, negs = doc.get("positive", []), doc.get("negative", [])
    if not pos or not negs:
        raise KBSemanticError("positive and negative example sets must be non-empty")
    cons = set(kb.constants)
    for c in pos + negs:
        if c not in cons:
            raise KBSemanticError(f"example {c!r} does not occur in the database")
    sigma = doc.get("signature")
    if sigma is not None:
        extra = set(sigma) - kb.signature()
        if extra:
            raise KBSemanticError(f"signature symbols not in sig(K): {sorted(extra)}")
    if set(pos) & set(negs):
        warnings.warn(f"examples {sorted(set(pos) & set(negs))} are both positive and negative;"
                      " no formula can separate them", stacklevel=2)
    return LabeledKB(kb, tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(negs)),
                     None if sigma is None else frozenset(sigma))


def load_kb(path) -> LabeledKB:
    with open(path, encoding="utf-8") as fh:
        return parse_kb(fh.read())


def format_kb(lkb: LabeledKB) -> str:
    kb = lkb.kb
    lines = ["ontology {"]
    for ci in sorted(kb.ontology, key=str):
        lines.append(f"  {ci} ;")
    lines.append("}")
    lines.append("database {")
    for pred, args in sorted(kb.database.atoms):
        lines.append(f"  {pred}({', '.join(args)});")
    lines.append("}")
    lines.append(f"positive {{ {' '.join(lkb.positives)} }}")
    lines.append(f"negative {{ {' '.join(lkb.negatives)} }}")
    lines.append(f"signature {{ {' '.join(sorted(lkb.sigma))} }}")
    return "\n".join(lines) + "\n"
