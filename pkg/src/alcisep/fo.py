"""First-order implication instances for strong separability, and TPTP output.

For a labeled KB ``(K, {a}, {b})`` and signature Σ, ``φ_{Σ,a}(x)`` is K with
non-Σ symbols tagged ``_a``, constants turned into variables, ``a`` turned
into the free variable ``x`` and the other variables existentially closed.
A strong FO(Σ)-separator exists iff ``φ_{Σ,a}(x) ⊨ ¬φ_{Σ,b}(x)``; that
implication is handed to an external TPTP prover.

The guarded variant adds one fresh atom ``gD_tag`` over all variables so
that the outer existential block is guarded.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Iterable, Union

from .concepts import TOP_NAME, And, Atom, Concept, Exists, Not
from .kb import KnowledgeBase, LabeledKB

PROVER_ENV = "ALCISEP_PROVER"
DEFAULT_PROVER = "z3 -tptp -T:{timeout} {file}"


class DialectError(ValueError):
    """A formula falls outside the requested fragment."""


# -- formulas -----------------------------------------------------------------

@dataclass(frozen=True)
class FAtom:
    pred: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FNot:
    arg: "Formula"


@dataclass(frozen=True)
class FAnd:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class FOr:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class FImplies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class FExists:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class FForall:
    vars: tuple[str, ...]
    body: "Formula"


Formula = Union[FAtom, Eq, FTrue, FNot, FAnd, FOr, FImplies, FExists, FForall]


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, FAtom):
        return set(f.args)
    if isinstance(f, Eq):
        return {f.left, f.right}
    if isinstance(f, FTrue):
        return set()
    if isinstance(f, FNot):
        return free_vars(f.arg)
    if isinstance(f, (FAnd, FOr)):
        return set().union(*(free_vars(p) for p in f.parts))
    if isinstance(f, FImplies):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - set(f.vars)


def predicates(f: Formula) -> dict[str, int]:
    """Relation symbols with their arities."""
    if isinstance(f, FAtom):
        return {f.pred: len(f.args)}
    if isinstance(f, (Eq, FTrue)):
        return {}
    if isinstance(f, FNot):
        return predicates(f.arg)
    if isinstance(f, (FAnd, FOr)):
        out: dict[str, int] = {}
        for p in f.parts:
            out.update(predicates(p))
        return out
    if isinstance(f, FImplies):
        return {**predicates(f.left), **predicates(f.right)}
    return predicates(f.body)


def _guard_ok(guard: Formula, vars_: Iterable[str], rest: Formula) -> bool:
    if not isinstance(guard, (FAtom, Eq)):
        return False
    return set(vars_) | free_vars(rest) <= free_vars(guard)


def is_guarded(f: Formula) -> bool:
    """GF shape: ``∃v(α ∧ ψ)`` and ``∀v(α → ψ)`` with an atomic guard α
    covering the quantified variables and the free variables of ψ."""
    if isinstance(f, (FAtom, Eq, FTrue)):
        return True
    if isinstance(f, FNot):
        return is_guarded(f.arg)
    if isinstance(f, (FAnd, FOr)):
        return all(is_guarded(p) for p in f.parts)
    if isinstance(f, FImplies):
        return is_guarded(f.left) and is_guarded(f.right)
    if isinstance(f, FExists):
        if not isinstance(f.body, FAnd) or not f.body.parts:
            return False
        guard, rest = f.body.parts[0], FAnd(f.body.parts[1:])
        return _guard_ok(guard, f.vars, rest) and is_guarded(rest)
    if not isinstance(f.body, FImplies):
        return False
    return _guard_ok(f.body.left, f.vars, f.body.right) and is_guarded(f.body.right)


# -- translation --------------------------------------------------------------

class _Fresh:
    def __init__(self, prefix: str = "V"):
        self.prefix, self.n = prefix, 0

    def __call__(self) -> str:
        self.n += 1
        return f"{self.prefix}{self.n}"


def concept_to_fo(c: Concept, var: str, rename=lambda s: s, fresh: _Fresh | None = None) -> Formula:
    """Standard translation with ``var`` free; every quantifier is guarded."""
    fresh = fresh or _Fresh()
    if isinstance(c, Atom):
        if c.name == TOP_NAME:
            return FTrue()
        return FAtom(rename(c.name), (var,))
    if isinstance(c, Not):
        return FNot(concept_to_fo(c.arg, var, rename, fresh))
    if isinstance(c, And):
        return FAnd((concept_to_fo(c.left, var, rename, fresh), concept_to_fo(c.right, var, rename, fresh)))
    if isinstance(c, Exists):
        w = fresh()
        args = (w, var) if c.role.inverted else (var, w)
        return FExists((w,), FAnd((FAtom(rename(c.role.name), args),
                                   concept_to_fo(c.arg, w, rename, fresh))))
    raise TypeError(f"not a concept: {c!r}")


def ci_to_fo(lhs: Concept, rhs: Concept, rename=lambda s: s, fresh: _Fresh | None = None) -> Formula:
    fresh = fresh or _Fresh()
    x = fresh()
    return FForall((x,), FImplies(Eq(x, x), FImplies(concept_to_fo(lhs, x, rename, fresh),
                                                   concept_to_fo(rhs, x, rename, fresh))))


_SAFE = re.compile(r"[^A-Za-z0-9_]")


def _sanitize(name: str) -> str:
    return _SAFE.sub(lambda m: "_q" if m.group() == "'" else f"_u{ord(m.group()):x}", name)


def const_var(c: str, tag: str) -> str:
    return f"Z_{_sanitize(c)}_{tag}"


def _renamer(sigma: set[str], tag: str):
    return lambda s: s if s in sigma else f"{s}_{tag}"


def ontology_sentences(kb: KnowledgeBase, sigma: Iterable[str], tag: str) -> list[Formula]:
    rename = _renamer(set(sigma), tag)
    fresh = _Fresh(f"Y{tag}")
    return [ci_to_fo(ci.lhs, ci.rhs, rename, fresh) for ci in sorted(kb.ontology, key=str)]


def _database_part(kb: KnowledgeBase, sigma: set[str], example: str, tag: str, var: str):
    rename = _renamer(sigma, tag)
    vmap = {c: (var if c == example else const_var(c, tag)) for c in kb.constants}
    atoms = [FAtom(rename(p), tuple(vmap[c] for c in args)) for p, args in sorted(kb.database.atoms)]
    zs = tuple(vmap[c] for c in kb.constants if c != example)
    return atoms, zs, vmap


def build_phi(kb: KnowledgeBase, sigma: Iterable[str], example: str, tag: str, var: str = "X") -> Formula:
    """``φ_{Σ,example}(var)``."""
    sigma = set(sigma)
    if example not in kb.constants:
        raise KeyError(f"unknown constant {example!r}")
    atoms, zs, _ = _database_part(kb, sigma, example, tag, var)
    body = FAnd(tuple(ontology_sentences(kb, sigma, tag)) + tuple(atoms))
    return FExists(zs, body) if zs else body


def guard_name(tag: str) -> str:
    return f"gD_{tag}"


def build_phi_guarded(kb: KnowledgeBase, sigma: Iterable[str], example: str, tag: str,
                      var: str = "X", sentences: list[Formula] | None = None) -> Formula:
    """``φ'_{Σ,example}(var)``: as :func:`build_phi` plus the guard atom over
    all variables; ``sentences`` replaces the translated ontology."""
    sigma = set(sigma)
    if example not in kb.constants:
        raise KeyError(f"unknown constant {example!r}")
    onto = ontology_sentences(kb, sigma, tag) if sentences is None else list(sentences)
    bad = [s for s in onto if not is_guarded(s) or free_vars(s)]
    if bad:
        raise DialectError(f"{len(bad)} ontology sentence(s) are not guarded sentences")
    atoms, zs, vmap = _database_part(kb, sigma, example, tag, var)
    guard = FAtom(guard_name(tag), tuple(vmap[c] for c in kb.constants))
    body = FAnd((guard,) + tuple(onto) + tuple(atoms))
    return FExists(zs, body) if zs else body


@dataclass(frozen=True)
class InterpolationInstance:
    left: Formula
    right: Formula
    shared: tuple[str, ...]
    dialect: str = "fo"
    var: str = "X"


def interpolation_instance(lkb: LabeledKB, a: str, b: str, dialect: str = "fo") -> InterpolationInstance:
    if dialect not in ("fo", "gf", "gnf"):
        raise ValueError(f"unknown dialect {dialect!r}")
    kb, sigma = lkb.kb, set(lkb.sigma)
    build = build_phi if dialect == "fo" else build_phi_guarded
    left = build(kb, sigma, a, "a")
    right = FNot(build(kb, sigma, b, "b"))
    shared = set(predicates(left)) & set(predicates(right))
    return InterpolationInstance(left, right, tuple(sorted(shared)), dialect)


# -- TPTP ---------------------------------------------------------------------

def tptp_predicate(name: str) -> str:
    return "p_" + _sanitize(name)


def to_tptp(f: Formula) -> str:
    if isinstance(f, FAtom):
        return f"{tptp_predicate(f.pred)}({','.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, FTrue):
        return "$true"
    if isinstance(f, FNot):
        return f"~ ({to_tptp(f.arg)})"
    if isinstance(f, FAnd):
        if not f.parts:
            return "$true"
        return "(" + " & ".join(to_tptp(p) for p in f.parts) + ")"
    if isinstance(f, FOr):
        if not f.parts:
            return "$false"
        return "(" + " | ".join(to_tptp(p) for p in f.parts) + ")"
    if isinstance(f, FImplies):
        return f"({to_tptp(f.left)} => {to_tptp(f.right)})"
    q = "?" if isinstance(f, FExists) else "!"
    return f"{q} [{','.join(f.vars)}] : {to_tptp(f.body)}"


def emit_tptp(inst: InterpolationInstance, mode: str = "validity", name: str = "separation") -> str:
    """A FOF problem whose conjecture is ``∀x (left → right)``."""
    if mode not in ("validity", "interpolation-comment"):
        raise ValueError(f"unknown mode {mode!r}")
    lines = [f"% strong separability instance, dialect {inst.dialect}"]
    if mode == "interpolation-comment":
        lp, rp = set(predicates(inst.left)), set(predicates(inst.right))
        lines.append(f"% shared: {' '.join(tptp_predicate(p) for p in sorted(lp & rp)) or '(none)'}")
        lines.append(f"% left only: {' '.join(tptp_predicate(p) for p in sorted(lp - rp)) or '(none)'}")
        lines.append(f"% right only: {' '.join(tptp_predicate(p) for p in sorted(rp - lp)) or '(none)'}")
        lines.append(f"% an interpolant over the shared symbols with free variable {inst.var} "
                     "is a strong separator")
    body = to_tptp(FForall((inst.var,), FImplies(inst.left, inst.right)))
    lines.append(f"fof({name}, conjecture, {body}).")
    return "\n".join(lines) + "\n"


# -- prover dispatch -------------------------------------------------------------

_SZS = re.compile(r"SZS status\s+(\w+)")


def parse_szs(output: str) -> str | None:
    m = _SZS.search(output)
    return m.group(1) if m else None


@dataclass(frozen=True)
class ProverResult:
    status: str  # Separable / Inseparable / Unknown
    szs: str | None
    diagnostic: str = ""


def szs_to_status(szs: str | None) -> str:
    if szs == "Theorem":
        return "Separable"
    if szs == "CounterSatisfiable":
        return "Inseparable"
    return "Unknown"


def prover_command() -> str:
    return os.environ.get(PROVER_ENV, DEFAULT_PROVER)


def run_prover(problem: str, command: str | None = None, timeout: int = 30) -> ProverResult:
    template = command or prover_command()
    with tempfile.NamedTemporaryFile("w", suffix=".p", delete=False, encoding="utf-8") as fh:
        fh.write(problem)
        path = fh.name
    try:
        argv = [part.format(file=path, timeout=timeout) for part in shlex.split(template)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout + 5)
        except FileNotFoundError:
            return ProverResult("Unknown", None, f"prover-missing: {argv[0]!r} not found")
        except subprocess.TimeoutExpired:
            return ProverResult("Unknown", "Timeout", "prover timed out")
        szs = parse_szs(proc.stdout + "\n" + proc.stderr)
        diag = ""
        if szs is None:
            diag = f"prover-crash: exit {proc.returncode}, no SZS status"
        return ProverResult(szs_to_status(szs), szs, diag)
    finally:
        os.unlink(path)


def fo_strong_check(lkb: LabeledKB, a: str, b: str, command: str | None = None,
                    timeout: int = 30, dialect: str = "fo") -> ProverResult:
    inst = interpolation_instance(lkb, a, b, dialect)
    return run_prover(emit_tptp(inst), command, timeout)
