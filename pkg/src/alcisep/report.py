"""JSON reports and independent re-checking of their certificates.

Every report embeds the KB text it was computed from, so a certificate can be
re-checked without the original file.
"""

from __future__ import annotations

import json
from typing import Any

from .concepts import format_concept
from .kb import LabeledKB
from .parser import parse_concept, parse_kb
from .structures import FiniteStructure
from .typeengine import table_for

SCHEMA_VERSION = 1


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def base_report(command: str, lkb: LabeledKB, kb_text: str, status: str) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "command": command,
        "status": status,
        "kbText": kb_text,
        "positives": list(lkb.positives),
        "negatives": list(lkb.negatives),
        "signature": sorted(lkb.sigma),
        "certificate": None,
        "budget": {},
        "note": "",
    }


# -- builders -----------------------------------------------------------------

def weak_report(lkb: LabeledKB, kb_text: str, verdict, projective: bool, command: str = "check-weak") -> dict:
    from .weak import ModelWitness, Separator
    rep = base_report(command, lkb, kb_text, verdict.status.value)
    rep["budget"] = verdict.budget
    rep["note"] = verdict.note
    if verdict.certificates:
        per = {}
        for b, cert in sorted(verdict.certificates.items()):
            if isinstance(cert, Separator):
                per[b] = {"separator": format_concept(cert.concept), "helpers": list(cert.helpers)}
            elif isinstance(cert, ModelWitness):
                per[b] = {"model": cert.structure.to_json()}
        combined = verdict.separator
        rep["certificate"] = {
            "kind": "weak",
            "projective": projective,
            "perNegative": per,
            "separator": None if combined is None else format_concept(combined),
        }
    return rep


def strong_report(lkb: LabeledKB, kb_text: str, verdict, command: str = "check-strong") -> dict:
    status = "Separable" if verdict.separable else "Inseparable"
    if verdict.separable and verdict.incomplete:
        status = "Unknown"
    rep = base_report(command, lkb, kb_text, status)
    rep["budget"] = verdict.search
    rep["note"] = verdict.note
    rep["incomplete"] = verdict.incomplete
    if not verdict.separable:
        pairs = []
        for (a, b), psi in sorted(verdict.witnesses.items()):
            work = verdict.kbs[(a, b)]
            b2 = verdict.copy_map.get(b, b) if b in _component(lkb, a) else b
            pairs.append({"positive": a, "negative": b, "negativeUsed": b2,
                          "duplicated": work.database != lkb.kb.database,
                          "psi": psi.to_json(table_for(work))})
        rep["certificate"] = {"kind": "psi", "pairs": pairs, "copyMap": dict(sorted(verdict.copy_map.items()))}
    elif status == "Separable":
        if verdict.separator is not None:
            rep["certificate"] = {"kind": "strong-separator", "separator": format_concept(verdict.separator)}
        else:
            rep["certificate"] = {"kind": "decision"}
    return rep


def _component(lkb: LabeledKB, a: str) -> set[str]:
    from .kb import connected_component
    return set(connected_component(lkb.kb.database, a).constants)


def separator_report(lkb: LabeledKB, kb_text: str, concept, strong: bool, projective: bool,
                     search: dict) -> dict:
    rep = base_report("find-separator", lkb, kb_text, "Unknown" if concept is None else "Separable")
    rep["budget"] = search
    if concept is not None:
        if strong:
            rep["certificate"] = {"kind": "strong-separator", "separator": format_concept(concept)}
        else:
            rep["certificate"] = {"kind": "weak", "projective": projective,
                                  "perNegative": {b: {"separator": format_concept(concept),
                                                      "helpers": sorted(set(search.get("helpers", [])))}
                                                  for b in lkb.negatives},
                                  "separator": format_concept(concept)}
    return rep


def fo_report(lkb: LabeledKB, kb_text: str, results: dict, dialect: str) -> dict:
    statuses = [r.status for r in results.values()]
    if statuses and all(s == "Separable" for s in statuses):
        status = "Separable"
    elif "Inseparable" in statuses:
        status = "Inseparable"
    else:
        status = "Unknown"
    rep = base_report("emit-fo", lkb, kb_text, status)
    rep["certificate"] = {
        "kind": "fo-prover",
        "dialect": dialect,
        "pairs": [{"positive": a, "negative": b, "szs": r.szs, "status": r.status,
                   "diagnostic": r.diagnostic} for (a, b), r in sorted(results.items())],
    }
    return rep


# -- verification --------------------------------------------------------------

class CertificateError(ValueError):
    pass


def verify_report(rep: dict[str, Any], prover: str | None = None, timeout: int = 30) -> tuple[bool, str]:
    """Re-check the certificate of a report.  Returns ``(ok, message)``."""
    status = rep.get("status")
    if status not in ("Separable", "Inseparable", "Unknown"):
        raise CertificateError("report has no valid status")
    lkb = parse_kb(rep["kbText"])
    lkb = LabeledKB(lkb.kb, tuple(rep["positives"]), tuple(rep["negatives"]), frozenset(rep["signature"]))
    cert = rep.get("certificate")
    if status == "Unknown":
        return True, "nothing to verify for an Unknown verdict"
    if cert is None:
        return _verify_degenerate(rep, lkb)
    kind = cert.get("kind")
    if kind == "weak":
        return _verify_weak(lkb, cert, status)
    if kind == "strong-separator":
        from .strong import check_strong_separator
        c = parse_concept(cert["separator"])
        ok = status == "Separable" and check_strong_separator(lkb, c)
        return ok, "strong separator re-checked by entailment"
    if kind == "decision":
        from .strong import strong_separable
        v = strong_separable(lkb)
        return (status == "Separable" and v.separable and not v.incomplete,
                "decision procedure re-run")
    if kind == "psi":
        return _verify_psi(lkb, cert, status)
    if kind == "fo-prover":
        return _verify_fo(lkb, cert, status, prover, timeout)
    raise CertificateError(f"unknown certificate kind {kind!r}")


def _verify_degenerate(rep, lkb) -> tuple[bool, str]:
    from .typeengine import kb_satisfiable
    if rep["status"] != "Inseparable" or rep["command"] not in ("check-weak",):
        return False, "certificate missing"
    if set(lkb.positives) & set(lkb.negatives):
        return True, "an example is both positive and negative"
    if not kb_satisfiable(lkb.kb):
        return True, "the KB is unsatisfiable"
    return False, "no degenerate reason applies"


def _verify_weak(lkb: LabeledKB, cert: dict, status: str) -> tuple[bool, str]:
    from .weak import SignatureError, check_separator, verify_model_witness
    if status != "Separable":
        return False, "weak certificate on a non-separable verdict"
    projective = bool(cert.get("projective"))
    if set(cert["perNegative"]) != set(lkb.negatives):
        return False, "certificate does not cover every negative example"
    for b, item in cert["perNegative"].items():
        sub = lkb.with_examples(lkb.positives, [b])
        if "separator" in item:
            try:
                if not check_separator(sub, parse_concept(item["separator"]), projective):
                    return False, f"separator for {b} fails"
            except SignatureError as e:
                return False, str(e)
        elif "model" in item:
            if not projective:
                return False, "model witnesses only certify projective separability"
            s = FiniteStructure.from_json(item["model"])
            if not verify_model_witness(sub, s, b):
                return False, f"model witness for {b} fails"
        else:
            return False, f"empty certificate for {b}"
    if cert.get("separator"):
        try:
            if not check_separator(lkb, parse_concept(cert["separator"]), projective):
                return False, "combined separator fails"
        except SignatureError as e:
            return False, str(e)
    return True, "all per-negative certificates re-checked"


def _verify_psi(lkb: LabeledKB, cert: dict, status: str) -> tuple[bool, str]:
    from .strong import PsiAssignment, duplicate_database, psi_satisfiable
    if status != "Inseparable":
        return False, "Ψ certificate on a separable verdict"
    if not cert["pairs"]:
        return False, "no Ψ pairs"
    for pair in cert["pairs"]:
        a, b, b2 = pair["positive"], pair["negative"], pair["negativeUsed"]
        if a not in lkb.positives or b not in lkb.negatives:
            return False, "pair does not match the examples"
        kb = lkb.kb
        if pair["duplicated"]:
            db2, copy = duplicate_database(kb.database)
            if copy.get(b) != b2:
                return False, "copy map mismatch"
            kb = kb.with_database(db2)
        elif b2 != b:
            return False, "renamed negative without duplication"
        table = table_for(kb)

        def index(desc):
            i = table.index_of([parse_concept(s) for s in desc])
            if i is None or i < 0:
                raise CertificateError(f"not a type of the KB: {desc}")
            return i

        try:
            types = {c: index(v["type"]) for c, v in pair["psi"].items()}
            phi = {c: frozenset(index(t) for t in v["phi"]) for c, v in pair["psi"].items()}
        except CertificateError as e:
            return False, str(e)
        if not psi_satisfiable(PsiAssignment(types, phi), kb, lkb.sigma, a, b2, table):
            return False, f"Ψ for ({a}, {b}) is not satisfiable"
    return True, "Ψ witnesses re-checked"


def _verify_fo(lkb, cert, status, prover, timeout) -> tuple[bool, str]:
    from .fo import fo_strong_check
    for pair in cert["pairs"]:
        r = fo_strong_check(lkb, pair["positive"], pair["negative"], prover, timeout, cert["dialect"])
        if r.szs != pair["szs"]:
            return False, f"prover now reports {r.szs} instead of {pair['szs']}"
    return True, "prover re-run agrees"
