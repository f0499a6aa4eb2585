import random

import pytest
from hypothesis import given, settings, strategies as st

from alcisep.bisim import functional_bisim_exists
from alcisep.concepts import TOP, conj
from alcisep.kb import connected_component
from alcisep.parser import load_kb, parse_concept, parse_kb
from alcisep.structures import FiniteStructure, extension, is_forest_model, is_model
from alcisep.typeengine import random_models
from alcisep.weak import (ModelWitness, Separator, SignatureError, Status, WeakBudget,
                          check_separator, enumerate_separators, forest_models, verify_model_witness,
                          weak_separable, witness_model_search)
from support import brute_hom, fixture, random_labeled_kb

BRANCH = load_kb(fixture("branching.kb"))
BRANCH_FULL = load_kb(fixture("branching_full.kb"))
CYCLE = load_kb(fixture("cycle_n2.kb"))
CYCLE_SERIAL = load_kb(fixture("cycle_n2_serial.kb"))


def test_check_separator_examples():
    assert not check_separator(BRANCH, parse_concept("exists R . top"))
    assert not check_separator(BRANCH, TOP)
    assert check_separator(CYCLE, parse_concept("not A or exists R . exists R . A"), projective=True)


def test_signature_is_enforced():
    with pytest.raises(SignatureError):
        check_separator(BRANCH, parse_concept("exists R . B"))
    # A is in sig(K) but not in Σ, so it cannot serve as a helper either
    with pytest.raises(SignatureError):
        check_separator(BRANCH, parse_concept("A"), projective=True)


def test_branching_unknown_on_small_budget():
    v = enumerate_separators(BRANCH, 7)
    assert v.status is Status.UNKNOWN
    assert v.budget["enumeration"]["exhaustedSize"] == 7


def test_branching_full_signature():
    v = enumerate_separators(BRANCH_FULL, 6)
    assert v.status is Status.SEPARABLE
    assert v.separator == parse_concept("exists R . B")
    assert check_separator(BRANCH_FULL, parse_concept("exists R . B and exists R . not B"))


def test_cycle_projective_separator():
    v = enumerate_separators(CYCLE, 8, helpers=1, projective=True)
    assert v.status is Status.SEPARABLE
    (cert,) = v.certificates.values()
    assert cert.helpers == ("H1",)
    assert cert.concept == parse_concept("not H1 or exists R . exists R . H1")


def test_cycle_non_projective_size_8_separator():
    c = parse_concept("exists R . exists R . not exists R . exists R . not exists R . top")
    assert check_separator(CYCLE, c)
    # explicit model of K in which b is outside c
    db = CYCLE.kb.database
    extra = {("b1", "y"), ("y", "z"), ("y", "w"), ("w", "v")}
    s = FiniteStructure(set(db.constants) | {"y", "z", "w", "v"}, {},
                        {"R": {args for _, args in db.atoms} | extra},
                        {c_: c_ for c_ in db.constants})
    assert is_model(s, CYCLE.kb) and "b" not in extension(c, s)
    n1 = load_kb(fixture("cycle_n1.kb"))
    assert check_separator(n1, parse_concept("exists R . not exists R . not exists R . top"))


def test_identical_examples():
    with pytest.warns(UserWarning):
        lkb = parse_kb("database { A(a); } positive { a } negative { a }")
    assert enumerate_separators(lkb, 5).status is Status.UNKNOWN
    assert weak_separable(lkb).status is Status.INSEPARABLE


def test_unsatisfiable_kb_is_inseparable():
    lkb = parse_kb("ontology { top subsumedBy bot ; } database { A(a); B(b); } "
                   "positive { a } negative { b }")
    v = weak_separable(lkb)
    assert v.status is Status.INSEPARABLE and "unsatisfiable" in v.note


def test_cycle_model_witness_is_the_database():
    v = witness_model_search(CYCLE, depth=0, outdegree=1)
    assert v.status is Status.SEPARABLE
    w = v.certificates["b"]
    assert isinstance(w, ModelWitness)
    assert w.structure == FiniteStructure.from_database(CYCLE.kb.database)
    cycle = connected_component(CYCLE.kb.database, "a")
    assert brute_hom(cycle, "a", w.structure, "b", {"R"}) is None


def test_cycle_serial_witness_exists():
    v = witness_model_search(CYCLE_SERIAL, depth=2, outdegree=2)
    assert v.status is Status.SEPARABLE
    w = v.certificates["b"].structure
    assert is_model(w, CYCLE_SERIAL.kb) and is_forest_model(w, CYCLE_SERIAL.kb)
    cycle = connected_component(CYCLE_SERIAL.kb.database, "a")
    assert brute_hom(cycle, "a", w, w.const_map["b"], {"R"}) is None


def test_cycle_serial_non_projective_unknown():
    v = weak_separable(CYCLE_SERIAL, WeakBudget(max_size=6, helpers=0))
    assert v.status is Status.UNKNOWN


def test_witness_is_not_functionally_bisimilar_to_models():
    w = witness_model_search(CYCLE, 0, 1).certificates["b"].structure
    for s in random_models(CYCLE.kb, 50, seed=7):
        assert not functional_bisim_exists(s, s.const_map["a"], w, w.const_map["b"], {"R"})


def test_witness_search_needs_single_negative():
    lkb = parse_kb("database { R(a, b); R(b, c); } positive { a } negative { b c }")
    with pytest.raises(ValueError):
        witness_model_search(lkb, 1, 1)


def test_negatives_combine_by_conjunction():
    lkb = parse_kb("ontology { } database { A(a); B(a); A(b); B(c); } "
                   "positive { a } negative { b c }")
    v = weak_separable(lkb, WeakBudget(max_size=4, helpers=0))
    assert v.status is Status.SEPARABLE
    assert v.separator == conj(v.certificates["b"].concept, v.certificates["c"].concept)
    assert check_separator(lkb, v.separator)


def test_forest_models_are_forest_models():
    for kb in (BRANCH.kb, CYCLE_SERIAL.kb):
        for k, s in enumerate(forest_models(kb, 2, 2)):
            assert is_model(s, kb) and is_forest_model(s, kb)
            if k > 20:
                break


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_certificates_are_sound(seed):
    lkb = random_labeled_kb(random.Random(seed), pos_max=2, neg_max=2)
    v = weak_separable(lkb, WeakBudget(max_size=4, helpers=1, depth=1, outdegree=1, max_candidates=20),
                       projective=True)
    if v.status is not Status.SEPARABLE:
        return
    for b, cert in v.certificates.items():
        sub = lkb.with_examples(lkb.positives, [b])
        if isinstance(cert, Separator):
            assert check_separator(sub, cert.concept, projective=True)
        else:
            assert verify_model_witness(sub, cert.structure, b)
            assert is_model(cert.structure, lkb.kb)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_larger_signature_keeps_separability(seed):
    lkb = random_labeled_kb(random.Random(seed))
    if enumerate_separators(lkb, 4).status is Status.SEPARABLE:
        bigger = lkb.with_sigma(lkb.kb.signature())
        assert enumerate_separators(bigger, 4).status is Status.SEPARABLE


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_forest_model_property(seed):
    lkb = random_labeled_kb(random.Random(seed), cis=2)
    for k, s in enumerate(forest_models(lkb.kb, 1, 1)):
        assert is_forest_model(s, lkb.kb) and is_model(s, lkb.kb)
        if k >= 5:
            break


def test_enumeration_rejects_helpers_without_projection():
    with pytest.raises(ValueError):
        enumerate_separators(BRANCH, 3, helpers=1)
