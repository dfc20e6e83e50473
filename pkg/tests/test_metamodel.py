import copy
import random

import pytest

from dddkit import frontend
from dddkit import model as M

from modelgen import random_model


def test_empty_domain_is_well_formed():
    m = frontend.parse("domain D {}", "t")
    assert M.wf_check(m) == []
    assert M.canonical_print(m) == "domain D {\n}\n"


def test_duplicate_root_is_a_wf_error():
    m = M.DomainModel("D")
    agg = M.Aggregate("A")
    agg.entities.append(M.EntityDecl("X", True, M.FieldDecl("id", M.TypeRef("XId"))))
    agg.entities.append(M.EntityDecl("Y", True, M.FieldDecl("id", M.TypeRef("YId"))))
    m.aggregates.append(agg)
    codes = {e.code for e in M.wf_check(m)}
    assert M.WF_DUPLICATE_ROOT in codes


def test_unresolved_type_reported(tutorial):
    m = copy.deepcopy(tutorial)
    m.aggregate("Customer").root().fields.append(M.FieldDecl("x", M.TypeRef("Nonexistent")))
    errs = M.wf_check(m)
    assert any(e.code == M.WF_UNRESOLVED_TYPE and "Nonexistent" in e.message for e in errs)


def test_resolve_order_id_from_customer_context(tutorial):
    r = M.resolve_type(tutorial, "Customer", M.TypeRef("OrderId"))
    assert r.kind == M.K_AGGREGATE_ID
    assert r.aggregate == "Order"


def test_resolve_local_entity(tutorial):
    r = M.resolve_type(tutorial, "Order", M.TypeRef("OrderLine"))
    assert r.kind == M.K_LOCAL_ENTITY


def test_resolve_primitive_anywhere(tutorial):
    assert M.resolve_type(tutorial, None, M.TypeRef("int")).kind == M.K_PRIMITIVE
    assert M.resolve_type(tutorial, "Order", M.TypeRef("date")).kind == M.K_PRIMITIVE


def test_local_entity_not_visible_across_aggregates(tutorial):
    r = M.resolve_type(tutorial, "Customer", M.TypeRef("OrderLine"))
    assert r.kind == M.K_NOT_FOUND


def test_model_equals_reflexive(tutorial):
    assert M.model_equals(tutorial, tutorial)
    assert M.model_equals(tutorial, copy.deepcopy(tutorial))


def test_model_equals_ignores_top_level_order(tutorial):
    shuffled = copy.deepcopy(tutorial)
    shuffled.aggregates.reverse()
    shuffled.repositories.reverse()
    assert M.model_equals(tutorial, shuffled)


def test_model_equals_detects_multiplicity_flip(tutorial):
    other = copy.deepcopy(tutorial)
    f = other.aggregate("Order").root().fields[1]
    assert f.name == "lines"
    f.multiplicity = M.ONE
    assert not M.model_equals(tutorial, other)


def test_canonical_print_deterministic(tutorial):
    assert M.canonical_print(tutorial) == M.canonical_print(tutorial)


def test_canonical_print_sorts_top_level():
    src = """domain Z {
      service S { method f() }
      value V { field a: int }
      aggregate B { root entity B { id: BId } }
      aggregate A { root entity A { id: AId } }
      repository RB for B
    }"""
    text = M.canonical_print(frontend.parse(src, "t"))
    a = text.index("aggregate A")
    b = text.index("aggregate B")
    r = text.index("repository RB")
    s = text.index("service S")
    v = text.index("value V")
    assert a < b < r < s < v


@pytest.mark.parametrize("seed", range(25))
def test_parse_print_fixpoint_on_random_models(seed):
    m = random_model(random.Random(seed))
    text = M.canonical_print(m)
    m2 = frontend.parse(text, "gen")
    assert M.model_equals(m, m2)
    assert M.canonical_print(m2) == text


def test_implicit_root_ids_are_rederivable(tutorial):
    ids = {v.name: v for v in M.implicit_root_ids(tutorial)}
    assert set(ids) == {"OrderId", "CustomerId"}
    assert ids["OrderId"].is_identifier_of == "Order"
    # the derived set never shows up in equality
    assert M.model_equals(tutorial, copy.deepcopy(tutorial))


def test_is_setter_derivation():
    fields = [M.FieldDecl("amount", M.TypeRef("decimal"))]
    setter = M.MethodDecl("setAmount", [M.FieldDecl("v", M.TypeRef("decimal"))])
    assert M.is_setter(setter, fields)
    not_setter = M.MethodDecl("setAmount", [M.FieldDecl("v", M.TypeRef("int"))])
    assert not M.is_setter(not_setter, fields)
    wrong_arity = M.MethodDecl("setAmount", [])
    assert not M.is_setter(wrong_arity, fields)


def test_fingerprint_tracks_structure(tutorial):
    fp = M.model_fingerprint(tutorial)
    assert fp == M.model_fingerprint(copy.deepcopy(tutorial))
    other = copy.deepcopy(tutorial)
    other.aggregate("Order").root().fields[0].name = "grandTotal"
    assert M.model_fingerprint(other) != fp


def test_empty_reason_is_rejected():
    src = 'domain D { @allow(S3, reason: "") aggregate A { root entity A { id: AId } } }'
    with pytest.raises(frontend.ParseFailure):
        frontend.parse(src, "t")
