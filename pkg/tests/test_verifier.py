import copy

import pytest

from dddkit import frontend
from dddkit import model as M
from dddkit import verifier as V
from dddkit.errors import StaleDiagnostic, UnknownRepair, UsageError


def check(src, config=None):
    return V.check(frontend.parse(src, "t"), config)


S3_SRC = """domain Ordering {
  aggregate Order {
    root entity Order {
      id: OrderId
      field customer: ref Customer.Customer
    }
  }
  aggregate Customer {
    root entity Customer { id: CustomerId field name: string }
  }
  repository OrderRepository for Order
  repository CustomerRepository for Customer
}"""

B1_SRC = """domain Ordering {
  aggregate Order {
    root entity Order {
      id: OrderId
      field lines: list<OrderLine>
    }
    entity OrderLine {
      id: OrderLineId
      field qty: int
      public method setQty(q: int) mutates
    }
  }
  repository OrderRepository for Order
}"""


def test_catalog_shape():
    catalog = V.rules()
    assert len(catalog) == 11
    assert catalog[0].id == "S1"
    ids = [r.id for r in catalog]
    assert ids == ["S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8b", "B1", "B2", "R1"]
    for r in catalog:
        if r.severity == V.WARNING:
            assert r.overridable
    by_id = {r.id: r for r in catalog}
    assert not by_id["S1"].overridable
    assert not by_id["S2"].overridable
    assert by_id["R1"].severity == V.WARNING


def test_tutorial_is_clean(tutorial):
    diags = V.check(tutorial)
    assert [d for d in diags if d.severity in (V.ERROR, V.WARNING)] == []


def test_s3_cross_ref_with_repair():
    diags = [d for d in check(S3_SRC) if d.rule_id == "S3"]
    assert len(diags) == 1
    d = diags[0]
    assert d.subject == "Order.Order.customer"
    assert d.severity == V.ERROR
    assert d.repairs[0].title == "Replace with CustomerId"


def test_s3_repair_roundtrip():
    model = frontend.parse(S3_SRC, "t")
    d = [x for x in V.check(model) if x.rule_id == "S3"][0]
    repaired = V.apply_repair(model, d, d.repairs[0].id)
    f = repaired.aggregate("Order").root().fields[0]
    assert f.type.name == "CustomerId" and not f.type.is_external
    assert [x for x in V.check(repaired) if x.rule_id == "S3"] == []


def test_b1_with_root_stub_repair():
    model = frontend.parse(B1_SRC, "t")
    diags = [d for d in V.check(model) if d.rule_id == "B1"]
    assert len(diags) == 1
    d = diags[0]
    assert d.subject == "Order.OrderLine.setQty"
    repaired = V.apply_repair(model, d, "encapsulate-in-root")
    line = repaired.aggregate("Order").entity("OrderLine")
    assert line.methods[0].visibility == M.INTERNAL
    root = repaired.aggregate("Order").root()
    stub = [m for m in root.methods if m.name == "setQtyOnOrderLine"][0]
    assert stub.params[0].name == "id"
    assert stub.params[0].type.name == "OrderLineId"
    assert stub.params[1].name == "q"
    assert [x for x in V.check(repaired) if x.rule_id == "B1"] == []


def test_s6_setter_repair_becomes_with_method():
    src = """domain D {
      aggregate A {
        root entity A { id: AId field m: Money }
        value Money {
          field amount: decimal
          method setAmount(amount: decimal)
        }
      }
      repository ARepository for A
    }"""
    model = frontend.parse(src, "t")
    d = [x for x in V.check(model) if x.rule_id == "S6"][0]
    repaired = V.apply_repair(model, d, "convert-setter-to-with")
    vo = repaired.aggregate("A").value_objects[0]
    m = vo.methods[0]
    assert m.name == "withAmount"
    assert m.return_type.name == "Money"
    assert not m.mutates
    assert [x for x in V.check(repaired) if x.rule_id == "S6"] == []


def test_s7_repair_introduces_id_type():
    src = """domain D {
      aggregate A { root entity Book { id: string field t: string } }
      repository ARepository for A
    }"""
    model = frontend.parse(src, "t")
    d = [x for x in V.check(model) if x.rule_id == "S7"][0]
    repaired = V.apply_repair(model, d, "introduce-id-type")
    assert repaired.aggregate("A").root().id_field.type.name == "BookId"
    assert [x for x in V.check(repaired) if x.rule_id == "S7"] == []


def test_stale_diagnostic_rejected():
    model = frontend.parse(S3_SRC, "t")
    d = [x for x in V.check(model) if x.rule_id == "S3"][0]
    mutated = copy.deepcopy(model)
    mutated.aggregate("Customer").root().fields.append(M.FieldDecl("x", M.TypeRef("int")))
    with pytest.raises(StaleDiagnostic):
        V.apply_repair(mutated, d, d.repairs[0].id)


def test_unknown_repair_rejected():
    model = frontend.parse(S3_SRC, "t")
    d = [x for x in V.check(model) if x.rule_id == "S3"][0]
    with pytest.raises(UnknownRepair):
        V.apply_repair(model, d, "no-such-repair")


def test_check_rejects_non_well_formed():
    m = M.DomainModel("D")
    agg = M.Aggregate("A")
    agg.entities.append(
        M.EntityDecl("A", True, M.FieldDecl("id", M.TypeRef("AId")), [M.FieldDecl("x", M.TypeRef("Nope"))])
    )
    m.aggregates.append(agg)
    with pytest.raises(UsageError):
        V.check(m)


def test_missing_root_is_s2_not_a_check_rejection():
    src = "domain D { aggregate A { entity E { id: EId } } repository R for A }"
    diags = check(src)
    assert any(d.rule_id == "S2" and d.subject == "A" and d.severity == V.ERROR for d in diags)


def test_override_downgrades_to_info():
    src = S3_SRC.replace("root entity Order {", "root entity Order {", 1).replace(
        "aggregate Order {",
        'aggregate Order {\n    @allow(S3, reason: "transition period")\n',
        1,
    )
    diags = [d for d in check(src) if d.rule_id == "S3"]
    assert len(diags) == 1
    assert diags[0].severity == V.INFO
    assert diags[0].suppressed_by is not None
    assert diags[0].suppressed_by.reason == "transition period"


def test_override_does_not_apply_to_non_overridable():
    src = """domain D {
      @allow(S2, reason: "nope")
      aggregate A { entity E { id: EId } }
      repository R for A
    }"""
    diags = [d for d in check(src) if d.rule_id == "S2"]
    assert diags and diags[0].severity == V.ERROR


def test_disabled_rule_absent():
    cfg = V.VerifierConfig(disabled_rules={"S3"})
    assert [d for d in check(S3_SRC, cfg) if d.rule_id == "S3"] == []


def test_threshold_configurable():
    src = """domain D {
      aggregate A {
        root entity R { id: RId }
        entity E1 { id: E1Id }
        entity E2 { id: E2Id }
      }
      repository ARepo for A
    }"""
    assert [d for d in check(src) if d.rule_id == "R1"] == []
    strict = V.VerifierConfig(small_aggregate_threshold=2)
    hits = [d for d in check(src, strict) if d.rule_id == "R1"]
    assert len(hits) == 1 and hits[0].severity == V.WARNING


def test_threshold_must_be_positive():
    with pytest.raises(UsageError):
        V.VerifierConfig(small_aggregate_threshold=0)


def test_determinism(tutorial):
    a = [d.to_json() for d in V.check(tutorial)]
    b = [d.to_json() for d in V.check(tutorial)]
    assert a == b


def test_diagnostic_json_shape():
    d = [x for x in check(S3_SRC) if x.rule_id == "S3"][0].to_json()
    assert set(d) >= {"ruleId", "severity", "subject", "span", "message", "repairs"}
    assert set(d["span"]) == {"file", "startLine", "startCol", "endLine", "endCol"}
    assert d["repairs"] == [{"id": "use-id-reference", "title": "Replace with CustomerId"}]
