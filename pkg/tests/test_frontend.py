import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dddkit import frontend
from dddkit import model as M

from modelgen import random_model


def test_parse_tutorial_element_counts(tutorial):
    assert tutorial.name == "Ordering"
    assert len(tutorial.aggregates) == 2
    assert len(tutorial.repositories) == 1
    assert len(tutorial.services) == 1
    order = tutorial.aggregate("Order")
    assert order.root().name == "Order"
    assert [e.name for e in order.entities] == ["Order", "OrderLine"]
    assert [v.name for v in order.value_objects] == ["Money"]
    assert [e.name for e in order.events] == ["OrderPlaced"]


def test_unbalanced_brace_reports_eof_error():
    model, errors = frontend.try_parse("domain D { aggregate A {", "t")
    assert errors
    assert any("}" in (e.expected or []) or "}" in e.message for e in errors)


def test_panic_recovery_reports_multiple_errors():
    src = """domain D {
      aggregate A {
        root entity A { id: AId field : int }
      }
      aggregate B {
        root entity B { id: BId field also bad }
      }
    }"""
    model, errors = frontend.try_parse(src, "t")
    assert len(errors) >= 2


def test_spans_are_one_based_and_name_bearing(tutorial_text, tutorial):
    lines = tutorial_text.splitlines()
    for agg in tutorial.aggregates:
        span = agg.span
        assert span.start_line >= 1 and span.start_col >= 1
        assert agg.name in lines[span.start_line - 1]


def test_annotations_parse():
    src = """domain D {
      @allow(R1, reason: "known hotspot")
      aggregate A {
        @was("Old")
        root entity A { id: AId }
      }
    }"""
    m = frontend.parse(src, "t")
    agg = m.aggregates[0]
    assert agg.annotations[0].rule_id == "R1"
    assert agg.annotations[0].reason == "known hotspot"
    assert agg.root().was == "Old"


def test_ref_type_parses_as_external():
    src = """domain D {
      aggregate A { root entity A { id: AId field b: ref B.B } }
      aggregate B { root entity B { id: BId } }
    }"""
    m = frontend.parse(src, "t")
    f = m.aggregate("A").root().fields[0]
    assert f.type.is_external
    assert (f.type.name, f.type.entity) == ("B", "B")


def test_list_is_contextual_not_reserved():
    src = "domain D { aggregate A { root entity A { id: AId field list: int } } }"
    m = frontend.parse(src, "t")
    assert m.aggregate("A").root().fields[0].name == "list"


def test_comments_ignored():
    src = "domain D { // trailing\n  // whole line\n}"
    assert frontend.parse(src, "t").name == "D"


def test_method_grammar_variants():
    src = """domain D {
      service S {
        method plain()
        method withRet(): int
        internal method hidden(a: int, b: string): date mutates
        public method loud() mutates
      }
    }"""
    svc = frontend.parse(src, "t").services[0]
    by_name = {m.name: m for m in svc.methods}
    assert by_name["plain"].return_type is None
    assert by_name["withRet"].return_type.name == "int"
    assert by_name["hidden"].visibility == M.INTERNAL
    assert by_name["hidden"].mutates
    assert len(by_name["hidden"].params) == 2
    assert by_name["loud"].visibility == M.PUBLIC


def test_entity_requires_id_first():
    src = "domain D { aggregate A { root entity A { field x: int } } }"
    _, errors = frontend.try_parse(src, "t")
    assert errors


def test_duplicate_top_level_names_rejected():
    src = "domain D { value V { field a: int } value V { field b: int } }"
    with pytest.raises(frontend.ParseFailure):
        frontend.parse(src, "t")


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=string.printable, max_size=200))
def test_parser_is_total_on_garbage(text):
    model, errors = frontend.try_parse(text, "fuzz")
    assert model is not None or errors


@settings(max_examples=50, deadline=None)
@given(st.binary(max_size=120))
def test_parser_is_total_on_bytes(data):
    text = data.decode("utf-8", errors="replace")
    model, errors = frontend.try_parse(text, "fuzz")
    assert model is not None or errors


@pytest.mark.parametrize("seed", range(10))
def test_grammar_round_trip_random(seed):
    m = random_model(random.Random(1000 + seed))
    text = M.canonical_print(m)
    again = M.canonical_print(frontend.parse(text, "g"))
    assert again == text


def test_print_idempotent_on_tutorial(tutorial):
    once = frontend.print_model(tutorial)
    twice = frontend.print_model(frontend.parse(once, "c"))
    assert once == twice
