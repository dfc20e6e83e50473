"""Core domain-model data structures and model-level operations.

The model is a plain object tree: a domain contains aggregates, shared value
objects, repositories and domain services.  Identifier value objects
(``<RootName>Id`` for every aggregate root, ``<EntityName>Id`` for non-root
entities) are never stored -- they are derived on demand so that deleting and
re-deriving them cannot change a model.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator, Optional

PRIMITIVES = ("int", "decimal", "string", "bool", "date")

ONE = "one"
LIST = "list"

PUBLIC = "public"
INTERNAL = "internal"


@dataclass
class Span:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def sort_key(self):
        return (self.file, self.start_line, self.start_col)

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "startLine": self.start_line,
            "startCol": self.start_col,
            "endLine": self.end_line,
            "endCol": self.end_col,
        }


NO_SPAN = Span("", 1, 1, 1, 1)


@dataclass
class TypeRef:
    """A syntactic type reference.

    ``name`` is a primitive name or a declared type name; for external entity
    references (``ref Agg.Entity``) ``name`` holds the aggregate and
    ``entity`` the entity name.
    """

    name: str
    entity: Optional[str] = None
    span: Optional[Span] = None

    @property
    def is_external(self) -> bool:
        return self.entity is not None

    @property
    def is_primitive(self) -> bool:
        return self.entity is None and self.name in PRIMITIVES

    def text(self) -> str:
        if self.is_external:
            return f"ref {self.name}.{self.entity}"
        return self.name

    def key(self):
        return (self.name, self.entity)


@dataclass
class FieldDecl:
    name: str
    type: TypeRef
    multiplicity: str = ONE  # one | list
    span: Optional[Span] = None

    def type_text(self) -> str:
        if self.multiplicity == LIST:
            return f"list<{self.type.text()}>"
        return self.type.text()


@dataclass
class MethodDecl:
    name: str
    params: list[FieldDecl] = field(default_factory=list)
    return_type: Optional[TypeRef] = None
    visibility: str = PUBLIC
    mutates: bool = False
    span: Optional[Span] = None

    def signature_key(self):
        return (self.name, tuple(p.type.key() + (p.multiplicity,) for p in self.params))


@dataclass
class OverrideAnnotation:
    rule_id: str
    reason: str
    span: Optional[Span] = None


@dataclass
class EntityDecl:
    name: str
    is_root: bool = False
    id_field: Optional[FieldDecl] = None
    fields: list[FieldDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)
    annotations: list[OverrideAnnotation] = field(default_factory=list)
    was: Optional[str] = None
    span: Optional[Span] = None


@dataclass
class ValueObject:
    name: str
    fields: list[FieldDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)
    is_identifier_of: Optional[str] = None  # aggregate name, implicit ids only
    annotations: list[OverrideAnnotation] = field(default_factory=list)
    was: Optional[str] = None
    span: Optional[Span] = None


@dataclass
class DomainEvent:
    name: str
    fields: list[FieldDecl] = field(default_factory=list)
    span: Optional[Span] = None


@dataclass
class Repository:
    name: str
    for_aggregate: str
    annotations: list[OverrideAnnotation] = field(default_factory=list)
    span: Optional[Span] = None


@dataclass
class DomainService:
    name: str
    methods: list[MethodDecl] = field(default_factory=list)
    annotations: list[OverrideAnnotation] = field(default_factory=list)
    span: Optional[Span] = None


@dataclass
class Aggregate:
    name: str
    entities: list[EntityDecl] = field(default_factory=list)  # root included
    value_objects: list[ValueObject] = field(default_factory=list)
    events: list[DomainEvent] = field(default_factory=list)
    annotations: list[OverrideAnnotation] = field(default_factory=list)
    was: Optional[str] = None
    span: Optional[Span] = None

    def root(self) -> Optional[EntityDecl]:
        roots = [e for e in self.entities if e.is_root]
        return roots[0] if len(roots) == 1 else None

    def entity(self, name: str) -> Optional[EntityDecl]:
        for e in self.entities:
            if e.name == name:
                return e
        return None


@dataclass
class DomainModel:
    name: str
    aggregates: list[Aggregate] = field(default_factory=list)
    value_objects: list[ValueObject] = field(default_factory=list)  # shared scope
    repositories: list[Repository] = field(default_factory=list)
    services: list[DomainService] = field(default_factory=list)
    span: Optional[Span] = None

    def aggregate(self, name: str) -> Optional[Aggregate]:
        for a in self.aggregates:
            if a.name == name:
                return a
        return None

    def shared_value_object(self, name: str) -> Optional[ValueObject]:
        for v in self.value_objects:
            if v.name == name:
                return v
        return None


# ---------------------------------------------------------------------------
# Implicit identifier types


def implicit_id_name(entity_name: str) -> str:
    return entity_name + "Id"


def make_implicit_id(entity_name: str, aggregate_name: Optional[str]) -> ValueObject:
    return ValueObject(
        name=implicit_id_name(entity_name),
        fields=[FieldDecl("value", TypeRef("string"))],
        is_identifier_of=aggregate_name,
    )


def implicit_root_ids(model: DomainModel) -> list[ValueObject]:
    """Derived ``<RootName>Id`` value objects, one per aggregate root.

    A user declaration with the same name shadows the implicit one.
    """
    declared = {v.name for v in model.value_objects}
    out = []
    for agg in model.aggregates:
        # every root-flagged entity contributes one, so models that violate
        # the single-root rule still resolve and can be diagnosed
        for ent in agg.entities:
            if not ent.is_root:
                continue
            name = implicit_id_name(ent.name)
            if name not in declared:
                out.append(make_implicit_id(ent.name, agg.name))
                declared.add(name)
    return out


# ---------------------------------------------------------------------------
# Type resolution

K_PRIMITIVE = "primitive"
K_VALUE_OBJECT = "valueObject"
K_LOCAL_ENTITY = "localEntity"
K_AGGREGATE_ID = "aggregateId"
K_EXTERNAL_ENTITY = "externalEntity"
K_NOT_FOUND = "notFound"


@dataclass
class ResolvedKind:
    kind: str
    # declaration site, when there is one
    aggregate: Optional[str] = None
    name: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.kind != K_NOT_FOUND


NOT_FOUND = ResolvedKind(K_NOT_FOUND)


def resolve_type(model: DomainModel, context: Optional[str], ref: TypeRef) -> ResolvedKind:
    """Resolve a type reference in the scope of ``context`` (an aggregate name or None)."""
    if ref.is_external:
        agg = model.aggregate(ref.name)
        if agg is not None and agg.entity(ref.entity) is not None:
            return ResolvedKind(K_EXTERNAL_ENTITY, aggregate=ref.name, name=ref.entity)
        return NOT_FOUND
    if ref.is_primitive:
        return ResolvedKind(K_PRIMITIVE, name=ref.name)

    ctx = model.aggregate(context) if context else None
    if ctx is not None:
        for vo in ctx.value_objects:
            if vo.name == ref.name:
                return ResolvedKind(K_VALUE_OBJECT, aggregate=ctx.name, name=vo.name)
        if ctx.entity(ref.name) is not None:
            return ResolvedKind(K_LOCAL_ENTITY, aggregate=ctx.name, name=ref.name)

    for vo in model.value_objects:
        if vo.name == ref.name:
            if vo.is_identifier_of is not None:
                return ResolvedKind(K_AGGREGATE_ID, aggregate=vo.is_identifier_of, name=vo.name)
            return ResolvedKind(K_VALUE_OBJECT, name=vo.name)

    # implicit aggregate-root identifier types, visible everywhere
    for agg in model.aggregates:
        for ent in agg.entities:
            if ent.is_root and ref.name == implicit_id_name(ent.name):
                return ResolvedKind(K_AGGREGATE_ID, aggregate=agg.name, name=ref.name)

    # implicit non-root entity identifier types, visible inside their aggregate
    if ctx is not None:
        for ent in ctx.entities:
            if not ent.is_root and ref.name == implicit_id_name(ent.name):
                return ResolvedKind(K_VALUE_OBJECT, aggregate=ctx.name, name=ref.name)

    return NOT_FOUND


# ---------------------------------------------------------------------------
# Qualified names


def qname(*parts: str) -> str:
    return ".".join(p for p in parts if p)


def iter_owned_members(model: DomainModel) -> Iterator[tuple[str, Optional[str], object]]:
    """Yield (owner qualified name, aggregate context or None, owner object)
    for every element that can own fields or methods."""
    for agg in model.aggregates:
        for ent in agg.entities:
            yield qname(agg.name, ent.name), agg.name, ent
        for vo in agg.value_objects:
            yield qname(agg.name, vo.name), agg.name, vo
        for ev in agg.events:
            yield qname(agg.name, ev.name), agg.name, ev
    for vo in model.value_objects:
        yield vo.name, None, vo
    for svc in model.services:
        yield svc.name, None, svc


def is_setter(method: MethodDecl, owner_fields: list[FieldDecl]) -> bool:
    """A setter is ``set`` + an existing field name with exactly one parameter
    of that field's declared type."""
    if not method.name.startswith("set") or len(method.params) != 1:
        return False
    suffix = method.name[3:]
    if not suffix:
        return False
    for f in owner_fields:
        if f.name.lower() == suffix.lower():
            p = method.params[0]
            return p.type.key() == f.type.key() and p.multiplicity == f.multiplicity
    return False


# ---------------------------------------------------------------------------
# Well-formedness

WF_DUPLICATE_NAME = "DuplicateName"
WF_MISSING_ROOT = "MissingRoot"
WF_DUPLICATE_ROOT = "DuplicateRoot"
WF_MISSING_ID = "MissingIdField"
WF_UNRESOLVED_TYPE = "UnresolvedType"
WF_EMPTY_REASON = "EmptyOverrideReason"

ROOT_CODES = (WF_MISSING_ROOT, WF_DUPLICATE_ROOT)


@dataclass
class WfError:
    code: str
    subject: str
    message: str
    span: Span = field(default_factory=lambda: NO_SPAN)


def _span_of(obj) -> Span:
    s = getattr(obj, "span", None)
    return s if s is not None else NO_SPAN


def wf_check(model: DomainModel) -> list[WfError]:
    """All well-formedness failures.  DDD rule violations are not reported
    here; those belong to the verifier."""
    errors: list[WfError] = []

    def dup_check(named, scope: str):
        seen: dict[str, object] = {}
        for item in named:
            if item.name in seen:
                errors.append(
                    WfError(
                        WF_DUPLICATE_NAME,
                        qname(scope, item.name) if scope else item.name,
                        f"duplicate name '{item.name}'" + (f" in {scope}" if scope else ""),
                        _span_of(item),
                    )
                )
            else:
                seen[item.name] = item

    top = list(model.aggregates) + list(model.value_objects) + list(model.repositories) + list(model.services)
    dup_check(top, "")

    def check_ref(ref: TypeRef, context: Optional[str], subject: str):
        if not resolve_type(model, context, ref).found:
            errors.append(
                WfError(
                    WF_UNRESOLVED_TYPE,
                    subject,
                    f"unresolved type '{ref.text()}'",
                    ref.span or NO_SPAN,
                )
            )

    def check_members(owner_q: str, context: Optional[str], fields, methods):
        dup_check(fields, owner_q)
        sigs: set = set()
        for m in methods:
            k = m.signature_key()
            if k in sigs:
                errors.append(
                    WfError(
                        WF_DUPLICATE_NAME,
                        qname(owner_q, m.name),
                        f"duplicate method '{m.name}' with identical signature",
                        _span_of(m),
                    )
                )
            sigs.add(k)
        for f in fields:
            check_ref(f.type, context, qname(owner_q, f.name))
        for m in methods:
            for p in m.params:
                check_ref(p.type, context, qname(owner_q, m.name, p.name))
            if m.return_type is not None:
                check_ref(m.return_type, context, qname(owner_q, m.name))

    def check_annotations(owner_q: str, annotations):
        for ann in annotations:
            if not ann.reason.strip():
                errors.append(
                    WfError(
                        WF_EMPTY_REASON,
                        owner_q,
                        f"override of {ann.rule_id} has an empty reason",
                        _span_of(ann),
                    )
                )

    for agg in model.aggregates:
        roots = [e for e in agg.entities if e.is_root]
        if len(roots) == 0:
            errors.append(WfError(WF_MISSING_ROOT, agg.name, f"aggregate '{agg.name}' has no root entity", _span_of(agg)))
        elif len(roots) > 1:
            errors.append(
                WfError(WF_DUPLICATE_ROOT, agg.name, f"aggregate '{agg.name}' has {len(roots)} root entities", _span_of(roots[1]))
            )
        dup_check(list(agg.entities) + list(agg.value_objects) + list(agg.events), agg.name)
        check_annotations(agg.name, agg.annotations)
        for ent in agg.entities:
            owner_q = qname(agg.name, ent.name)
            if ent.id_field is None:
                errors.append(WfError(WF_MISSING_ID, owner_q, f"entity '{owner_q}' has no identity field", _span_of(ent)))
            else:
                check_ref(ent.id_field.type, agg.name, qname(owner_q, "id"))
            check_members(owner_q, agg.name, ent.fields, ent.methods)
            check_annotations(owner_q, ent.annotations)
        for vo in agg.value_objects:
            owner_q = qname(agg.name, vo.name)
            check_members(owner_q, agg.name, vo.fields, vo.methods)
            check_annotations(owner_q, vo.annotations)
        for ev in agg.events:
            owner_q = qname(agg.name, ev.name)
            dup_check(ev.fields, owner_q)
            for f in ev.fields:
                check_ref(f.type, agg.name, qname(owner_q, f.name))

    for vo in model.value_objects:
        check_members(vo.name, None, vo.fields, vo.methods)
        check_annotations(vo.name, vo.annotations)
    for repo in model.repositories:
        # a dangling aggregate target is a rule violation (S5), not a
        # well-formedness failure; the model must stay checkable
        check_annotations(repo.name, repo.annotations)
    for svc in model.services:
        check_members(svc.name, None, [], svc.methods)
        check_annotations(svc.name, svc.annotations)

    return errors


# ---------------------------------------------------------------------------
# Structural equality


def _norm_type(ref: TypeRef):
    return (ref.name, ref.entity)


def _norm_field(f: FieldDecl):
    return (f.name, _norm_type(f.type), f.multiplicity)


def _norm_method(m: MethodDecl):
    return (
        m.name,
        tuple(_norm_field(p) for p in m.params),
        _norm_type(m.return_type) if m.return_type else None,
        m.visibility,
        m.mutates,
    )


def _norm_entity(e: EntityDecl):
    return (
        "entity",
        e.name,
        e.is_root,
        _norm_field(e.id_field) if e.id_field else None,
        tuple(_norm_field(f) for f in e.fields),
        tuple(_norm_method(m) for m in e.methods),
    )


def _norm_vo(v: ValueObject):
    return (
        "value",
        v.name,
        tuple(_norm_field(f) for f in v.fields),
        tuple(_norm_method(m) for m in v.methods),
    )


def _norm_event(ev: DomainEvent):
    return ("event", ev.name, tuple(_norm_field(f) for f in ev.fields))


def normalize(model: DomainModel):
    """Comparable structure: element sets by name, member lists ordered.

    Implicit identifier value objects and annotations are excluded; they are
    derived or advisory, not structural.
    """
    aggs = []
    for agg in sorted(model.aggregates, key=lambda a: a.name):
        aggs.append(
            (
                "aggregate",
                agg.name,
                tuple(sorted((_norm_entity(e) for e in agg.entities), key=lambda t: t[1])),
                tuple(sorted((_norm_vo(v) for v in agg.value_objects), key=lambda t: t[1])),
                tuple(sorted((_norm_event(ev) for ev in agg.events), key=lambda t: t[1])),
            )
        )
    vos = tuple(
        sorted((_norm_vo(v) for v in model.value_objects if v.is_identifier_of is None), key=lambda t: t[1])
    )
    repos = tuple(
        sorted((("repository", r.name, r.for_aggregate) for r in model.repositories), key=lambda t: t[1])
    )
    svcs = tuple(
        sorted(
            (("service", s.name, tuple(_norm_method(m) for m in s.methods)) for s in model.services),
            key=lambda t: t[1],
        )
    )
    return (model.name, tuple(aggs), vos, repos, svcs)


def model_equals(a: DomainModel, b: DomainModel) -> bool:
    return normalize(a) == normalize(b)


# ---------------------------------------------------------------------------
# Canonical printing

_KIND_ORDER = {"aggregate": 0, "repository": 1, "service": 2, "value": 3}


def _print_annotations(out, indent, annotations, was):
    for ann in annotations:
        out.append(f'{indent}@allow({ann.rule_id}, reason: {_quote(ann.reason)})')
    if was:
        out.append(f'{indent}@was({_quote(was)})')


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _print_field(out, indent, f: FieldDecl):
    out.append(f"{indent}field {f.name}: {f.type_text()}")


def _print_method(out, indent, m: MethodDecl):
    params = ", ".join(f"{p.name}: {p.type_text()}" for p in m.params)
    line = f"{indent}{m.visibility} method {m.name}({params})"
    if m.return_type is not None:
        line += f": {m.return_type.text()}"
    if m.mutates:
        line += " mutates"
    out.append(line)


def _print_entity(out, indent, e: EntityDecl):
    _print_annotations(out, indent, e.annotations, e.was)
    head = "root entity" if e.is_root else "entity"
    out.append(f"{indent}{head} {e.name} {{")
    inner = indent + "  "
    if e.id_field is not None:
        out.append(f"{inner}id: {e.id_field.type.text()}")
    for f in e.fields:
        _print_field(out, inner, f)
    for m in e.methods:
        _print_method(out, inner, m)
    out.append(f"{indent}}}")


def _print_vo(out, indent, v: ValueObject):
    _print_annotations(out, indent, v.annotations, v.was)
    out.append(f"{indent}value {v.name} {{")
    inner = indent + "  "
    for f in v.fields:
        _print_field(out, inner, f)
    for m in v.methods:
        _print_method(out, inner, m)
    out.append(f"{indent}}}")


def canonical_print(model: DomainModel) -> str:
    """Deterministic DSL text: top level sorted by (kind, name), member order
    as declared.  Implicit identifier types are not printed."""
    out: list[str] = [f"domain {model.name} {{"]
    items: list[tuple[int, str, str, object]] = []
    for agg in model.aggregates:
        items.append((_KIND_ORDER["aggregate"], agg.name, "aggregate", agg))
    for repo in model.repositories:
        items.append((_KIND_ORDER["repository"], repo.name, "repository", repo))
    for svc in model.services:
        items.append((_KIND_ORDER["service"], svc.name, "service", svc))
    for vo in model.value_objects:
        if vo.is_identifier_of is None:
            items.append((_KIND_ORDER["value"], vo.name, "value", vo))

    indent = "  "
    for _, _, kind, obj in sorted(items, key=lambda t: (t[0], t[1])):
        if kind == "aggregate":
            agg = obj
            _print_annotations(out, indent, agg.annotations, agg.was)
            out.append(f"{indent}aggregate {agg.name} {{")
            inner = indent + "  "
            for e in agg.entities:
                _print_entity(out, inner, e)
            for v in agg.value_objects:
                _print_vo(out, inner, v)
            for ev in agg.events:
                out.append(f"{inner}event {ev.name} {{")
                for f in ev.fields:
                    _print_field(out, inner + "  ", f)
                out.append(f"{inner}}}")
            out.append(f"{indent}}}")
        elif kind == "repository":
            _print_annotations(out, indent, obj.annotations, None)
            out.append(f"{indent}repository {obj.name} for {obj.for_aggregate}")
        elif kind == "service":
            _print_annotations(out, indent, obj.annotations, None)
            out.append(f"{indent}service {obj.name} {{")
            for m in obj.methods:
                _print_method(out, indent + "  ", m)
            out.append(f"{indent}}}")
        else:
            _print_vo(out, indent, obj)
    out.append("}")
    return "\n".join(out) + "\n"


def model_fingerprint(model: DomainModel) -> str:
    return hashlib.sha256(canonical_print(model).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# JSON projection (used by the CLI server and delta payloads)


def type_to_json(ref: TypeRef) -> str:
    return ref.text()


def type_from_text(text: str) -> tuple[TypeRef, str]:
    """Parse a field-type string (``list<Money>``, ``ref A.B``, ``int``)
    back into (TypeRef, multiplicity)."""
    text = text.strip()
    mult = ONE
    if text.startswith("list<") and text.endswith(">"):
        mult = LIST
        text = text[5:-1].strip()
    if text.startswith("ref "):
        agg, _, ent = text[4:].strip().partition(".")
        return TypeRef(agg.strip(), ent.strip()), mult
    return TypeRef(text), mult


def field_to_json(f: FieldDecl) -> dict:
    return {"name": f.name, "type": f.type_text()}


def field_from_json(d: dict) -> FieldDecl:
    ref, mult = type_from_text(d["type"])
    return FieldDecl(d["name"], ref, mult)


def method_to_json(m: MethodDecl) -> dict:
    return {
        "name": m.name,
        "params": [field_to_json(p) for p in m.params],
        "returnType": m.return_type.text() if m.return_type else None,
        "visibility": m.visibility,
        "mutates": m.mutates,
    }


def method_from_json(d: dict) -> MethodDecl:
    ret = None
    if d.get("returnType"):
        ret, _ = type_from_text(d["returnType"])
    return MethodDecl(
        d["name"],
        [field_from_json(p) for p in d.get("params", [])],
        ret,
        d.get("visibility", PUBLIC),
        bool(d.get("mutates", False)),
    )


def annotation_to_json(a: OverrideAnnotation) -> dict:
    return {"ruleId": a.rule_id, "reason": a.reason}


def entity_to_json(e: EntityDecl) -> dict:
    return {
        "name": e.name,
        "isRoot": e.is_root,
        "idType": e.id_field.type.text() if e.id_field else None,
        "fields": [field_to_json(f) for f in e.fields],
        "methods": [method_to_json(m) for m in e.methods],
        "annotations": [annotation_to_json(a) for a in e.annotations],
    }


def entity_from_json(d: dict) -> EntityDecl:
    id_field = None
    if d.get("idType"):
        ref, _ = type_from_text(d["idType"])
        id_field = FieldDecl("id", ref)
    return EntityDecl(
        d["name"],
        bool(d.get("isRoot", False)),
        id_field,
        [field_from_json(f) for f in d.get("fields", [])],
        [method_from_json(m) for m in d.get("methods", [])],
        [OverrideAnnotation(a["ruleId"], a["reason"]) for a in d.get("annotations", [])],
    )


def vo_to_json(v: ValueObject) -> dict:
    return {
        "name": v.name,
        "fields": [field_to_json(f) for f in v.fields],
        "methods": [method_to_json(m) for m in v.methods],
        "annotations": [annotation_to_json(a) for a in v.annotations],
        "isIdentifierOf": v.is_identifier_of,
    }


def vo_from_json(d: dict) -> ValueObject:
    return ValueObject(
        d["name"],
        [field_from_json(f) for f in d.get("fields", [])],
        [method_from_json(m) for m in d.get("methods", [])],
        d.get("isIdentifierOf"),
        [OverrideAnnotation(a["ruleId"], a["reason"]) for a in d.get("annotations", [])],
    )


def event_to_json(ev: DomainEvent) -> dict:
    return {"name": ev.name, "fields": [field_to_json(f) for f in ev.fields]}


def event_from_json(d: dict) -> DomainEvent:
    return DomainEvent(d["name"], [field_from_json(f) for f in d.get("fields", [])])


def aggregate_to_json(agg: Aggregate) -> dict:
    return {
        "name": agg.name,
        "entities": [entity_to_json(e) for e in agg.entities],
        "valueObjects": [vo_to_json(v) for v in agg.value_objects],
        "events": [event_to_json(ev) for ev in agg.events],
        "annotations": [annotation_to_json(a) for a in agg.annotations],
    }


def aggregate_from_json(d: dict) -> Aggregate:
    return Aggregate(
        d["name"],
        [entity_from_json(e) for e in d.get("entities", [])],
        [vo_from_json(v) for v in d.get("valueObjects", [])],
        [event_from_json(ev) for ev in d.get("events", [])],
        [OverrideAnnotation(a["ruleId"], a["reason"]) for a in d.get("annotations", [])],
    )


def model_to_json(model: DomainModel) -> dict:
    return {
        "name": model.name,
        "aggregates": [aggregate_to_json(a) for a in model.aggregates],
        "valueObjects": [vo_to_json(v) for v in model.value_objects if v.is_identifier_of is None],
        "repositories": [{"name": r.name, "forAggregate": r.for_aggregate} for r in model.repositories],
        "services": [
            {"name": s.name, "methods": [method_to_json(m) for m in s.methods]} for s in model.services
        ],
    }
