"""Tactical-DDD rule catalog, constraint checking and structured repairs.

Each diagnostic may carry repairs expressed as delta scripts; applying a
repair removes the finding without breaking well-formedness.  Overrides
(``@allow`` annotations) downgrade findings to info severity; per-project
configuration can disable rules outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import model as M
from .delta import DeltaOp, DeltaScript, apply as delta_apply
from .errors import StaleDiagnostic, UnknownRepair, UsageError

ERROR = "error"
WARNING = "warning"
INFO = "info"


@dataclass(frozen=True)
class RuleDescriptor:
    id: str
    severity: str
    overridable: bool
    description: str

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "severity": self.severity,
            "overridable": self.overridable,
            "description": self.description,
        }


CATALOG: list[RuleDescriptor] = [
    RuleDescriptor("S1", ERROR, False, "Entities and aggregate-scoped value objects belong to exactly one aggregate."),
    RuleDescriptor("S2", ERROR, False, "Every aggregate has exactly one root entity."),
    RuleDescriptor("S3", ERROR, True, "No cross-aggregate entity references; associate via identifier value objects."),
    RuleDescriptor("S4", ERROR, True, "Value object fields must not reference entities."),
    RuleDescriptor("S5", ERROR, True, "Repositories correspond one-to-one with aggregates."),
    RuleDescriptor("S6", ERROR, True, "Value objects are immutable: no mutating methods, no setters."),
    RuleDescriptor("S7", ERROR, True, "Every entity's identity field is typed by a value object."),
    RuleDescriptor("S8b", ERROR, True, "Event fields are primitives, value objects or aggregate identifiers."),
    RuleDescriptor("B1", ERROR, True, "Only the aggregate root exposes public mutating methods."),
    RuleDescriptor("B2", ERROR, True, "Setters count as mutating regardless of the declared mutates flag."),
    RuleDescriptor("R1", WARNING, True, "Keep aggregates small (entity count within the configured threshold)."),
]

_BY_ID = {r.id: r for r in CATALOG}


def rules() -> list[RuleDescriptor]:
    return list(CATALOG)


@dataclass
class VerifierConfig:
    disabled_rules: set[str] = field(default_factory=set)
    small_aggregate_threshold: int = 5

    def __post_init__(self):
        if self.small_aggregate_threshold < 1:
            raise UsageError("small_aggregate_threshold must be >= 1")


@dataclass
class Repair:
    id: str
    title: str
    delta: DeltaScript

    def to_json(self) -> dict:
        return {"id": self.id, "title": self.title}


@dataclass
class Diagnostic:
    rule_id: str
    severity: str
    span: M.Span
    subject: str
    message: str
    repairs: list[Repair] = field(default_factory=list)
    suppressed_by: Optional[M.OverrideAnnotation] = None
    model_fingerprint: str = ""

    def to_json(self) -> dict:
        d = {
            "ruleId": self.rule_id,
            "severity": self.severity,
            "subject": self.subject,
            "span": self.span.to_json(),
            "message": self.message,
            "repairs": [r.to_json() for r in self.repairs],
        }
        if self.suppressed_by is not None:
            d["suppressedBy"] = {"ruleId": self.suppressed_by.rule_id, "reason": self.suppressed_by.reason}
        return d


def _span(obj) -> M.Span:
    s = getattr(obj, "span", None)
    return s if s is not None else M.NO_SPAN


def _id_repair_target(model: M.DomainModel, context: str, ref: M.TypeRef) -> Optional[str]:
    """Name of the identifier type to use instead of an entity reference."""
    resolved = M.resolve_type(model, context, ref)
    if resolved.kind == M.K_EXTERNAL_ENTITY:
        agg = model.aggregate(resolved.aggregate)
    elif resolved.kind == M.K_LOCAL_ENTITY:
        agg = model.aggregate(context)
    else:
        return None
    root = agg.root() if agg else None
    if root is None:
        return None
    return M.implicit_id_name(root.name)


# ---------------------------------------------------------------------------
# Rule evaluation


def _check_s2(model: M.DomainModel, out: list[Diagnostic]):
    for agg in model.aggregates:
        roots = [e for e in agg.entities if e.is_root]
        if len(roots) == 1:
            continue
        repairs: list[Repair] = []
        if len(roots) == 0:
            msg = f"aggregate '{agg.name}' has no root entity"
            if agg.entities:
                first = agg.entities[0]
                promoted = M.entity_to_json(first)
                promoted["isRoot"] = True
                repairs.append(
                    Repair(
                        "promote-entity-to-root",
                        f"Make '{first.name}' the aggregate root",
                        DeltaScript(
                            [
                                DeltaOp("RemoveEntity", f"{agg.name}.{first.name}"),
                                DeltaOp("AddEntity", agg.name, payload={"entity": promoted}),
                            ]
                        ),
                    )
                )
        else:
            msg = f"aggregate '{agg.name}' has {len(roots)} root entities"
            ops = []
            for extra in roots[1:]:
                demoted = M.entity_to_json(extra)
                demoted["isRoot"] = False
                ops.append(DeltaOp("RemoveEntity", f"{agg.name}.{extra.name}"))
                ops.append(DeltaOp("AddEntity", agg.name, payload={"entity": demoted}))
            repairs.append(Repair("demote-extra-roots", "Keep only the first declared root", DeltaScript(ops)))
        out.append(Diagnostic("S2", ERROR, _span(agg), agg.name, msg, repairs))


def _entity_ref_diag(model, context, owner_q, f: M.FieldDecl, rule_id: str, out: list[Diagnostic]):
    """Shared S3/S4/S8b field check: flags entity-typed fields."""
    resolved = M.resolve_type(model, context, f.type)
    if rule_id == "S3":
        offending = resolved.kind == M.K_EXTERNAL_ENTITY
    else:  # S4 / S8b also reject local entity references
        offending = resolved.kind in (M.K_EXTERNAL_ENTITY, M.K_LOCAL_ENTITY)
    if not offending:
        return
    subject = f"{owner_q}.{f.name}"
    repairs = []
    id_name = _id_repair_target(model, context, f.type)
    if id_name is not None:
        repairs.append(
            Repair(
                "use-id-reference",
                f"Replace with {id_name}",
                DeltaScript([DeltaOp("ChangeFieldType", subject, payload={"type": id_name})]),
            )
        )
    messages = {
        "S3": f"field '{subject}' references an entity in another aggregate; use an identifier value object",
        "S4": f"value object field '{subject}' references an entity",
        "S8b": f"event field '{subject}' references an entity; events may carry primitives, value objects and identifiers",
    }
    out.append(Diagnostic(rule_id, ERROR, _span(f), subject, messages[rule_id], repairs))


def _method_sig_refs(m: M.MethodDecl):
    yield from ((p, p.type) for p in m.params)
    if m.return_type is not None:
        yield m, m.return_type


def _check_s3(model: M.DomainModel, out: list[Diagnostic]):
    # entity fields
    for agg in model.aggregates:
        for ent in agg.entities:
            owner_q = f"{agg.name}.{ent.name}"
            for f in ent.fields:
                _entity_ref_diag(model, agg.name, owner_q, f, "S3", out)
            for m in ent.methods:
                _check_s3_method(model, agg.name, owner_q, m, out)
    for svc in model.services:
        for m in svc.methods:
            _check_s3_method(model, None, svc.name, m, out)


def _check_s3_method(model, context, owner_q, m: M.MethodDecl, out: list[Diagnostic]):
    offending = [
        ref for _, ref in _method_sig_refs(m) if M.resolve_type(model, context, ref).kind == M.K_EXTERNAL_ENTITY
    ]
    if not offending:
        return
    subject = f"{owner_q}.{m.name}"
    fixed = M.method_to_json(m)
    fixable = True
    for p in fixed["params"]:
        ref, mult = M.type_from_text(p["type"])
        if ref.is_external:
            id_name = _id_repair_target(model, context, ref)
            if id_name is None:
                fixable = False
            else:
                p["type"] = f"list<{id_name}>" if mult == M.LIST else id_name
    if fixed.get("returnType"):
        ref, _ = M.type_from_text(fixed["returnType"])
        if ref.is_external:
            id_name = _id_repair_target(model, context, ref)
            if id_name is None:
                fixable = False
            else:
                fixed["returnType"] = id_name
    repairs = []
    if fixable:
        repairs.append(
            Repair(
                "use-id-reference",
                "Replace entity references in the signature with identifier types",
                DeltaScript(
                    [
                        DeltaOp("RemoveMethod", subject),
                        DeltaOp("AddMethod", owner_q, payload={"method": fixed}),
                    ]
                ),
            )
        )
    out.append(
        Diagnostic(
            "S3",
            ERROR,
            _span(m),
            subject,
            f"method '{subject}' references an entity in another aggregate; use an identifier value object",
            repairs,
        )
    )


def _check_s4(model: M.DomainModel, out: list[Diagnostic]):
    for agg in model.aggregates:
        for vo in agg.value_objects:
            for f in vo.fields:
                _entity_ref_diag(model, agg.name, f"{agg.name}.{vo.name}", f, "S4", out)
    for vo in model.value_objects:
        if vo.is_identifier_of is None:
            for f in vo.fields:
                _entity_ref_diag(model, None, vo.name, f, "S4", out)


def _check_s5(model: M.DomainModel, out: list[Diagnostic]):
    seen: dict[str, M.Repository] = {}
    for repo in model.repositories:
        if model.aggregate(repo.for_aggregate) is None:
            out.append(
                Diagnostic(
                    "S5",
                    ERROR,
                    _span(repo),
                    repo.name,
                    f"repository '{repo.name}' targets unknown aggregate '{repo.for_aggregate}'",
                    [
                        Repair(
                            "delete-repository",
                            f"Delete repository '{repo.name}'",
                            DeltaScript([DeltaOp("RemoveRepository", repo.name)]),
                        )
                    ],
                )
            )
            continue
        if repo.for_aggregate in seen:
            out.append(
                Diagnostic(
                    "S5",
                    ERROR,
                    _span(repo),
                    repo.name,
                    f"aggregate '{repo.for_aggregate}' already has repository '{seen[repo.for_aggregate].name}'",
                    [
                        Repair(
                            "delete-duplicate-repository",
                            f"Delete later-declared repository '{repo.name}'",
                            DeltaScript([DeltaOp("RemoveRepository", repo.name)]),
                        )
                    ],
                )
            )
        else:
            seen[repo.for_aggregate] = repo
    # advisory half: a missing repository is surfaced but blocks nothing
    for agg in model.aggregates:
        if agg.name not in seen:
            out.append(
                Diagnostic(
                    "S5",
                    INFO,
                    _span(agg),
                    agg.name,
                    f"aggregate '{agg.name}' has no repository",
                    [],
                )
            )


def _check_s6(model: M.DomainModel, out: list[Diagnostic]):
    def check_vo(owner_q: str, vo: M.ValueObject):
        for m in vo.methods:
            setter = M.is_setter(m, vo.fields)
            if not (m.mutates or setter):
                continue
            subject = f"{owner_q}.{m.name}"
            repairs = []
            if setter:
                renamed = M.method_to_json(m)
                renamed["name"] = "with" + m.name[3:]
                renamed["mutates"] = False
                renamed["returnType"] = vo.name
                repairs.append(
                    Repair(
                        "convert-setter-to-with",
                        f"Convert to '{renamed['name']}' returning {vo.name}",
                        DeltaScript(
                            [
                                DeltaOp("RemoveMethod", subject),
                                DeltaOp("AddMethod", owner_q, payload={"method": renamed}),
                            ]
                        ),
                    )
                )
                msg = f"value object '{owner_q}' declares setter '{m.name}'; value objects are immutable"
            else:
                repairs.append(
                    Repair(
                        "remove-mutates",
                        f"Drop the mutates flag from '{m.name}'",
                        DeltaScript([DeltaOp("SetMutates", subject, payload={"mutates": False})]),
                    )
                )
                msg = f"value object method '{subject}' declares mutation; value objects are immutable"
            out.append(Diagnostic("S6", ERROR, _span(m), subject, msg, repairs))

    for agg in model.aggregates:
        for vo in agg.value_objects:
            check_vo(f"{agg.name}.{vo.name}", vo)
    for vo in model.value_objects:
        if vo.is_identifier_of is None:
            check_vo(vo.name, vo)


def _check_s7(model: M.DomainModel, out: list[Diagnostic]):
    for agg in model.aggregates:
        for ent in agg.entities:
            if ent.id_field is None:
                continue
            resolved = M.resolve_type(model, agg.name, ent.id_field.type)
            if resolved.kind in (M.K_VALUE_OBJECT, M.K_AGGREGATE_ID):
                continue
            subject = f"{agg.name}.{ent.name}"
            id_name = M.implicit_id_name(ent.name)
            ops = []
            taken = M.resolve_type(model, agg.name, M.TypeRef(id_name)).found
            if not taken:
                ops.append(
                    DeltaOp(
                        "AddValueObject",
                        id_name,
                        payload={"valueObject": M.vo_to_json(M.make_implicit_id(ent.name, None)), "scope": ""},
                    )
                )
            ops.append(DeltaOp("ChangeFieldType", f"{subject}.id", payload={"type": id_name}))
            out.append(
                Diagnostic(
                    "S7",
                    ERROR,
                    _span(ent.id_field),
                    subject,
                    f"entity '{subject}' identity is typed '{ent.id_field.type.text()}', not a value object",
                    [Repair("introduce-id-type", f"Introduce identifier type {id_name}", DeltaScript(ops))],
                )
            )


def _check_s8b(model: M.DomainModel, out: list[Diagnostic]):
    for agg in model.aggregates:
        for ev in agg.events:
            for f in ev.fields:
                _entity_ref_diag(model, agg.name, f"{agg.name}.{ev.name}", f, "S8b", out)


def _check_b1(model: M.DomainModel, out: list[Diagnostic]):
    for agg in model.aggregates:
        root = agg.root()
        for ent in agg.entities:
            if ent.is_root:
                continue
            owner_q = f"{agg.name}.{ent.name}"
            for m in ent.methods:
                mutating = m.mutates or M.is_setter(m, ent.fields)
                if not (m.visibility == M.PUBLIC and mutating):
                    continue
                subject = f"{owner_q}.{m.name}"
                repairs = []
                if root is not None and ent.id_field is not None:
                    stub_name = f"{m.name}On{ent.name}"
                    if not any(x.name == stub_name for x in root.methods):
                        stub = {
                            "name": stub_name,
                            "params": [{"name": "id", "type": ent.id_field.type.text()}]
                            + [M.field_to_json(p) for p in m.params],
                            "returnType": m.return_type.text() if m.return_type else None,
                            "visibility": M.PUBLIC,
                            "mutates": True,
                        }
                        repairs.append(
                            Repair(
                                "encapsulate-in-root",
                                f"Make '{m.name}' internal and route through root method '{stub_name}'",
                                DeltaScript(
                                    [
                                        DeltaOp("ChangeVisibility", subject, payload={"visibility": M.INTERNAL}),
                                        DeltaOp("AddMethod", f"{agg.name}.{root.name}", payload={"method": stub}),
                                    ]
                                ),
                            )
                        )
                out.append(
                    Diagnostic(
                        "B1",
                        ERROR,
                        _span(m),
                        subject,
                        f"non-root entity '{owner_q}' exposes public mutating method '{m.name}'; "
                        "state changes must go through the aggregate root",
                        repairs,
                    )
                )


def _check_r1(model: M.DomainModel, config: VerifierConfig, out: list[Diagnostic]):
    for agg in model.aggregates:
        count = len(agg.entities)
        if count > config.small_aggregate_threshold:
            out.append(
                Diagnostic(
                    "R1",
                    WARNING,
                    _span(agg),
                    agg.name,
                    f"aggregate '{agg.name}' contains {count} entities "
                    f"(threshold {config.small_aggregate_threshold}); consider splitting it",
                    [],
                )
            )


# ---------------------------------------------------------------------------
# Overrides and entry points


def _collect_overrides(model: M.DomainModel) -> list[tuple[str, M.OverrideAnnotation]]:
    pairs: list[tuple[str, M.OverrideAnnotation]] = []
    for agg in model.aggregates:
        pairs.extend((agg.name, a) for a in agg.annotations)
        for ent in agg.entities:
            pairs.extend((f"{agg.name}.{ent.name}", a) for a in ent.annotations)
        for vo in agg.value_objects:
            pairs.extend((f"{agg.name}.{vo.name}", a) for a in vo.annotations)
    for vo in model.value_objects:
        pairs.extend((vo.name, a) for a in vo.annotations)
    for repo in model.repositories:
        pairs.extend((repo.name, a) for a in repo.annotations)
    for svc in model.services:
        pairs.extend((svc.name, a) for a in svc.annotations)
    return pairs


def check(model: M.DomainModel, config: Optional[VerifierConfig] = None) -> list[Diagnostic]:
    """Check a model against the rule catalog.

    Root-count problems are reported as S2 diagnostics; any other
    well-formedness failure is a usage error (the caller should have parsed
    or wf-checked first).
    """
    config = config or VerifierConfig()
    wf = [e for e in M.wf_check(model) if e.code not in M.ROOT_CODES]
    if wf:
        raise UsageError("model is not well-formed: " + "; ".join(e.message for e in wf))

    out: list[Diagnostic] = []
    _check_s2(model, out)
    _check_s3(model, out)
    _check_s4(model, out)
    _check_s5(model, out)
    _check_s6(model, out)
    _check_s7(model, out)
    _check_s8b(model, out)
    _check_b1(model, out)
    _check_r1(model, config, out)

    out = [d for d in out if d.rule_id not in config.disabled_rules]

    overrides = _collect_overrides(model)
    for d in out:
        desc = _BY_ID[d.rule_id]
        if not desc.overridable:
            continue
        for owner_q, ann in overrides:
            if ann.rule_id != d.rule_id:
                continue
            if d.subject == owner_q or d.subject.startswith(owner_q + "."):
                d.severity = INFO
                d.suppressed_by = ann
                break

    fingerprint = M.model_fingerprint(model)
    for d in out:
        d.model_fingerprint = fingerprint

    out.sort(key=lambda d: (d.span.file, d.span.start_line, d.span.start_col, d.rule_id, d.subject))
    return out


def apply_repair(model: M.DomainModel, diagnostic: Diagnostic, repair_id: str) -> M.DomainModel:
    """Apply one of a diagnostic's repairs to the model it was produced on."""
    if diagnostic.model_fingerprint != M.model_fingerprint(model):
        raise StaleDiagnostic("the model changed since this diagnostic was produced")
    for repair in diagnostic.repairs:
        if repair.id == repair_id:
            return delta_apply(model, repair.delta)
    raise UnknownRepair(f"diagnostic {diagnostic.rule_id}:{diagnostic.subject} has no repair '{repair_id}'")
