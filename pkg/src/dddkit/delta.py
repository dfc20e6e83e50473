"""The delta vocabulary: typed model-change operations, diffing, application,
inversion and translation into code-edit plans.

The op vocabulary is closed.  Every op names its target by qualified name
(``Agg``, ``Agg.Entity``, ``Agg.Entity.field`` ...).  Ops produced by
:func:`diff` record prior values so scripts can be inverted; :func:`apply`
fills missing priors as it validates a script against a base model.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import model as M
from .errors import (
    DuplicateTarget,
    NotInvertible,
    ResultNotWellFormed,
    StaleWorkspace,
    TargetNotFound,
)

OP_KINDS = (
    "AddAggregate", "RemoveAggregate",
    "AddEntity", "RemoveEntity",
    "AddValueObject", "RemoveValueObject",
    "AddField", "RemoveField",
    "ChangeFieldType", "ChangeMultiplicity",
    "AddMethod", "RemoveMethod",
    "ChangeVisibility", "SetMutates",
    "Rename",
    "AddEvent", "RemoveEvent",
    "AddRepository", "RemoveRepository",
    "AddService", "RemoveService",
    "AddAnnotation", "RemoveAnnotation",
)


@dataclass
class DeltaOp:
    kind: str
    target: str = ""
    payload: Optional[dict] = None
    prior: Optional[dict] = None

    def to_json(self) -> dict:
        d = {"kind": self.kind, "target": self.target, "payload": self.payload}
        if self.prior is not None:
            d["prior"] = self.prior
        return d


@dataclass
class DeltaScript:
    ops: list[DeltaOp] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def to_json(self) -> dict:
        return {"ops": [op.to_json() for op in self.ops]}

    @staticmethod
    def from_json(data: dict) -> "DeltaScript":
        return DeltaScript(
            [DeltaOp(o["kind"], o.get("target", ""), o.get("payload"), o.get("prior")) for o in data["ops"]]
        )


@dataclass
class Patch:
    anchor: str
    replacement: str


@dataclass
class FileEdit:
    path: str
    action: str  # create | delete | patch
    patches: list[Patch] = field(default_factory=list)


@dataclass
class EditPlan:
    base_model_hash: str
    file_edits: list[FileEdit] = field(default_factory=list)
    preserved_regions: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Target lookup helpers


def _find_aggregate(model: M.DomainModel, name: str, op: DeltaOp) -> M.Aggregate:
    agg = model.aggregate(name)
    if agg is None:
        raise TargetNotFound(op, f"no aggregate '{name}'")
    return agg


def _find_member_owner(model: M.DomainModel, owner_q: str, op: DeltaOp):
    """Resolve a qualified owner name to an object with fields and/or methods."""
    parts = owner_q.split(".")
    if len(parts) == 1:
        vo = model.shared_value_object(parts[0])
        if vo is not None:
            return vo
        for svc in model.services:
            if svc.name == parts[0]:
                return svc
    elif len(parts) == 2:
        agg = model.aggregate(parts[0])
        if agg is not None:
            ent = agg.entity(parts[1])
            if ent is not None:
                return ent
            for vo in agg.value_objects:
                if vo.name == parts[1]:
                    return vo
            for ev in agg.events:
                if ev.name == parts[1]:
                    return ev
    raise TargetNotFound(op, f"no element '{owner_q}'")


def _find_annotated(model: M.DomainModel, owner_q: str, op: DeltaOp):
    parts = owner_q.split(".")
    if len(parts) == 1:
        for coll in (model.aggregates, model.value_objects, model.repositories, model.services):
            for item in coll:
                if item.name == parts[0]:
                    return item
    elif len(parts) == 2:
        agg = model.aggregate(parts[0])
        if agg is not None:
            ent = agg.entity(parts[1])
            if ent is not None:
                return ent
            for vo in agg.value_objects:
                if vo.name == parts[1]:
                    return vo
    raise TargetNotFound(op, f"no annotatable element '{owner_q}'")


def _split_owner(target: str) -> tuple[str, str]:
    owner, _, member = target.rpartition(".")
    return owner, member


# ---------------------------------------------------------------------------
# Rename support


def _iter_refs(model: M.DomainModel):
    """Yield (aggregate context or None, TypeRef) over the whole model."""

    def members(context, fields, methods):
        for f in fields:
            yield context, f.type
        for m in methods:
            for p in m.params:
                yield context, p.type
            if m.return_type is not None:
                yield context, m.return_type

    for agg in model.aggregates:
        for ent in agg.entities:
            if ent.id_field is not None:
                yield agg.name, ent.id_field.type
            yield from members(agg.name, ent.fields, ent.methods)
        for vo in agg.value_objects:
            yield from members(agg.name, vo.fields, vo.methods)
        for ev in agg.events:
            yield from members(agg.name, ev.fields, [])
    for vo in model.value_objects:
        yield from members(None, vo.fields, vo.methods)
    for svc in model.services:
        yield from members(None, [], svc.methods)


def _apply_rename(model: M.DomainModel, op: DeltaOp):
    old_q = op.target
    new_name = (op.payload or {}).get("newName")
    if not new_name:
        raise TargetNotFound(op, "missing newName")
    parts = old_q.split(".")

    if len(parts) == 1:
        name = parts[0]
        agg = model.aggregate(name)
        if agg is not None:
            if model.aggregate(new_name) is not None:
                raise DuplicateTarget(op)
            for ctx, ref in _iter_refs(model):
                if ref.is_external and ref.name == name:
                    ref.name = new_name
            for repo in model.repositories:
                if repo.for_aggregate == name:
                    repo.for_aggregate = new_name
            agg.name = name = new_name
            return
        vo = model.shared_value_object(name)
        if vo is not None:
            _rewrite_named_refs(model, lambda ctx, ref: ref.name == name, new_name)
            vo.name = new_name
            return
        for repo in model.repositories:
            if repo.name == name:
                repo.name = new_name
                return
        for svc in model.services:
            if svc.name == name:
                svc.name = new_name
                return
        raise TargetNotFound(op)

    if len(parts) == 2:
        agg = model.aggregate(parts[0])
        if agg is None:
            raise TargetNotFound(op)
        ent = agg.entity(parts[1])
        if ent is not None:
            if agg.entity(new_name) is not None:
                raise DuplicateTarget(op)
            old = ent.name
            old_id = M.implicit_id_name(old)
            new_id = M.implicit_id_name(new_name)
            declared = {v.name for v in model.value_objects} | {v.name for v in agg.value_objects}
            for ctx, ref in _iter_refs(model):
                if ref.is_external:
                    if ref.name == agg.name and ref.entity == old:
                        ref.entity = new_name
                    continue
                if ctx == agg.name and ref.name == old:
                    ref.name = new_name
                # implicit identifier follows the entity name unless shadowed
                if ref.name == old_id and old_id not in declared:
                    if ent.is_root or ctx == agg.name:
                        ref.name = new_id
            ent.name = new_name
            return
        for vo in agg.value_objects:
            if vo.name == parts[1]:
                old = vo.name
                for ctx, ref in _iter_refs(model):
                    if not ref.is_external and ctx == agg.name and ref.name == old:
                        ref.name = new_name
                vo.name = new_name
                return
        for ev in agg.events:
            if ev.name == parts[1]:
                ev.name = new_name
                return
    raise TargetNotFound(op)


def _rewrite_named_refs(model: M.DomainModel, pred: Callable, new_name: str):
    for ctx, ref in _iter_refs(model):
        if not ref.is_external and pred(ctx, ref):
            ref.name = new_name


# ---------------------------------------------------------------------------
# Op application


def _field_list(owner, op: DeltaOp) -> list[M.FieldDecl]:
    if not hasattr(owner, "fields"):
        raise TargetNotFound(op, "owner has no fields")
    return owner.fields


def _method_list(owner, op: DeltaOp) -> list[M.MethodDecl]:
    if not hasattr(owner, "methods"):
        raise TargetNotFound(op, "owner has no methods")
    return owner.methods


def _get_field(owner, name: str, op: DeltaOp) -> M.FieldDecl:
    if name == "id" and isinstance(owner, M.EntityDecl) and owner.id_field is not None:
        return owner.id_field
    for f in _field_list(owner, op):
        if f.name == name:
            return f
    raise TargetNotFound(op, f"no field '{name}'")


def _apply_op(model: M.DomainModel, op: DeltaOp):
    kind = op.kind
    payload = op.payload or {}

    if kind == "AddAggregate":
        if model.aggregate(op.target) is not None:
            raise DuplicateTarget(op)
        model.aggregates.append(M.aggregate_from_json(payload["aggregate"]))
    elif kind == "RemoveAggregate":
        agg = _find_aggregate(model, op.target, op)
        if op.prior is None:
            op.prior = {"aggregate": M.aggregate_to_json(agg)}
        model.aggregates.remove(agg)
    elif kind == "AddEntity":
        agg = _find_aggregate(model, op.target, op)
        ent = M.entity_from_json(payload["entity"])
        if agg.entity(ent.name) is not None:
            raise DuplicateTarget(op)
        agg.entities.append(ent)
    elif kind == "RemoveEntity":
        agg_name, ent_name = _split_owner(op.target)
        agg = _find_aggregate(model, agg_name, op)
        ent = agg.entity(ent_name)
        if ent is None:
            raise TargetNotFound(op)
        if op.prior is None:
            op.prior = {"entity": M.entity_to_json(ent)}
        agg.entities.remove(ent)
    elif kind == "AddValueObject":
        scope = payload.get("scope", "")
        vo = M.vo_from_json(payload["valueObject"])
        if scope:
            agg = _find_aggregate(model, scope, op)
            if any(v.name == vo.name for v in agg.value_objects):
                raise DuplicateTarget(op)
            agg.value_objects.append(vo)
        else:
            if model.shared_value_object(vo.name) is not None:
                raise DuplicateTarget(op)
            model.value_objects.append(vo)
    elif kind == "RemoveValueObject":
        scope, vo_name = _split_owner(op.target)
        coll = _find_aggregate(model, scope, op).value_objects if scope else model.value_objects
        for vo in coll:
            if vo.name == vo_name:
                if op.prior is None:
                    op.prior = {"valueObject": M.vo_to_json(vo), "scope": scope}
                coll.remove(vo)
                return
        raise TargetNotFound(op)
    elif kind == "AddField":
        owner = _find_member_owner(model, op.target, op)
        f = M.field_from_json(payload["field"])
        fields = _field_list(owner, op)
        if any(x.name == f.name for x in fields):
            raise DuplicateTarget(op)
        index = payload.get("index", len(fields))
        fields.insert(min(index, len(fields)), f)
    elif kind == "RemoveField":
        owner_q, name = _split_owner(op.target)
        owner = _find_member_owner(model, owner_q, op)
        fields = _field_list(owner, op)
        for i, f in enumerate(fields):
            if f.name == name:
                if op.prior is None:
                    op.prior = {"field": M.field_to_json(f), "index": i}
                fields.pop(i)
                return
        raise TargetNotFound(op)
    elif kind == "ChangeFieldType":
        owner_q, name = _split_owner(op.target)
        owner = _find_member_owner(model, owner_q, op)
        f = _get_field(owner, name, op)
        if op.prior is None:
            op.prior = {"type": f.type.text()}
        ref, _ = M.type_from_text(payload["type"])
        f.type = ref
    elif kind == "ChangeMultiplicity":
        owner_q, name = _split_owner(op.target)
        owner = _find_member_owner(model, owner_q, op)
        f = _get_field(owner, name, op)
        if op.prior is None:
            op.prior = {"multiplicity": f.multiplicity}
        f.multiplicity = payload["multiplicity"]
    elif kind == "AddMethod":
        owner = _find_member_owner(model, op.target, op)
        m = M.method_from_json(payload["method"])
        methods = _method_list(owner, op)
        if any(x.name == m.name for x in methods):
            raise DuplicateTarget(op)
        index = payload.get("index", len(methods))
        methods.insert(min(index, len(methods)), m)
    elif kind == "RemoveMethod":
        owner_q, name = _split_owner(op.target)
        owner = _find_member_owner(model, owner_q, op)
        methods = _method_list(owner, op)
        for i, m in enumerate(methods):
            if m.name == name:
                if op.prior is None:
                    op.prior = {"method": M.method_to_json(m), "index": i}
                methods.pop(i)
                return
        raise TargetNotFound(op)
    elif kind in ("ChangeVisibility", "SetMutates"):
        owner_q, name = _split_owner(op.target)
        owner = _find_member_owner(model, owner_q, op)
        for m in _method_list(owner, op):
            if m.name == name:
                if kind == "ChangeVisibility":
                    if op.prior is None:
                        op.prior = {"visibility": m.visibility}
                    m.visibility = payload["visibility"]
                else:
                    if op.prior is None:
                        op.prior = {"mutates": m.mutates}
                    m.mutates = bool(payload["mutates"])
                return
        raise TargetNotFound(op)
    elif kind == "Rename":
        _apply_rename(model, op)
    elif kind == "AddEvent":
        agg = _find_aggregate(model, op.target, op)
        ev = M.event_from_json(payload["event"])
        if any(e.name == ev.name for e in agg.events):
            raise DuplicateTarget(op)
        agg.events.append(ev)
    elif kind == "RemoveEvent":
        agg_name, ev_name = _split_owner(op.target)
        agg = _find_aggregate(model, agg_name, op)
        for ev in agg.events:
            if ev.name == ev_name:
                if op.prior is None:
                    op.prior = {"event": M.event_to_json(ev)}
                agg.events.remove(ev)
                return
        raise TargetNotFound(op)
    elif kind == "AddRepository":
        if any(r.name == op.target for r in model.repositories):
            raise DuplicateTarget(op)
        r = payload["repository"]
        model.repositories.append(M.Repository(r["name"], r["forAggregate"]))
    elif kind == "RemoveRepository":
        for r in model.repositories:
            if r.name == op.target:
                if op.prior is None:
                    op.prior = {"repository": {"name": r.name, "forAggregate": r.for_aggregate}}
                model.repositories.remove(r)
                return
        raise TargetNotFound(op)
    elif kind == "AddService":
        if any(s.name == op.target for s in model.services):
            raise DuplicateTarget(op)
        s = payload["service"]
        model.services.append(
            M.DomainService(s["name"], [M.method_from_json(m) for m in s.get("methods", [])])
        )
    elif kind == "RemoveService":
        for s in model.services:
            if s.name == op.target:
                if op.prior is None:
                    op.prior = {
                        "service": {"name": s.name, "methods": [M.method_to_json(m) for m in s.methods]}
                    }
                model.services.remove(s)
                return
        raise TargetNotFound(op)
    elif kind == "AddAnnotation":
        owner = _find_annotated(model, op.target, op)
        ann = payload["annotation"]
        owner.annotations.append(M.OverrideAnnotation(ann["ruleId"], ann["reason"]))
    elif kind == "RemoveAnnotation":
        owner = _find_annotated(model, op.target, op)
        rule_id = payload["ruleId"]
        for ann in owner.annotations:
            if ann.rule_id == rule_id:
                if op.prior is None:
                    op.prior = {"annotation": M.annotation_to_json(ann)}
                owner.annotations.remove(ann)
                return
        raise TargetNotFound(op)
    else:
        raise TargetNotFound(op, f"unknown op kind '{kind}'")


def apply(model: M.DomainModel, delta: DeltaScript) -> M.DomainModel:
    """Apply a script atomically: either all ops apply and the result is
    well-formed, or an error is raised and the input is untouched."""
    result = copy.deepcopy(model)
    for op in delta.ops:
        _apply_op(result, op)
    # only reject failures the script itself introduced; a base model that
    # already violates the root rule stays repairable through deltas
    before = {(e.code, e.subject) for e in M.wf_check(model)}
    wf = [e for e in M.wf_check(result) if (e.code, e.subject) not in before]
    if wf:
        raise ResultNotWellFormed(wf)
    return result


# ---------------------------------------------------------------------------
# Inversion

_INVERSES = {
    "AddAggregate": "RemoveAggregate",
    "RemoveAggregate": "AddAggregate",
    "AddEntity": "RemoveEntity",
    "RemoveEntity": "AddEntity",
    "AddValueObject": "RemoveValueObject",
    "RemoveValueObject": "AddValueObject",
    "AddField": "RemoveField",
    "RemoveField": "AddField",
    "AddMethod": "RemoveMethod",
    "RemoveMethod": "AddMethod",
    "AddEvent": "RemoveEvent",
    "RemoveEvent": "AddEvent",
    "AddRepository": "RemoveRepository",
    "RemoveRepository": "AddRepository",
    "AddService": "RemoveService",
    "RemoveService": "AddService",
    "AddAnnotation": "RemoveAnnotation",
    "RemoveAnnotation": "AddAnnotation",
}


def _invert_op(op: DeltaOp) -> DeltaOp:
    kind = op.kind
    payload = op.payload or {}

    def need_prior() -> dict:
        if op.prior is None:
            raise NotInvertible(f"{kind} {op.target!r} carries no prior value")
        return op.prior

    if kind == "AddAggregate":
        return DeltaOp("RemoveAggregate", op.target, prior=dict(payload))
    if kind == "RemoveAggregate":
        return DeltaOp("AddAggregate", op.target, payload=dict(need_prior()))
    if kind == "AddEntity":
        return DeltaOp("RemoveEntity", f"{op.target}.{payload['entity']['name']}", prior=dict(payload))
    if kind == "RemoveEntity":
        agg, _ = _split_owner(op.target)
        return DeltaOp("AddEntity", agg, payload=dict(need_prior()))
    if kind == "AddValueObject":
        scope = payload.get("scope", "")
        name = payload["valueObject"]["name"]
        target = f"{scope}.{name}" if scope else name
        return DeltaOp("RemoveValueObject", target, prior=dict(payload))
    if kind == "RemoveValueObject":
        return DeltaOp("AddValueObject", "", payload=dict(need_prior()))
    if kind == "AddField":
        return DeltaOp("RemoveField", f"{op.target}.{payload['field']['name']}", prior=dict(payload))
    if kind == "RemoveField":
        owner, _ = _split_owner(op.target)
        return DeltaOp("AddField", owner, payload=dict(need_prior()))
    if kind == "ChangeFieldType":
        return DeltaOp("ChangeFieldType", op.target, payload=dict(need_prior()), prior=dict(payload))
    if kind == "ChangeMultiplicity":
        return DeltaOp("ChangeMultiplicity", op.target, payload=dict(need_prior()), prior=dict(payload))
    if kind == "AddMethod":
        return DeltaOp("RemoveMethod", f"{op.target}.{payload['method']['name']}", prior=dict(payload))
    if kind == "RemoveMethod":
        owner, _ = _split_owner(op.target)
        return DeltaOp("AddMethod", owner, payload=dict(need_prior()))
    if kind == "ChangeVisibility":
        return DeltaOp("ChangeVisibility", op.target, payload=dict(need_prior()), prior=dict(payload))
    if kind == "SetMutates":
        return DeltaOp("SetMutates", op.target, payload=dict(need_prior()), prior=dict(payload))
    if kind == "Rename":
        new_name = payload["newName"]
        owner, old_name = _split_owner(op.target)
        new_target = f"{owner}.{new_name}" if owner else new_name
        return DeltaOp("Rename", new_target, payload={"newName": old_name or op.target})
    if kind == "AddEvent":
        return DeltaOp("RemoveEvent", f"{op.target}.{payload['event']['name']}", prior=dict(payload))
    if kind == "RemoveEvent":
        agg, _ = _split_owner(op.target)
        return DeltaOp("AddEvent", agg, payload=dict(need_prior()))
    if kind == "AddRepository":
        return DeltaOp("RemoveRepository", op.target, prior=dict(payload))
    if kind == "RemoveRepository":
        return DeltaOp("AddRepository", op.target, payload=dict(need_prior()))
    if kind == "AddService":
        return DeltaOp("RemoveService", op.target, prior=dict(payload))
    if kind == "RemoveService":
        return DeltaOp("AddService", op.target, payload=dict(need_prior()))
    if kind == "AddAnnotation":
        return DeltaOp(
            "RemoveAnnotation", op.target, payload={"ruleId": payload["annotation"]["ruleId"]}, prior=dict(payload)
        )
    if kind == "RemoveAnnotation":
        return DeltaOp("AddAnnotation", op.target, payload=dict(need_prior()))
    raise NotInvertible(f"unknown op kind '{kind}'")


def invert(delta: DeltaScript) -> DeltaScript:
    return DeltaScript([_invert_op(op) for op in reversed(delta.ops)])


# ---------------------------------------------------------------------------
# Diffing


def _lcs(a: list[str], b: list[str]) -> list[str]:
    la, lb = len(a), len(b)
    dp = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la - 1, -1, -1):
        for j in range(lb - 1, -1, -1):
            if a[i] == b[j]:
                dp[i][j] = dp[i + 1][j + 1] + 1
            else:
                dp[i][j] = max(dp[i + 1][j], dp[i][j + 1])
    out = []
    i = j = 0
    while i < la and j < lb:
        if a[i] == b[j]:
            out.append(a[i])
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


def _diff_fields(ops: list[DeltaOp], owner_q: str, old: list[M.FieldDecl], new: list[M.FieldDecl]):
    old_by = {f.name: (i, f) for i, f in enumerate(old)}
    new_by = {f.name: (i, f) for i, f in enumerate(new)}
    common = [n for n in old_by if n in new_by]
    kept = set(_lcs([f.name for f in old if f.name in new_by], [f.name for f in new if f.name in old_by]))

    removes, adds = [], []
    for name, (i, f) in old_by.items():
        if name not in new_by or name not in kept:
            removes.append(DeltaOp("RemoveField", f"{owner_q}.{name}", prior={"field": M.field_to_json(f), "index": i}))
    for name, (i, f) in sorted(new_by.items(), key=lambda kv: kv[1][0]):
        if name not in old_by or name not in kept:
            adds.append(DeltaOp("AddField", owner_q, payload={"field": M.field_to_json(f), "index": i}))
    ops.extend(removes)
    ops.extend(adds)

    for name in common:
        if name not in kept:
            continue
        _, fo = old_by[name]
        _, fn = new_by[name]
        if fo.type.key() != fn.type.key():
            ops.append(
                DeltaOp(
                    "ChangeFieldType",
                    f"{owner_q}.{name}",
                    payload={"type": fn.type.text()},
                    prior={"type": fo.type.text()},
                )
            )
        if fo.multiplicity != fn.multiplicity:
            ops.append(
                DeltaOp(
                    "ChangeMultiplicity",
                    f"{owner_q}.{name}",
                    payload={"multiplicity": fn.multiplicity},
                    prior={"multiplicity": fo.multiplicity},
                )
            )


def _method_shape(m: M.MethodDecl):
    return (
        tuple((p.name, p.type.key(), p.multiplicity) for p in m.params),
        m.return_type.key() if m.return_type else None,
    )


def _diff_methods(ops: list[DeltaOp], owner_q: str, old: list[M.MethodDecl], new: list[M.MethodDecl]):
    old_by = {m.name: (i, m) for i, m in enumerate(old)}
    new_by = {m.name: (i, m) for i, m in enumerate(new)}
    kept = set(_lcs([m.name for m in old if m.name in new_by], [m.name for m in new if m.name in old_by]))
    # a signature change is a remove + add, not an in-place change
    kept = {n for n in kept if _method_shape(old_by[n][1]) == _method_shape(new_by[n][1])}

    for name, (i, m) in old_by.items():
        if name not in kept:
            ops.append(DeltaOp("RemoveMethod", f"{owner_q}.{name}", prior={"method": M.method_to_json(m), "index": i}))
    for name, (i, m) in sorted(new_by.items(), key=lambda kv: kv[1][0]):
        if name not in kept:
            ops.append(DeltaOp("AddMethod", owner_q, payload={"method": M.method_to_json(m), "index": i}))

    for name in kept:
        mo = old_by[name][1]
        mn = new_by[name][1]
        if mo.visibility != mn.visibility:
            ops.append(
                DeltaOp(
                    "ChangeVisibility",
                    f"{owner_q}.{name}",
                    payload={"visibility": mn.visibility},
                    prior={"visibility": mo.visibility},
                )
            )
        if mo.mutates != mn.mutates:
            ops.append(
                DeltaOp(
                    "SetMutates",
                    f"{owner_q}.{name}",
                    payload={"mutates": mn.mutates},
                    prior={"mutates": mo.mutates},
                )
            )


def _diff_annotations(ops: list[DeltaOp], owner_q: str, old: list[M.OverrideAnnotation], new: list[M.OverrideAnnotation]):
    old_by = {a.rule_id: a for a in old}
    new_by = {a.rule_id: a for a in new}
    for rule_id, a in old_by.items():
        if rule_id not in new_by or new_by[rule_id].reason != a.reason:
            ops.append(
                DeltaOp("RemoveAnnotation", owner_q, payload={"ruleId": rule_id}, prior={"annotation": M.annotation_to_json(a)})
            )
    for rule_id, a in new_by.items():
        if rule_id not in old_by or old_by[rule_id].reason != a.reason:
            ops.append(DeltaOp("AddAnnotation", owner_q, payload={"annotation": M.annotation_to_json(a)}))


def _diff_entity(ops: list[DeltaOp], owner_q: str, old: M.EntityDecl, new: M.EntityDecl):
    if old.id_field is not None and new.id_field is not None and old.id_field.type.key() != new.id_field.type.key():
        ops.append(
            DeltaOp(
                "ChangeFieldType",
                f"{owner_q}.id",
                payload={"type": new.id_field.type.text()},
                prior={"type": old.id_field.type.text()},
            )
        )
    _diff_fields(ops, owner_q, old.fields, new.fields)
    _diff_methods(ops, owner_q, old.methods, new.methods)
    _diff_annotations(ops, owner_q, old.annotations, new.annotations)


def _collect_renames(ops: list[DeltaOp], old: M.DomainModel, new: M.DomainModel):
    """Rename ops from @was hints: the element in `new` names its former self
    and that name still exists in `old`."""
    for agg in new.aggregates:
        if agg.was and agg.was != agg.name and old.aggregate(agg.was) is not None:
            ops.append(DeltaOp("Rename", agg.was, payload={"newName": agg.name}))
    for vo in new.value_objects:
        if vo.was and vo.was != vo.name and old.shared_value_object(vo.was) is not None:
            ops.append(DeltaOp("Rename", vo.was, payload={"newName": vo.name}))
    for agg in new.aggregates:
        old_agg_name = agg.was if (agg.was and old.aggregate(agg.was)) else agg.name
        old_agg = old.aggregate(old_agg_name)
        if old_agg is None:
            continue
        # targets use the aggregate's *new* name: aggregate renames are emitted
        # first, so by the time these ops run the aggregate is already renamed
        for ent in agg.entities:
            if ent.was and ent.was != ent.name and old_agg.entity(ent.was) is not None:
                ops.append(DeltaOp("Rename", f"{agg.name}.{ent.was}", payload={"newName": ent.name}))
        for vo in agg.value_objects:
            if vo.was and vo.was != vo.name and any(v.name == vo.was for v in old_agg.value_objects):
                ops.append(DeltaOp("Rename", f"{agg.name}.{vo.was}", payload={"newName": vo.name}))


def diff(old: M.DomainModel, new: M.DomainModel) -> DeltaScript:
    """A script that transforms ``old`` into a model structurally equal to
    ``new``.  Elements are matched by qualified name; ``@was`` hints become
    Rename ops."""
    ops: list[DeltaOp] = []
    _collect_renames(ops, old, new)

    # Work on a copy of old with renames already applied so everything else
    # matches by name.
    base = copy.deepcopy(old)
    for op in ops:
        _apply_op(base, DeltaOp(op.kind, op.target, copy.deepcopy(op.payload)))

    # Rename ops on aggregates renamed the aggregate in `base`; rename targets
    # for nested elements used the old aggregate name, which _apply_op above
    # already handled (ops are emitted aggregate-first in _collect_renames).

    old_aggs = {a.name: a for a in base.aggregates}
    new_aggs = {a.name: a for a in new.aggregates}
    for name, agg in old_aggs.items():
        if name not in new_aggs:
            ops.append(DeltaOp("RemoveAggregate", name, prior={"aggregate": M.aggregate_to_json(agg)}))
    for name, agg in new_aggs.items():
        if name not in old_aggs:
            ops.append(DeltaOp("AddAggregate", name, payload={"aggregate": M.aggregate_to_json(agg)}))
            continue
        old_agg = old_aggs[name]
        old_ents = {e.name: e for e in old_agg.entities}
        new_ents = {e.name: e for e in agg.entities}
        for ename, ent in old_ents.items():
            if ename not in new_ents or ent.is_root != new_ents[ename].is_root:
                ops.append(DeltaOp("RemoveEntity", f"{name}.{ename}", prior={"entity": M.entity_to_json(ent)}))
        for ename, ent in new_ents.items():
            if ename not in old_ents or old_ents[ename].is_root != ent.is_root:
                ops.append(DeltaOp("AddEntity", name, payload={"entity": M.entity_to_json(ent)}))
            else:
                _diff_entity(ops, f"{name}.{ename}", old_ents[ename], ent)
        old_vos = {v.name: v for v in old_agg.value_objects}
        new_vos = {v.name: v for v in agg.value_objects}
        for vname, vo in old_vos.items():
            if vname not in new_vos:
                ops.append(
                    DeltaOp("RemoveValueObject", f"{name}.{vname}", prior={"valueObject": M.vo_to_json(vo), "scope": name})
                )
        for vname, vo in new_vos.items():
            if vname not in old_vos:
                ops.append(
                    DeltaOp("AddValueObject", vname, payload={"valueObject": M.vo_to_json(vo), "scope": name})
                )
            else:
                q = f"{name}.{vname}"
                _diff_fields(ops, q, old_vos[vname].fields, vo.fields)
                _diff_methods(ops, q, old_vos[vname].methods, vo.methods)
                _diff_annotations(ops, q, old_vos[vname].annotations, vo.annotations)
        old_evs = {e.name: e for e in old_agg.events}
        new_evs = {e.name: e for e in agg.events}
        for ename, ev in old_evs.items():
            if ename not in new_evs:
                ops.append(DeltaOp("RemoveEvent", f"{name}.{ename}", prior={"event": M.event_to_json(ev)}))
        for ename, ev in new_evs.items():
            if ename not in old_evs:
                ops.append(DeltaOp("AddEvent", name, payload={"event": M.event_to_json(ev)}))
            else:
                _diff_fields(ops, f"{name}.{ename}", old_evs[ename].fields, ev.fields)
        _diff_annotations(ops, name, old_agg.annotations, agg.annotations)

    old_vos = {v.name: v for v in base.value_objects if v.is_identifier_of is None}
    new_vos = {v.name: v for v in new.value_objects if v.is_identifier_of is None}
    for vname, vo in old_vos.items():
        if vname not in new_vos:
            ops.append(DeltaOp("RemoveValueObject", vname, prior={"valueObject": M.vo_to_json(vo), "scope": ""}))
    for vname, vo in new_vos.items():
        if vname not in old_vos:
            ops.append(DeltaOp("AddValueObject", vname, payload={"valueObject": M.vo_to_json(vo), "scope": ""}))
        else:
            _diff_fields(ops, vname, old_vos[vname].fields, vo.fields)
            _diff_methods(ops, vname, old_vos[vname].methods, vo.methods)
            _diff_annotations(ops, vname, old_vos[vname].annotations, vo.annotations)

    old_repos = {r.name: r for r in base.repositories}
    new_repos = {r.name: r for r in new.repositories}
    for rname, r in old_repos.items():
        if rname not in new_repos or new_repos[rname].for_aggregate != r.for_aggregate:
            ops.append(
                DeltaOp("RemoveRepository", rname, prior={"repository": {"name": r.name, "forAggregate": r.for_aggregate}})
            )
    for rname, r in new_repos.items():
        if rname not in old_repos or old_repos[rname].for_aggregate != r.for_aggregate:
            ops.append(
                DeltaOp("AddRepository", rname, payload={"repository": {"name": r.name, "forAggregate": r.for_aggregate}})
            )
        else:
            _diff_annotations(ops, rname, old_repos[rname].annotations, r.annotations)

    old_svcs = {s.name: s for s in base.services}
    new_svcs = {s.name: s for s in new.services}
    for sname, s in old_svcs.items():
        if sname not in new_svcs:
            ops.append(
                DeltaOp(
                    "RemoveService", sname, prior={"service": {"name": sname, "methods": [M.method_to_json(m) for m in s.methods]}}
                )
            )
    for sname, s in new_svcs.items():
        if sname not in old_svcs:
            ops.append(
                DeltaOp(
                    "AddService", sname, payload={"service": {"name": sname, "methods": [M.method_to_json(m) for m in s.methods]}}
                )
            )
        else:
            _diff_methods(ops, sname, old_svcs[sname].methods, s.methods)
            _diff_annotations(ops, sname, old_svcs[sname].annotations, s.annotations)

    return DeltaScript(ops)


# ---------------------------------------------------------------------------
# Code-edit plans


def to_code_edits(delta: DeltaScript, base: M.DomainModel, workspace, config=None) -> EditPlan:
    """Translate a delta into a plan of file edits against a workspace that
    was generated from ``base``.

    The plan is derived by building the target workspace (regeneration with
    harvested user regions) and diffing files; untouched files never appear
    in the plan.
    """
    from . import javagen  # local import; javagen depends on this module's EditPlan

    base_hash = M.model_fingerprint(base)
    if workspace.model_hash != base_hash:
        raise StaleWorkspace(f"workspace hash {workspace.model_hash} != base model hash {base_hash}")

    new_model = apply(base, delta)
    target = javagen.regenerate_preserving(new_model, workspace, config)

    edits: list[FileEdit] = []
    preserved: list[str] = []
    for path in sorted(set(workspace.files) | set(target.files)):
        old_text = workspace.files.get(path)
        new_text = target.files.get(path)
        if old_text == new_text:
            continue
        if old_text is None:
            edits.append(FileEdit(path, "create", [Patch("", new_text)]))
        elif new_text is None:
            edits.append(FileEdit(path, "delete", []))
        else:
            anchor = _patch_anchor(old_text)
            edits.append(FileEdit(path, "patch", [Patch(anchor, new_text)]))
            preserved.extend(
                rid for rid in javagen.harvest_regions_text(new_text, path) if rid in javagen.harvest_regions_text(old_text, path)
            )
    return EditPlan(base_hash, edits, preserved)


def _patch_anchor(old_text: str) -> str:
    for line in old_text.splitlines():
        stripped = line.strip()
        if stripped.startswith("// @ddd:") and not stripped.startswith("// @ddd:generated"):
            return stripped
    return old_text.splitlines()[0] if old_text else ""
