"""Code-to-model direction: statically parse a generated-style workspace back
into a model and reconcile it against the authoritative model.

The recognizer is the inverse of the generator's layout contract: structure
markers identify elements, declaration lines carry fields and signatures, and
user-code regions are opaque.  Anything else is reported, never guessed at.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import model as M
from .javagen import (
    MANIFEST_PATH,
    MARKER_RE,
    ORPHAN_PATH,
    REGION_CLOSE_RE,
    REGION_OPEN_RE,
    Workspace,
    generate,
)

_FIELD_RE = re.compile(r"^\s*private (?:final )?([\w.]+(?:<[\w.]+>)?) (\w+);\s*$")
_METHOD_RE = re.compile(r"^\s*(?:(public|protected|private) )?([\w.]+(?:<[\w.]+>)?) (\w+)\((.*)\) \{\s*$")
_IFACE_METHOD_RE = re.compile(r"^\s*([\w.]+(?:<[\w.]+>)?) (\w+)\((.*)\);\s*$")
_CLASS_RE = re.compile(r"^\s*public (?:final )?(?:class|interface) (\w+) \{\s*$")

_JAVA_TO_MODEL = {
    "int": "int",
    "BigDecimal": "decimal",
    "String": "string",
    "boolean": "bool",
    "LocalDate": "date",
}

_PLUMBING_NAMES = {"equals", "hashCode", "toString"}


@dataclass
class Unrecognized:
    path: str
    line: int
    reason: str
    subject: str = ""


@dataclass
class MirroredModel:
    model: M.DomainModel
    provenance: dict[str, tuple[str, int]] = field(default_factory=dict)
    unrecognized: list[Unrecognized] = field(default_factory=list)


@dataclass
class Finding:
    kind: str  # MissingInCode | MissingInModel | SignatureMismatch | IdentifierFieldMissing | MarkerCorrupted
    subject: str
    path: Optional[str] = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "path": self.path, "detail": self.detail}


@dataclass
class ConsistencyReport:
    status: str  # consistent | divergent
    findings: list[Finding] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"status": self.status, "findings": [f.to_json() for f in self.findings]}


def _java_type_to_ref(java_type: str) -> tuple[M.TypeRef, str]:
    mult = M.ONE
    m = re.fullmatch(r"List<(.+)>", java_type)
    if m:
        mult = M.LIST
        java_type = m.group(1)
    name = _JAVA_TO_MODEL.get(java_type, java_type)
    return M.TypeRef(name), mult


def _parse_params(params: str) -> list[M.FieldDecl]:
    out = []
    params = params.strip()
    if not params:
        return out
    # generated signatures never nest commas except inside List<...>
    parts = re.split(r",\s*(?![^<]*>)", params)
    for part in parts:
        tokens = part.strip().rsplit(" ", 1)
        if len(tokens) != 2:
            continue
        ref, mult = _java_type_to_ref(tokens[0])
        out.append(M.FieldDecl(tokens[1], ref, mult))
    return out


class _FileParse:
    def __init__(self, path: str, text: str, mirrored: MirroredModel):
        self.path = path
        self.lines = text.splitlines()
        self.mirrored = mirrored
        self.kind: Optional[str] = None
        self.qname: Optional[str] = None
        self.attrs: dict[str, str] = {}
        self.is_root = False
        self.class_name: Optional[str] = None
        self.fields: list[M.FieldDecl] = []
        self.methods: list[M.MethodDecl] = []
        self.marker_line = 0

    def unrecognize(self, line_no: int, reason: str, subject: str = ""):
        self.mirrored.unrecognized.append(Unrecognized(self.path, line_no, reason, subject))

    def run(self):
        pending_method_marker: Optional[tuple[str, dict[str, str]]] = None
        in_region = False
        for i, line in enumerate(self.lines, start=1):
            if REGION_OPEN_RE.match(line):
                in_region = True
                continue
            if REGION_CLOSE_RE.match(line):
                in_region = False
                continue
            if in_region:
                continue

            stripped = line.strip()
            if stripped.startswith("// @ddd:"):
                if stripped.startswith("// @ddd:generated "):
                    continue  # file header, carries no structure
                m = MARKER_RE.match(line)
                if m is None:
                    self.unrecognize(i, "corrupted structure marker", self.qname or "")
                    continue
                kind, qname, attr_text = m.group(1), m.group(2), m.group(3) or ""
                attrs = dict(pair.split("=", 1) for pair in attr_text.split())
                if kind == "generated":
                    continue
                if kind == "aggregate":
                    self.is_root = True
                    continue
                if kind == "method":
                    pending_method_marker = (qname, attrs)
                    continue
                self.kind = kind
                self.qname = qname
                self.attrs = attrs
                self.marker_line = i
                if kind == "entity":
                    self.is_root = self.is_root or attrs.get("root") == "true"
                continue

            m = _CLASS_RE.match(line)
            if m:
                self.class_name = m.group(1)
                continue
            m = _FIELD_RE.match(line)
            if m:
                ref, mult = _java_type_to_ref(m.group(1))
                self.fields.append(M.FieldDecl(m.group(2), ref, mult))
                continue
            m = _METHOD_RE.match(line)
            if m:
                vis_mod, ret_type, name, params = m.groups()
                if pending_method_marker is not None:
                    qname, attrs = pending_method_marker
                    pending_method_marker = None
                    ret = None
                    if ret_type != "void":
                        ret, _ = _java_type_to_ref(ret_type)
                    self.methods.append(
                        M.MethodDecl(
                            name,
                            _parse_params(params),
                            ret,
                            attrs.get("visibility", M.PUBLIC),
                            attrs.get("mutates") == "true",
                        )
                    )
                    continue
                if self.class_name and name == self.class_name:
                    continue  # constructor
                if name.startswith("get") and not params.strip():
                    continue  # generated getter
                if name in _PLUMBING_NAMES:
                    continue
                owner = self.qname or (self.class_name or self.path)
                self.unrecognize(i, f"unmanaged method declaration '{name}'", f"{owner}.{name}")
                continue


def parse_java(workspace: Workspace) -> MirroredModel:
    """Reconstruct a model from a generated-style workspace.

    Never raises: files that cannot be recognized land in ``unrecognized``.
    """
    manifest = workspace.manifest() or {}
    domain_name = manifest.get("domainName")
    if domain_name is None:
        for path in workspace.files:
            parts = path.split("/")
            if len(parts) >= 2 and parts[0] == "src":
                domain_name = parts[1]
                break
    model = M.DomainModel(domain_name or "Unknown")
    mirrored = MirroredModel(model)

    def aggregate(name: str) -> M.Aggregate:
        agg = model.aggregate(name)
        if agg is None:
            agg = M.Aggregate(name)
            model.aggregates.append(agg)
        return agg

    for path in sorted(workspace.files):
        if not path.endswith(".java"):
            continue
        fp = _FileParse(path, workspace.files[path], mirrored)
        fp.run()
        if fp.kind is None:
            mirrored.unrecognized.append(Unrecognized(path, 1, "no recognizable structure marker", path))
            continue
        if fp.kind == "valueobject" and "identifier-of" in fp.attrs:
            continue  # derived identifier type, rematerialized from the model
        parts = fp.qname.split(".")
        mirrored.provenance[fp.qname] = (path, fp.marker_line)
        if fp.kind == "entity":
            agg = aggregate(parts[0])
            id_field = next((f for f in fp.fields if f.name == "id"), None)
            ent = M.EntityDecl(
                parts[1],
                fp.is_root,
                id_field,
                [f for f in fp.fields if f.name != "id"],
                fp.methods,
            )
            agg.entities.append(ent)
        elif fp.kind == "valueobject":
            vo = M.ValueObject(parts[-1], fp.fields, fp.methods)
            if len(parts) == 2:
                aggregate(parts[0]).value_objects.append(vo)
            else:
                model.value_objects.append(vo)
        elif fp.kind == "event":
            aggregate(parts[0]).events.append(M.DomainEvent(parts[1], fp.fields))
        elif fp.kind == "repository":
            model.repositories.append(M.Repository(fp.qname, fp.attrs.get("for", "")))
        elif fp.kind == "service":
            model.services.append(M.DomainService(fp.qname, fp.methods))
        else:
            mirrored.unrecognized.append(Unrecognized(path, fp.marker_line, f"unknown marker kind '{fp.kind}'", fp.qname))
    return mirrored


# ---------------------------------------------------------------------------
# Reconciliation


def _field_sig(f: M.FieldDecl) -> str:
    return f.type_text()


def _method_sig(m: M.MethodDecl) -> str:
    params = ", ".join(f"{p.name}: {p.type_text()}" for p in m.params)
    ret = f": {m.return_type.text()}" if m.return_type else ""
    flags = (" mutates" if m.mutates else "")
    return f"{m.visibility} {m.name}({params}){ret}{flags}"


def _compare_members(findings: list[Finding], owner_q: str, auth_owner, code_owner, provenance):
    path = provenance.get(owner_q, (None, 0))[0]
    auth_fields = {f.name: f for f in getattr(auth_owner, "fields", [])}
    code_fields = {f.name: f for f in getattr(code_owner, "fields", [])}
    for name, f in auth_fields.items():
        if name not in code_fields:
            findings.append(Finding("MissingInCode", f"{owner_q}.{name}", path, "field missing from code"))
        elif _field_sig(f) != _field_sig(code_fields[name]):
            findings.append(
                Finding(
                    "SignatureMismatch",
                    f"{owner_q}.{name}",
                    path,
                    f"model declares {_field_sig(f)}, code has {_field_sig(code_fields[name])}",
                )
            )
    for name in code_fields:
        if name not in auth_fields:
            findings.append(Finding("MissingInModel", f"{owner_q}.{name}", path, "field only exists in code"))

    auth_methods = {m.name: m for m in getattr(auth_owner, "methods", [])}
    code_methods = {m.name: m for m in getattr(code_owner, "methods", [])}
    for name, m in auth_methods.items():
        if name not in code_methods:
            findings.append(Finding("MissingInCode", f"{owner_q}.{name}", path, "method missing from code"))
        elif _method_sig(m) != _method_sig(code_methods[name]):
            findings.append(
                Finding(
                    "SignatureMismatch",
                    f"{owner_q}.{name}",
                    path,
                    f"model declares {_method_sig(m)}, code has {_method_sig(code_methods[name])}",
                )
            )
    for name in code_methods:
        if name not in auth_methods:
            findings.append(Finding("MissingInModel", f"{owner_q}.{name}", path, "method only exists in code"))

    # ordered-list semantics: same members in a different order is a mismatch
    if set(auth_fields) == set(code_fields) and list(auth_fields) != list(code_fields):
        findings.append(Finding("SignatureMismatch", owner_q, path, "field order differs"))
    if set(auth_methods) == set(code_methods) and list(auth_methods) != list(code_methods):
        findings.append(Finding("SignatureMismatch", owner_q, path, "method order differs"))


def reconcile(authoritative: M.DomainModel, mirrored: MirroredModel) -> ConsistencyReport:
    findings: list[Finding] = []
    code = mirrored.model
    prov = mirrored.provenance

    for u in mirrored.unrecognized:
        findings.append(Finding("MarkerCorrupted", u.subject or u.path, u.path, u.reason))

    if authoritative.name != code.name:
        findings.append(
            Finding("SignatureMismatch", authoritative.name, None, f"domain is named '{code.name}' in code")
        )

    auth_aggs = {a.name: a for a in authoritative.aggregates}
    code_aggs = {a.name: a for a in code.aggregates}
    for name, agg in auth_aggs.items():
        if name not in code_aggs:
            findings.append(Finding("MissingInCode", name, None, "aggregate missing from code"))
            continue
        cagg = code_aggs[name]
        auth_ents = {e.name: e for e in agg.entities}
        code_ents = {e.name: e for e in cagg.entities}
        for ename, ent in auth_ents.items():
            q = f"{name}.{ename}"
            if ename not in code_ents:
                findings.append(Finding("MissingInCode", q, None, "entity missing from code"))
                continue
            cent = code_ents[ename]
            if ent.is_root != cent.is_root:
                findings.append(Finding("SignatureMismatch", q, prov.get(q, (None,))[0], "root flag differs"))
            if ent.id_field is not None and cent.id_field is None:
                findings.append(
                    Finding("IdentifierFieldMissing", q, prov.get(q, (None,))[0], "identifier field missing from code")
                )
            elif ent.id_field is not None and cent.id_field is not None:
                if _field_sig(ent.id_field) != _field_sig(cent.id_field):
                    findings.append(
                        Finding(
                            "SignatureMismatch",
                            f"{q}.id",
                            prov.get(q, (None,))[0],
                            f"identifier typed {_field_sig(cent.id_field)} in code",
                        )
                    )
            _compare_members(findings, q, ent, cent, prov)
        for ename in code_ents:
            if ename not in auth_ents:
                findings.append(Finding("MissingInModel", f"{name}.{ename}", prov.get(f"{name}.{ename}", (None,))[0]))

        def pair(kind_label, auth_items, code_items):
            a = {x.name: x for x in auth_items}
            c = {x.name: x for x in code_items}
            for n in a:
                if n not in c:
                    findings.append(Finding("MissingInCode", f"{name}.{n}", None, f"{kind_label} missing from code"))
            for n in c:
                if n not in a:
                    findings.append(
                        Finding("MissingInModel", f"{name}.{n}", prov.get(f"{name}.{n}", (None,))[0])
                    )
            return [(a[n], c[n]) for n in a if n in c]

        for avo, cvo in pair("value object", agg.value_objects, cagg.value_objects):
            _compare_members(findings, f"{name}.{avo.name}", avo, cvo, prov)
        for aev, cev in pair("event", agg.events, cagg.events):
            _compare_members(findings, f"{name}.{aev.name}", aev, cev, prov)
    for name in code_aggs:
        if name not in auth_aggs:
            findings.append(Finding("MissingInModel", name, None, "aggregate only exists in code"))

    auth_vos = {v.name: v for v in authoritative.value_objects if v.is_identifier_of is None}
    code_vos = {v.name: v for v in code.value_objects if v.is_identifier_of is None}
    for n, v in auth_vos.items():
        if n not in code_vos:
            findings.append(Finding("MissingInCode", n, None, "value object missing from code"))
        else:
            _compare_members(findings, n, v, code_vos[n], prov)
    for n in code_vos:
        if n not in auth_vos:
            findings.append(Finding("MissingInModel", n, prov.get(n, (None,))[0]))

    auth_repos = {r.name: r for r in authoritative.repositories}
    code_repos = {r.name: r for r in code.repositories}
    for n, r in auth_repos.items():
        if n not in code_repos:
            findings.append(Finding("MissingInCode", n, None, "repository missing from code"))
        elif r.for_aggregate != code_repos[n].for_aggregate:
            findings.append(
                Finding("SignatureMismatch", n, prov.get(n, (None,))[0], f"repository targets '{code_repos[n].for_aggregate}' in code")
            )
    for n in code_repos:
        if n not in auth_repos:
            findings.append(Finding("MissingInModel", n, prov.get(n, (None,))[0]))

    auth_svcs = {s.name: s for s in authoritative.services}
    code_svcs = {s.name: s for s in code.services}
    for n, s in auth_svcs.items():
        if n not in code_svcs:
            findings.append(Finding("MissingInCode", n, None, "service missing from code"))
        else:
            _compare_members(findings, n, s, code_svcs[n], prov)
    for n in code_svcs:
        if n not in auth_svcs:
            findings.append(Finding("MissingInModel", n, prov.get(n, (None,))[0]))

    status = "consistent" if not findings else "divergent"
    return ConsistencyReport(status, findings)


def roundtrip_check(model: M.DomainModel, config=None) -> bool:
    """Generate, mirror back and reconcile; true iff fully consistent."""
    ws = generate(model, config)
    return reconcile(model, parse_java(ws)).status == "consistent"
