"""Deterministic Java workspace generation with structure markers and
protected user-code regions.

Every generated file starts with a two-line header; the hash on line 1 is the
content hash of the owning element's canonical slice, so files of unchanged
elements stay byte-identical across incremental syncs.  The workspace-level
model hash lives in ``ddd-manifest.json``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import model as M
from .errors import GenerationRefused, MalformedRegion, StaleWorkspace
from .verifier import ERROR, VerifierConfig, check

MANIFEST_PATH = "ddd-manifest.json"
ORPHAN_PATH = "ddd-orphaned-code.txt"

HEADER_PREFIX = "// @ddd:generated model-hash="
DO_NOT_EDIT = "// DO NOT EDIT outside user-code regions"

REGION_OPEN_RE = re.compile(r"^\s*// <user-code id=([^>]+)>\s*$")
REGION_CLOSE_RE = re.compile(r"^\s*// </user-code>\s*$")
MARKER_RE = re.compile(r"^\s*// @ddd:([a-z-]+):(\S+)((?:\s+\S+=\S+)*)\s*$")

JAVA_PRIMITIVES = {
    "int": "int",
    "decimal": "BigDecimal",
    "string": "String",
    "bool": "boolean",
    "date": "LocalDate",
}
JAVA_IMPORTS = {"BigDecimal": "java.math.BigDecimal", "LocalDate": "java.time.LocalDate", "List": "java.util.List"}


@dataclass
class Workspace:
    files: dict[str, str] = field(default_factory=dict)
    model_hash: str = ""

    def manifest(self) -> Optional[dict]:
        text = self.files.get(MANIFEST_PATH)
        return json.loads(text) if text is not None else None


# ---------------------------------------------------------------------------
# Element enumeration


@dataclass
class _GenUnit:
    path: str
    qname: str
    kind: str
    render: Callable[[Callable[[str], str]], str]


def _java_type(ref: M.TypeRef, multiplicity: str = M.ONE) -> str:
    if ref.is_external:
        base = ref.entity
    else:
        base = JAVA_PRIMITIVES.get(ref.name, ref.name)
    if multiplicity == M.LIST:
        return f"List<{base}>"
    return base


def _imports_for(types: list[str]) -> list[str]:
    needed = set()
    for t in types:
        for token in re.split(r"[<>, ]+", t):
            if token in JAVA_IMPORTS:
                needed.add(JAVA_IMPORTS[token])
    return [f"import {imp};" for imp in sorted(needed)]


def _element_hash(slice_text: str) -> str:
    return hashlib.sha256(slice_text.encode("utf-8")).hexdigest()[:16]


def _header(slice_text: str) -> list[str]:
    return [HEADER_PREFIX + _element_hash(slice_text), DO_NOT_EDIT]


def _field_decl_java(f: M.FieldDecl, final: bool) -> str:
    mod = "private final" if final else "private"
    return f"    {mod} {_java_type(f.type, f.multiplicity)} {f.name};"


def _ctor(class_name: str, fields: list[M.FieldDecl]) -> list[str]:
    params = ", ".join(f"{_java_type(f.type, f.multiplicity)} {f.name}" for f in fields)
    out = [f"    public {class_name}({params}) {{"]
    out.extend(f"        this.{f.name} = {f.name};" for f in fields)
    out.append("    }")
    return out


def _getter(f: M.FieldDecl) -> list[str]:
    cap = f.name[0].upper() + f.name[1:]
    return [
        f"    public {_java_type(f.type, f.multiplicity)} get{cap}() {{",
        f"        return this.{f.name};",
        "    }",
    ]


def _method_java(owner_q: str, m: M.MethodDecl, region: Callable[[str], str]) -> list[str]:
    ret = _java_type(m.return_type) if m.return_type is not None else "void"
    params = ", ".join(f"{_java_type(p.type, p.multiplicity)} {p.name}" for p in m.params)
    vis = "public " if m.visibility == M.PUBLIC else ""
    region_id = f"{owner_q}.{m.name}.body"
    marker = f"    // @ddd:method:{owner_q}.{m.name} visibility={m.visibility} mutates={str(m.mutates).lower()}"
    body = region(region_id)
    return [
        marker,
        f"    {vis}{ret} {m.name}({params}) {{",
        f"        // <user-code id={region_id}>",
        *body.splitlines(),
        "        // </user-code>",
        "    }",
    ]


def default_stub(region_id: str) -> str:
    # bodies are stored verbatim, indentation included
    method = region_id.split(".")[-2]
    return f'        throw new UnsupportedOperationException("TODO: implement {method}");'


def _equals_hashcode(class_name: str, fields: list[M.FieldDecl]) -> list[str]:
    names = ", ".join(f.name for f in fields)
    out = [
        "    @Override",
        "    public boolean equals(Object other) {",
        f"        if (!(other instanceof {class_name})) return false;",
        f"        {class_name} that = ({class_name}) other;",
    ]
    if fields:
        cmp = " && ".join(f"java.util.Objects.equals(this.{f.name}, that.{f.name})" for f in fields)
        out.append(f"        return {cmp};")
    else:
        out.append("        return true;")
    out += [
        "    }",
        "",
        "    @Override",
        "    public int hashCode() {",
        f"        return java.util.Objects.hash({names});",
        "    }",
    ]
    return out


def _package_for(domain: str, aggregate: Optional[str]) -> str:
    parts = [domain.lower()]
    if aggregate:
        parts.append(aggregate.lower())
    return ".".join(parts)


def _path_for(domain: str, aggregate: Optional[str], name: str) -> str:
    parts = ["src", domain.lower()]
    if aggregate:
        parts.append(aggregate.lower())
    parts.append(name + ".java")
    return "/".join(parts)


def _entity_slice(agg: M.Aggregate, ent: M.EntityDecl) -> str:
    out = []
    M._print_entity(out, "", ent)  # canonical element slice for hashing
    return f"aggregate {agg.name}\n" + "\n".join(out)


def _vo_slice(scope: str, vo: M.ValueObject) -> str:
    out = []
    M._print_vo(out, "", vo)
    return f"scope {scope}\n" + "\n".join(out)


def _units(model: M.DomainModel) -> list[_GenUnit]:
    domain = model.name
    units: list[_GenUnit] = []

    for agg in sorted(model.aggregates, key=lambda a: a.name):
        for ent in sorted(agg.entities, key=lambda e: e.name):
            units.append(_entity_unit(domain, agg, ent))
        for vo in sorted(agg.value_objects, key=lambda v: v.name):
            units.append(_vo_unit(domain, agg.name, f"{agg.name}.{vo.name}", vo))
        for ev in sorted(agg.events, key=lambda e: e.name):
            units.append(_event_unit(domain, agg, ev))
        root = agg.root()
        if root is not None:
            id_name = M.implicit_id_name(root.name)
            if model.shared_value_object(id_name) is None:
                units.append(_identifier_unit(domain, agg.name, root.name))
    for vo in sorted(model.value_objects, key=lambda v: v.name):
        units.append(_vo_unit(domain, None, vo.name, vo))
    for repo in sorted(model.repositories, key=lambda r: r.name):
        units.append(_repository_unit(domain, model, repo))
    for svc in sorted(model.services, key=lambda s: s.name):
        units.append(_service_unit(domain, svc))
    return units


def _entity_unit(domain: str, agg: M.Aggregate, ent: M.EntityDecl) -> _GenUnit:
    qname = f"{agg.name}.{ent.name}"
    slice_text = _entity_slice(agg, ent)

    def render(region: Callable[[str], str]) -> str:
        all_fields = ([ent.id_field] if ent.id_field is not None else []) + list(ent.fields)
        types = [_java_type(f.type, f.multiplicity) for f in all_fields]
        for m in ent.methods:
            types += [_java_type(p.type, p.multiplicity) for p in m.params]
            if m.return_type:
                types.append(_java_type(m.return_type))
        lines = _header(slice_text)
        lines.append(f"package {_package_for(domain, agg.name)};")
        lines.append("")
        imports = _imports_for(types)
        if imports:
            lines.extend(imports)
            lines.append("")
        if ent.is_root:
            lines.append(f"// @ddd:aggregate:{agg.name}")
        lines.append(f"// @ddd:entity:{qname} root={str(ent.is_root).lower()}")
        lines.append(f"public class {ent.name} {{")
        for i, f in enumerate(all_fields):
            lines.append(_field_decl_java(f, final=(i == 0 and ent.id_field is not None)))
        lines.append("")
        lines.extend(_ctor(ent.name, all_fields))
        for f in all_fields:
            lines.append("")
            lines.extend(_getter(f))
        for m in ent.methods:
            lines.append("")
            lines.extend(_method_java(qname, m, region))
        lines.append("}")
        return "\n".join(lines) + "\n"

    return _GenUnit(_path_for(domain, agg.name, ent.name), qname, "entity", render)


def _vo_unit(domain: str, agg_name: Optional[str], qname: str, vo: M.ValueObject) -> _GenUnit:
    slice_text = _vo_slice(agg_name or "", vo)

    def render(region: Callable[[str], str]) -> str:
        types = [_java_type(f.type, f.multiplicity) for f in vo.fields]
        for m in vo.methods:
            types += [_java_type(p.type, p.multiplicity) for p in m.params]
            if m.return_type:
                types.append(_java_type(m.return_type))
        lines = _header(slice_text)
        lines.append(f"package {_package_for(domain, agg_name)};")
        lines.append("")
        imports = _imports_for(types)
        if imports:
            lines.extend(imports)
            lines.append("")
        lines.append(f"// @ddd:valueobject:{qname}")
        lines.append(f"public final class {vo.name} {{")
        for f in vo.fields:
            lines.append(_field_decl_java(f, final=True))
        lines.append("")
        lines.extend(_ctor(vo.name, vo.fields))
        for f in vo.fields:
            lines.append("")
            lines.extend(_getter(f))
        for m in vo.methods:
            lines.append("")
            lines.extend(_method_java(qname, m, region))
        lines.append("")
        lines.extend(_equals_hashcode(vo.name, vo.fields))
        lines.append("}")
        return "\n".join(lines) + "\n"

    return _GenUnit(_path_for(domain, agg_name, vo.name), qname, "valueobject", render)


def _identifier_unit(domain: str, agg_name: str, root_name: str) -> _GenUnit:
    id_name = M.implicit_id_name(root_name)
    slice_text = f"identifier {id_name} of {agg_name}"

    def render(region: Callable[[str], str]) -> str:
        lines = _header(slice_text)
        lines.append(f"package {_package_for(domain, None)};")
        lines.append("")
        lines.append(f"// @ddd:valueobject:{id_name} identifier-of={agg_name}")
        lines.append(f"public final class {id_name} {{")
        lines.append("    private final String value;")
        lines.append("")
        lines.extend(_ctor(id_name, [M.FieldDecl("value", M.TypeRef("string"))]))
        lines.append("")
        lines.extend(_getter(M.FieldDecl("value", M.TypeRef("string"))))
        lines.append("")
        lines.extend(_equals_hashcode(id_name, [M.FieldDecl("value", M.TypeRef("string"))]))
        lines.append("}")
        return "\n".join(lines) + "\n"

    return _GenUnit(_path_for(domain, None, id_name), id_name, "identifier", render)


def _event_unit(domain: str, agg: M.Aggregate, ev: M.DomainEvent) -> _GenUnit:
    qname = f"{agg.name}.{ev.name}"
    out: list[str] = []
    for f in ev.fields:
        M._print_field(out, "", f)
    slice_text = f"event {qname}\n" + "\n".join(out)

    def render(region: Callable[[str], str]) -> str:
        types = [_java_type(f.type, f.multiplicity) for f in ev.fields]
        lines = _header(slice_text)
        lines.append(f"package {_package_for(domain, agg.name)};")
        lines.append("")
        imports = _imports_for(types)
        if imports:
            lines.extend(imports)
            lines.append("")
        lines.append(f"// @ddd:event:{qname}")
        lines.append(f"public final class {ev.name} {{")
        for f in ev.fields:
            lines.append(_field_decl_java(f, final=True))
        lines.append("")
        lines.extend(_ctor(ev.name, ev.fields))
        for f in ev.fields:
            lines.append("")
            lines.extend(_getter(f))
        lines.append("}")
        return "\n".join(lines) + "\n"

    return _GenUnit(_path_for(domain, agg.name, ev.name), qname, "event", render)


def _repository_unit(domain: str, model: M.DomainModel, repo: M.Repository) -> _GenUnit:
    slice_text = f"repository {repo.name} for {repo.for_aggregate}"
    agg = model.aggregate(repo.for_aggregate)
    root = agg.root() if agg else None
    root_name = root.name if root else repo.for_aggregate
    id_type = root.id_field.type.name if (root and root.id_field) else M.implicit_id_name(root_name)

    def render(region: Callable[[str], str]) -> str:
        lines = _header(slice_text)
        lines.append(f"package {_package_for(domain, None)};")
        lines.append("")
        lines.append(f"// @ddd:repository:{repo.name} for={repo.for_aggregate}")
        lines.append(f"public interface {repo.name} {{")
        lines.append(f"    {root_name} findById({id_type} id);")
        lines.append(f"    void save({root_name} aggregate);")
        lines.append(f"    void delete({id_type} id);")
        lines.append("}")
        return "\n".join(lines) + "\n"

    return _GenUnit(_path_for(domain, None, repo.name), repo.name, "repository", render)


def _service_unit(domain: str, svc: M.DomainService) -> _GenUnit:
    out: list[str] = []
    for m in svc.methods:
        M._print_method(out, "", m)
    slice_text = f"service {svc.name}\n" + "\n".join(out)

    def render(region: Callable[[str], str]) -> str:
        types = []
        for m in svc.methods:
            types += [_java_type(p.type, p.multiplicity) for p in m.params]
            if m.return_type:
                types.append(_java_type(m.return_type))
        lines = _header(slice_text)
        lines.append(f"package {_package_for(domain, None)};")
        lines.append("")
        imports = _imports_for(types)
        if imports:
            lines.extend(imports)
            lines.append("")
        lines.append(f"// @ddd:service:{svc.name}")
        lines.append(f"public class {svc.name} {{")
        for m in svc.methods:
            lines.append("")
            lines.extend(_method_java(svc.name, m, region))
        lines.append("}")
        return "\n".join(lines) + "\n"

    return _GenUnit(_path_for(domain, None, svc.name), svc.name, "service", render)


# ---------------------------------------------------------------------------
# Generation


def _generate_with_regions(
    model: M.DomainModel,
    region: Callable[[str], str],
    config: Optional[VerifierConfig] = None,
) -> Workspace:
    diagnostics = check(model, config)
    hard = [d for d in diagnostics if d.severity == ERROR]
    if hard:
        raise GenerationRefused(hard)

    ws = Workspace(model_hash=M.model_fingerprint(model))
    manifest_files = []
    for unit in _units(model):
        ws.files[unit.path] = unit.render(region)
        manifest_files.append({"path": unit.path, "element": unit.qname})
    manifest = {
        "modelHash": ws.model_hash,
        "domainName": model.name,
        "modelText": M.canonical_print(model),
        "files": manifest_files,
    }
    ws.files[MANIFEST_PATH] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    return ws


def generate(model: M.DomainModel, config: Optional[VerifierConfig] = None) -> Workspace:
    """Fresh deterministic workspace for a model with no error diagnostics."""
    return _generate_with_regions(model, default_stub, config)


# ---------------------------------------------------------------------------
# Regions


def harvest_regions_text(text: str, path: str) -> dict[str, str]:
    regions: dict[str, str] = {}
    current: Optional[str] = None
    buf: list[str] = []
    open_line = 0
    for i, line in enumerate(text.splitlines(), start=1):
        m = REGION_OPEN_RE.match(line)
        if m:
            if current is not None:
                raise MalformedRegion(path, i, "nested region opening")
            current = m.group(1)
            open_line = i
            if current in regions:
                raise MalformedRegion(path, i, f"duplicate region id {current}")
            buf = []
            continue
        if REGION_CLOSE_RE.match(line):
            if current is None:
                raise MalformedRegion(path, i, "closing marker without opening")
            regions[current] = "\n".join(buf)
            current = None
            continue
        if current is not None:
            buf.append(line)
    if current is not None:
        raise MalformedRegion(path, open_line, "unclosed region")
    return regions


def harvest_regions(workspace: Workspace) -> dict[str, str]:
    """Current content of every protected region, keyed by region id."""
    regions: dict[str, str] = {}
    for path in sorted(workspace.files):
        if not path.endswith(".java"):
            continue
        for rid, content in harvest_regions_text(workspace.files[path], path).items():
            if rid in regions:
                raise MalformedRegion(path, 1, f"region id {rid} appears in multiple files")
            regions[rid] = content
    return regions


def regenerate_preserving(
    model: M.DomainModel, old: Workspace, config: Optional[VerifierConfig] = None
) -> Workspace:
    """Full regeneration that re-injects harvested user regions; regions of
    deleted elements are archived, not silently dropped."""
    harvested = harvest_regions(old)

    def region(region_id: str) -> str:
        if region_id in harvested:
            return harvested.pop(region_id)
        return default_stub(region_id)

    ws = _generate_with_regions(model, region, config)

    orphans = {rid: content for rid, content in harvested.items() if content != default_stub(rid)}
    archive = old.files.get(ORPHAN_PATH, "")
    if orphans:
        chunks = [archive] if archive else []
        for rid in sorted(orphans):
            chunks.append(f"// orphaned region {rid}\n{orphans[rid]}\n")
        archive = "\n".join(chunks)
    if archive:
        ws.files[ORPHAN_PATH] = archive
    return ws


# ---------------------------------------------------------------------------
# Edit plans


def apply_edit_plan(workspace: Workspace, plan) -> Workspace:
    """Apply an EditPlan produced against this workspace's model hash."""
    if plan.base_model_hash != workspace.model_hash:
        raise StaleWorkspace(
            f"plan was built against model hash {plan.base_model_hash}, workspace has {workspace.model_hash}"
        )
    files = dict(workspace.files)
    for edit in plan.file_edits:
        if edit.action == "create":
            files[edit.path] = edit.patches[0].replacement
        elif edit.action == "delete":
            files.pop(edit.path, None)
        elif edit.action == "patch":
            old_text = files.get(edit.path)
            if old_text is None:
                raise StaleWorkspace(f"patch target {edit.path} missing from workspace")
            for patch in edit.patches:
                if patch.anchor and patch.anchor not in old_text:
                    raise StaleWorkspace(f"anchor not found in {edit.path}: {patch.anchor!r}")
                files[edit.path] = patch.replacement
    result = Workspace(files=files)
    manifest = result.manifest()
    result.model_hash = manifest["modelHash"] if manifest else workspace.model_hash
    return result
