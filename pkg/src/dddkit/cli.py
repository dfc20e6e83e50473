"""Command-line entry point.

Exit codes: 0 clean, 1 error diagnostics, 2 parse/usage/IO failure,
3 divergent mirror or round trip.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import click

from . import delta as D
from . import frontend, javagen, mirror
from . import model as M
from . import verifier as V
from .errors import DddError, GenerationRefused, StaleWorkspace


def _color_enabled() -> bool:
    return "DDD_NO_COLOR" not in os.environ and sys.stdout.isatty()


def _style(text: str, **kw) -> str:
    return click.style(text, **kw) if _color_enabled() else text


SEVERITY_COLORS = {"error": "red", "warning": "yellow", "info": "cyan"}


def load_config(start: Path) -> dict:
    """Walk up from `start` looking for ddd.toml; {} when absent.

    Paths in the config resolve relative to the config file's directory.
    """
    directory = start if start.is_dir() else start.parent
    for candidate in [directory, *directory.parents]:
        cfg_path = candidate / "ddd.toml"
        if cfg_path.is_file():
            with open(cfg_path, "rb") as fh:
                cfg = tomllib.load(fh)
            cfg["_dir"] = candidate
            return cfg
    return {}


def verifier_config(cfg: dict) -> V.VerifierConfig:
    rules = cfg.get("rules", {})
    return V.VerifierConfig(
        disabled_rules=set(rules.get("disabled", [])),
        small_aggregate_threshold=int(rules.get("small_aggregate_threshold", 5)),
    )


def _read_model(model_path: str) -> M.DomainModel:
    try:
        text = Path(model_path).read_text()
    except OSError as exc:
        click.echo(f"error: cannot read {model_path}: {exc.strerror}", err=True)
        sys.exit(2)
    try:
        return frontend.parse(text, model_path)
    except frontend.ParseFailure as exc:
        for e in exc.errors:
            click.echo(_style(f"{e.span.file}:{e.span.start_line}:{e.span.start_col}: {e.message}", fg="red"), err=True)
        sys.exit(2)


def _print_diagnostics(diags, as_json: bool):
    if as_json:
        click.echo(json.dumps([d.to_json() for d in diags], indent=2))
        return
    for d in diags:
        loc = f"{d.span.file}:{d.span.start_line}:{d.span.start_col}"
        sev = _style(d.severity, fg=SEVERITY_COLORS.get(d.severity, "white"))
        line = f"{loc}: {sev} {d.rule_id} [{d.subject}] {d.message}"
        if d.suppressed_by:
            line += f" (suppressed: {d.suppressed_by})"
        click.echo(line)
        for r in d.repairs:
            click.echo(f"    repair {r.id}: {r.title}")


def _write_workspace(ws: javagen.Workspace, out_dir: Path):
    for rel, content in sorted(ws.files.items()):
        target = out_dir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content)
    # drop files we own that the new workspace no longer contains
    for existing in out_dir.rglob("*"):
        if not existing.is_file():
            continue
        rel = existing.relative_to(out_dir).as_posix()
        if rel not in ws.files and (rel.endswith(".java") or rel in (javagen.MANIFEST_PATH, javagen.ORPHAN_PATH)):
            existing.unlink()


def _read_workspace(out_dir: Path) -> javagen.Workspace:
    files = {}
    if not out_dir.is_dir():
        click.echo(f"error: no workspace at {out_dir}", err=True)
        sys.exit(2)
    for path in out_dir.rglob("*"):
        if path.is_file():
            rel = path.relative_to(out_dir).as_posix()
            if rel.endswith(".java") or rel in (javagen.MANIFEST_PATH, javagen.ORPHAN_PATH):
                files[rel] = path.read_text()
    manifest = None
    if javagen.MANIFEST_PATH in files:
        try:
            manifest = json.loads(files[javagen.MANIFEST_PATH])
        except json.JSONDecodeError:
            manifest = None
    model_hash = manifest.get("modelHash", "") if manifest else ""
    return javagen.Workspace(files=files, model_hash=model_hash)


@click.group()
def main():
    """Tactical DDD modeling toolchain."""


@main.command()
@click.argument("model_path")
@click.option("--json", "as_json", is_flag=True, help="emit diagnostics as JSON")
def check(model_path, as_json):
    """Parse, well-formedness check and verify a model."""
    model = _read_model(model_path)
    cfg = load_config(Path(model_path).resolve())
    try:
        diags = V.check(model, verifier_config(cfg))
    except DddError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    _print_diagnostics(diags, as_json)
    sys.exit(1 if any(d.severity == V.ERROR for d in diags) else 0)


@main.command()
@click.argument("model_path")
@click.option("--out", "out_dir", default=None, help="output directory")
def generate(model_path, out_dir):
    """Generate a fresh Java workspace from a model."""
    model = _read_model(model_path)
    cfg = load_config(Path(model_path).resolve())
    out = _resolve_out(cfg, out_dir)
    try:
        ws = javagen.generate(model, verifier_config(cfg))
    except GenerationRefused as exc:
        _print_diagnostics(exc.diagnostics, False)
        sys.exit(1)
    _write_workspace(ws, out)
    click.echo(f"generated {len(ws.files)} files into {out}")
    sys.exit(0)


def _resolve_out(cfg: dict, out_dir) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if "out" in cfg:
        return Path(cfg["_dir"]) / cfg["out"]
    return Path("out")


@main.command()
@click.argument("model_path")
@click.option("--out", "out_dir", default=None, help="output directory")
def sync(model_path, out_dir):
    """Regenerate the workspace for the current model, keeping user code."""
    model = _read_model(model_path)
    cfg = load_config(Path(model_path).resolve())
    out = _resolve_out(cfg, out_dir)
    ws = _read_workspace(out)
    vcfg = verifier_config(cfg)
    manifest = ws.manifest()
    base = None
    if manifest and "modelText" in manifest:
        try:
            base = frontend.parse(manifest["modelText"], "<manifest>")
        except frontend.ParseFailure:
            base = None
    try:
        if base is None:
            raise StaleWorkspace("manifest missing or unreadable")
        script = D.diff(base, model)
        plan = D.to_code_edits(script, base, ws, vcfg)
        new_ws = javagen.apply_edit_plan(ws, plan)
    except StaleWorkspace as exc:
        click.echo(_style(f"warning: workspace is stale ({exc}); falling back to full regeneration", fg="yellow"), err=True)
        try:
            new_ws = javagen.regenerate_preserving(model, ws, vcfg)
        except GenerationRefused as gexc:
            _print_diagnostics(gexc.diagnostics, False)
            sys.exit(1)
    except GenerationRefused as exc:
        _print_diagnostics(exc.diagnostics, False)
        sys.exit(1)
    _write_workspace(new_ws, out)
    click.echo(f"synchronized {out}")
    sys.exit(0)


@main.command()
@click.argument("old_path")
@click.argument("new_path")
def diff(old_path, new_path):
    """Print the delta script turning OLD_PATH into NEW_PATH."""
    old = _read_model(old_path)
    new = _read_model(new_path)
    script = D.diff(old, new)
    click.echo(json.dumps(script.to_json(), indent=2))
    sys.exit(0)


@main.command("mirror")
@click.argument("model_path")
@click.option("--out", "out_dir", default=None, help="workspace directory")
@click.option("--adopt", is_flag=True, help="print a proposal delta instead of the report")
def mirror_cmd(model_path, out_dir, adopt):
    """Reconcile a workspace against the authoritative model."""
    model = _read_model(model_path)
    cfg = load_config(Path(model_path).resolve())
    ws = _read_workspace(_resolve_out(cfg, out_dir))
    mirrored = mirror.parse_java(ws)
    report = mirror.reconcile(model, mirrored)
    if adopt:
        try:
            proposal = D.diff(model, mirrored.model)
        except DddError as exc:
            click.echo(f"error: cannot build adoption proposal: {exc}", err=True)
            sys.exit(2)
        click.echo(json.dumps(proposal.to_json(), indent=2))
    else:
        click.echo(json.dumps(report.to_json(), indent=2))
    sys.exit(0 if report.status == "consistent" else 3)


@main.command()
@click.argument("model_path")
def roundtrip(model_path):
    """Generate, mirror back and reconcile in memory."""
    model = _read_model(model_path)
    cfg = load_config(Path(model_path).resolve())
    try:
        ok = mirror.roundtrip_check(model, verifier_config(cfg))
    except GenerationRefused as exc:
        _print_diagnostics(exc.diagnostics, False)
        sys.exit(1)
    click.echo("consistent" if ok else "divergent")
    sys.exit(0 if ok else 3)


@main.command()
@click.argument("model_path")
@click.option("--port", default=8437, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(model_path, port, host):
    """Serve the JSON API for the model studio."""
    import uvicorn

    from .server import create_app

    if not Path(model_path).is_file():
        click.echo(f"error: cannot read {model_path}", err=True)
        sys.exit(2)
    cfg = load_config(Path(model_path).resolve())
    app = create_app(Path(model_path), verifier_config(cfg))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
