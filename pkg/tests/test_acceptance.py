"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest -v tests/test_acceptance.py` for the per-criterion report.
"""

import copy
import json
import random
import re
import shutil
import time
from pathlib import Path

import pytest
from click.testing import CliRunner

from conftest import CORPUS, TUTORIAL
from dddkit import delta as D
from dddkit import frontend, javagen, mirror
from dddkit import model as M
from dddkit import verifier as V
from dddkit.cli import main as cli_main

from modelgen import random_model, random_pair

SEEDED_RULES = {"S2", "S3", "S4", "S5", "S6", "S7", "S8b", "B1", "R1"}


def _report(criterion: int, ok: bool, detail: str):
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _corpus_cases():
    for path in sorted(CORPUS.glob("*.ddd")):
        text = path.read_text()
        expected = {(m.group(1), m.group(2)) for m in re.finditer(r"// expect: (\S+) (\S+)", text)}
        suppressed = {(m.group(1), m.group(2)) for m in re.finditer(r"// expect-suppressed: (\S+) (\S+)", text)}
        yield path, text, expected, suppressed


def test_criterion_1_corpus_precision_recall():
    start = time.time()
    files = 0
    per_rule: dict[str, int] = {}
    mismatches = []
    for path, text, expected, suppressed in _corpus_cases():
        files += 1
        model = frontend.parse(text, str(path))
        diags = V.check(model)
        got = {(d.rule_id, d.subject) for d in diags if d.severity in (V.ERROR, V.WARNING)}
        got_sup = {(d.rule_id, d.subject) for d in diags if d.suppressed_by}
        if got != expected or got_sup != suppressed:
            mismatches.append((path.name, expected, got))
        for rule, _ in expected | suppressed:
            per_rule[rule] = per_rule.get(rule, 0) + 1
    elapsed = time.time() - start
    thin = {r for r in SEEDED_RULES if per_rule.get(r, 0) < 2}
    ok = files >= 22 and not mismatches and not thin and elapsed < 5.0
    _report(
        1,
        ok,
        f"{files} corpus files, precision=recall={'1.0' if not mismatches else '<1.0'}, "
        f"seeded coverage ok={not thin}, {elapsed:.2f}s" + (f", mismatches={mismatches}" if mismatches else ""),
    )


def test_criterion_2_repair_soundness():
    attempted = 0
    failures = []
    for path, text, expected, _ in _corpus_cases():
        model = frontend.parse(text, str(path))
        diags = V.check(model)
        error_count = sum(1 for d in diags if d.severity == V.ERROR)
        for d in diags:
            for repair in d.repairs:
                attempted += 1
                repaired = V.apply_repair(model, d, repair.id)
                after = V.check(repaired)
                if any(x.rule_id == d.rule_id and x.subject == d.subject for x in after):
                    failures.append((path.name, d.rule_id, d.subject, repair.id, "diagnostic survived"))
                new_errors = sum(1 for x in after if x.severity == V.ERROR)
                if new_errors > error_count:
                    failures.append((path.name, d.rule_id, d.subject, repair.id, "introduced errors"))
    ok = attempted > 0 and not failures
    _report(2, ok, f"{attempted} repairs applied, {len(failures)} unsound" + (f": {failures[:3]}" if failures else ""))


def _owner_element(model, subject):
    head = subject.split(".")[0]
    agg = model.aggregate(head)
    if agg is not None:
        return agg
    for vo in model.value_objects:
        if vo.name == head:
            return vo
    for svc in model.services:
        if svc.name == head:
            return svc
    for repo in model.repositories:
        if repo.name == head:
            return repo
    return None


def test_criterion_3_override_semantics():
    descriptors = {r.id: r for r in V.rules()}
    checked = 0
    failures = []
    for path, text, expected, _ in _corpus_cases():
        base = frontend.parse(text, str(path))
        for rule, subject in sorted(expected):
            checked += 1
            model = copy.deepcopy(base)
            owner = _owner_element(model, subject)
            owner.annotations.append(M.OverrideAnnotation(rule, "accepted for this release"))
            diags = V.check(model)
            target = [d for d in diags if d.rule_id == rule and d.subject == subject]
            if descriptors[rule].overridable:
                if not (target and target[0].severity == V.INFO and target[0].suppressed_by):
                    failures.append((path.name, rule, subject, "not downgraded"))
                # nothing else may change severity
                others_before = {
                    (d.rule_id, d.subject, d.severity)
                    for d in V.check(base)
                    if not (d.rule_id == rule and d.subject.startswith(owner.name))
                }
                others_after = {
                    (d.rule_id, d.subject, d.severity)
                    for d in diags
                    if not (d.rule_id == rule and d.subject.startswith(owner.name))
                }
                if others_before != others_after:
                    failures.append((path.name, rule, subject, "collateral change"))
            else:
                if not (target and target[0].severity == V.ERROR):
                    failures.append((path.name, rule, subject, "non-overridable rule was overridden"))
            # disabling the rule always removes the finding
            disabled = V.check(base, V.VerifierConfig(disabled_rules={rule}))
            if any(d.rule_id == rule for d in disabled):
                failures.append((path.name, rule, subject, "disable did not remove"))
    ok = checked > 0 and not failures
    _report(3, ok, f"{checked} override scenarios, {len(failures)} failed" + (f": {failures[:3]}" if failures else ""))


def test_criterion_4_generator_mirror_round_trip():
    start = time.time()
    models = [frontend.parse(TUTORIAL.read_text(), str(TUTORIAL))]
    models += [random_model(random.Random(seed)) for seed in range(100)]
    bad = 0
    for m in models:
        mirrored = mirror.parse_java(javagen.generate(m))
        if mirrored.unrecognized or not M.model_equals(mirrored.model, m):
            bad += 1
    elapsed = time.time() - start
    ok = bad == 0 and elapsed < 30.0
    _report(4, ok, f"{len(models)} models round-tripped, {bad} failed, {elapsed:.2f}s")


def test_criterion_5_diff_apply_oracle():
    start = time.time()
    bad = 0
    for seed in range(1000):
        a, b = random_pair(random.Random(seed))
        if not M.model_equals(D.apply(a, D.diff(a, b)), b):
            bad += 1
    elapsed = time.time() - start
    _report(5, bad == 0, f"1000 diff/apply pairs, {bad} failed, {elapsed:.2f}s")


REGION_EDITS = {
    "src/ordering/order/Order.java": [
        ('throw new UnsupportedOperationException("TODO: implement addLine");', "this.lines.add(line);"),
        ('throw new UnsupportedOperationException("TODO: implement totalFor");', "return this.total;"),
    ],
    "src/ordering/order/Money.java": [
        (
            'throw new UnsupportedOperationException("TODO: implement add");',
            "return new Money(this.amount.add(other.getAmount()), this.currency);",
        ),
    ],
}

MODEL_EDITS = [
    ("field total: Money\n      field lines", "field total: Money\n      field note: string\n      field lines"),
    ("method totalFor(currency: string): Money", "method totalFor(currency: string): Money\n      method cancel() mutates"),
    ("event OrderPlaced {", "event OrderDrafted {\n      field orderId: OrderId\n    }\n    event OrderPlaced {"),
    ("repository OrderRepository for Order", "repository OrderRepository for Order\n\n  value Coupon {\n    field code: string\n  }"),
    ("method priceOf(order: OrderId): decimal", "method priceOf(order: OrderId): decimal\n    method surcharge(): decimal"),
]

UNTOUCHED = [
    "src/ordering/customer/Customer.java",
    "src/ordering/CustomerId.java",
    "src/ordering/OrderRepository.java",
    "src/ordering/order/OrderLine.java",
]


def test_criterion_6_manual_logic_preservation(tmp_path):
    runner = CliRunner()
    model_path = tmp_path / "ordering.ddd"
    shutil.copy(TUTORIAL, model_path)
    out = tmp_path / "gen"
    result = runner.invoke(cli_main, ["generate", str(model_path), "--out", str(out)], env={"DDD_NO_COLOR": "1"})
    assert result.exit_code == 0, result.output

    edited_bodies = []
    for rel, edits in REGION_EDITS.items():
        f = out / rel
        text = f.read_text()
        for old, new in edits:
            assert old in text
            text = text.replace(old, new)
            edited_bodies.append(new)
        f.write_text(text)

    untouched_before = {rel: (out / rel).read_text() for rel in UNTOUCHED}

    text = model_path.read_text()
    for old, new in MODEL_EDITS:
        assert old in text, old
        text = text.replace(old, new, 1)
        model_path.write_text(text)
        result = runner.invoke(cli_main, ["sync", str(model_path), "--out", str(out)], env={"DDD_NO_COLOR": "1"})
        assert result.exit_code == 0, result.output

    problems = []
    workspace_text = {rel: (out / rel).read_text() for rel in REGION_EDITS}
    for rel, edits in REGION_EDITS.items():
        for _, new in edits:
            if new not in workspace_text[rel]:
                problems.append(f"lost edit in {rel}: {new!r}")
    for rel, before in untouched_before.items():
        if (out / rel).read_text() != before:
            problems.append(f"untouched file changed: {rel}")
    _report(6, not problems, f"3 region edits through 5 sync runs; {problems or 'all preserved'}")


def test_criterion_7_multi_round_trip_stability(tmp_path):
    runner = CliRunner()
    model_path = tmp_path / "ordering.ddd"
    shutil.copy(TUTORIAL, model_path)
    out = tmp_path / "gen"
    runner.invoke(cli_main, ["generate", str(model_path), "--out", str(out)], env={"DDD_NO_COLOR": "1"})

    cycle_edits = [
        ("field name: string", "field name: string\n      field nick1: string"),
        ("field nick1: string", "field nick1: string\n      field nick2: string"),
        ("field quantity: int", "field quantity: int\n      field sku: string"),
        ("field amount: decimal", "field amount: decimal\n      field scale: int"),
        ("field nick2: string", "field nick2: string\n      field nick3: string"),
    ]
    findings_per_cycle = []
    for old, new in cycle_edits:
        text = model_path.read_text()
        assert old in text, old
        model_path.write_text(text.replace(old, new, 1))
        result = runner.invoke(cli_main, ["sync", str(model_path), "--out", str(out)], env={"DDD_NO_COLOR": "1"})
        assert result.exit_code == 0, result.output
        result = runner.invoke(cli_main, ["mirror", str(model_path), "--out", str(out)], env={"DDD_NO_COLOR": "1"})
        report = json.loads(result.output)
        findings_per_cycle.append(len(report["findings"]))
        assert result.exit_code == 0, report
    ok = findings_per_cycle == [0, 0, 0, 0, 0]
    _report(7, ok, f"5 edit/sync/mirror cycles, findings per cycle: {findings_per_cycle}")


def _mutate(ws, mutation):
    ws = javagen.Workspace(files=dict(ws.files), model_hash=ws.model_hash)
    if mutation == "delete id field":
        path, subject = "src/ordering/order/Order.java", "Order.Order"
        ws.files[path] = ws.files[path].replace("    private final OrderId id;\n", "")
    elif mutation == "rename field":
        path, subject = "src/ordering/customer/Customer.java", "Customer.Customer.email"
        ws.files[path] = ws.files[path].replace("private String email;", "private String mail;")
    elif mutation == "delete method":
        path, subject = "src/ordering/order/Order.java", "Order.Order.totalFor"
        text = ws.files[path]
        start = text.index("    // @ddd:method:Order.Order.totalFor")
        end = text.index("}", text.index("// </user-code>", start)) + 2
        ws.files[path] = text[:start] + text[end:]
    elif mutation == "strip marker":
        path, subject = "src/ordering/order/Money.java", "Order.Money"
        ws.files[path] = re.sub(r"// @ddd:valueobject.*\n", "", ws.files[path])
    elif mutation == "add unmanaged setter":
        path, subject = "src/ordering/order/OrderLine.java", "setQuantity"
        text = ws.files[path]
        closing = text.rstrip().rfind("}")
        ws.files[path] = (
            text[:closing]
            + "    public void setQuantity(int quantity) {\n        this.quantity = quantity;\n    }\n"
            + text[closing:]
        )
    return ws, subject


def test_criterion_8_divergence_detection(tutorial):
    base = javagen.generate(tutorial)
    mutations = ["delete id field", "rename field", "delete method", "strip marker", "add unmanaged setter"]
    misses = []
    for mutation in mutations:
        ws, subject = _mutate(base, mutation)
        report = mirror.reconcile(tutorial, mirror.parse_java(ws))
        named = [f for f in report.findings if subject in f.subject or (f.path and subject in f.path)]
        if report.status != "divergent" or not named:
            misses.append((mutation, [f.to_json() for f in report.findings]))
    _report(8, not misses, f"{len(mutations)} mutation classes detected" + (f"; missed {misses}" if misses else ""))


def test_criterion_9_determinism(tutorial):
    problems = []
    for label, model in [("tutorial", tutorial)] + [
        (p.name, frontend.parse(p.read_text(), str(p))) for p in sorted(CORPUS.glob("*.ddd"))[:5]
    ]:
        try:
            ws1 = javagen.generate(model)
            ws2 = javagen.generate(copy.deepcopy(model))
            if ws1.files != ws2.files:
                problems.append(f"generate nondeterministic on {label}")
        except Exception:
            pass  # corpus violations refuse generation; check still must be stable
        d1 = [d.to_json() for d in V.check(model)]
        d2 = [d.to_json() for d in V.check(copy.deepcopy(model))]
        if d1 != d2:
            problems.append(f"check nondeterministic on {label}")
    _report(9, not problems, problems and str(problems) or "generate and check byte-/list-identical")
