"""Acceptance gate: one test per headline guarantee, each with a pinned
runtime budget. Every test prints its own pass line with the measured time
(visible under -s; the -v verdict line is the canonical pass/fail signal).
"""

import copy
import dataclasses
import json
import random
import time
from pathlib import Path

import numpy as np
import pytest

from llmon import (
    Document,
    SftRecord,
    build_catalog,
    compute_mask,
    detokenize,
    expand_matrix,
    flatten,
    json_to_llmon,
    lint,
    llmon_to_json,
    make_distractor_instance,
    parse_machine,
    parse_surface,
    parse_tag_path,
    print_machine,
    print_surface,
    resolve_exec,
    simulate_attention,
    surface_to_machine,
    tokenize,
)
from llmon.machine import DEFAULT_REGISTRY
from llmon.randgen import rand_document, rand_json_text, rand_special_soup

GOLDEN = Path(__file__).resolve().parent.parent / "src" / "llmon" / "golden"
GOLDEN_NAMES = (
    "llmon_intro",
    "exec_noargs",
    "exec_1arg",
    "prompt_injection",
    "json_llmon",
    "email",
)

POOL = tuple(
    SftRecord(instruction=instr, input=inp, output=out)
    for instr, inp, out in [
        ("List five common fruits", None, "apple, pear, plum, fig, grape"),
        ("Calculate the sum of both numbers", "4 and 8", "12"),
        ("Translate the word into French", "cheese", "fromage"),
        ("Write a haiku about the ocean", None, "Waves fold into foam"),
        ("Count the words in the sentence", "the quick brown fox", "4"),
        ("Name the capital of the country", "Japan", "Tokyo"),
        ("Summarize the text in one sentence", "A long report about tides.", "Tides."),
        ("Reverse the given string", "stressed", "desserts"),
    ]
)


def norm(text: str) -> str:
    return " ".join(text.split())


def budget(name: str, started: float, limit: float) -> None:
    elapsed = time.perf_counter() - started
    print(f"PASS {name}: {elapsed:.2f}s (budget {limit:.0f}s)")
    assert elapsed < limit, f"{name} took {elapsed:.2f}s, budget is {limit}s"


def test_golden_figures_parse_lint_and_convert_faithfully():
    t0 = time.perf_counter()
    for name in GOLDEN_NAMES:
        text = (GOLDEN / f"{name}.lmn").read_text(encoding="utf-8")
        doc = parse_surface(text)
        report = lint(doc)
        assert not report.findings, f"{name}: {report.human()}"
        mrl = GOLDEN / f"{name}.mrl"
        if mrl.exists():
            assert norm(surface_to_machine(text)) == norm(
                mrl.read_text(encoding="utf-8")
            ), f"{name}: machine form drifted"
    json_doc = parse_surface((GOLDEN / "json_llmon.lmn").read_text(encoding="utf-8"))
    expected = json.loads((GOLDEN / "json_llmon.json").read_text(encoding="utf-8"))
    assert json.loads(llmon_to_json(json_doc)) == expected
    budget("golden fidelity", t0, 1.0)


def test_json_round_trip_1000_documents():
    t0 = time.perf_counter()
    for seed in range(1000):
        src = rand_json_text(seed)
        out = llmon_to_json(json_to_llmon(src))
        assert json.loads(out) == json.loads(src), f"seed {seed}"

    # Floats that could read as something else keep an explicit cast.
    gpa = json_to_llmon('{"GPA": 3.4}')
    assert "float" in print_surface(gpa)
    assert json.loads(llmon_to_json(gpa)) == {"GPA": 3.4}
    budget("json round trip", t0, 10.0)


def test_syntax_round_trips_500_documents():
    t0 = time.perf_counter()
    for seed in range(500):
        doc = rand_document(seed)
        assert parse_surface(print_surface(doc)) == doc, f"surface, seed {seed}"
        assert parse_machine(print_machine(doc))[0] == doc, f"machine, seed {seed}"
        flat = flatten(doc)
        assert flatten(flat) is flat, f"flatten not idempotent, seed {seed}"
    budget("syntax round trips", t0, 10.0)


def test_special_tokens_stay_atomic_over_500_texts():
    t0 = time.perf_counter()
    texts = [rand_special_soup(seed, DEFAULT_REGISTRY) for seed in range(250)]
    texts += [print_machine(rand_document(seed)) for seed in range(250)]
    assert len(texts) == 500
    for text in texts:
        tokens = tokenize(text)
        for sid, special in enumerate(DEFAULT_REGISTRY.strings):
            emitted = sum(1 for t in tokens if t.is_special and t.id == sid)
            assert emitted == text.count(special), (special, text)
        assert detokenize(tokens) == text
    budget("special-token atomicity", t0, 5.0)


def test_mask_isolation_over_200_distractor_instances():
    t0 = time.perf_counter()
    generated = 3
    for i in range(200):
        k = 1 + i % 5
        inst = make_distractor_instance(POOL, k, seed=i)
        doc, seq = parse_machine(print_machine(inst.document))
        catalog, _ = build_catalog(doc)
        mask = compute_mask(seq)
        focus_id = catalog.refs[inst.focus_ref]

        # Not a single token of any unselected instruction leaks through.
        for node_id in catalog.instruction_spans:
            if node_id == focus_id:
                continue
            first, last = seq.span_index[node_id]
            assert not any(mask.visible[first : last + 1]), (i, node_id)

        # Under transitive scope the generated positions cannot depend on
        # what the masked tokens actually say: swap them all out and the
        # outputs stay bit-identical.
        assert mask.scope == "transitive"
        matrix = expand_matrix(mask, generated=generated)
        ids = [t.id for t in seq.tokens]
        rng = random.Random(i)
        subbed = list(ids)
        for pos in mask.masked_positions:
            subbed[pos] = 1000 + rng.randrange(2**31)
        out_a = simulate_attention(ids, matrix, seed=11)
        out_b = simulate_attention(subbed, matrix, seed=11)
        n = len(ids)
        assert (out_a[n:] == out_b[n:]).all(), f"instance {i} leaked"
    budget("mask isolation", t0, 30.0)


def test_distractor_resolution_100_of_100():
    t0 = time.perf_counter()
    solved = 0
    for i in range(100):
        inst = make_distractor_instance(POOL, k=1 + i % 5, seed=10_000 + i)
        doc, _seq = parse_machine(print_machine(inst.document))
        catalog, _ = build_catalog(doc)
        bindings, report = resolve_exec(doc, catalog)
        assert not report.findings, f"instance {i}: {report.human()}"
        assert len(bindings) == 1
        if bindings[0].resolved_instr == catalog.refs[inst.focus_ref]:
            solved += 1
    assert solved == 100, f"recovered focus on {solved}/100 instances"
    budget("distractor resolution", t0, 10.0)


def _rename_instance(doc: Document, node_id: int) -> Document:
    node = doc.node_at(node_id)
    assert node in doc.roots, "mutation expects a top-level target"
    segs = node.tag.segments
    renamed_text = ".".join(
        [s.serialize() for s in segs[:-1]] + [f"{segs[-1].name}:zz"]
    )
    renamed = dataclasses.replace(node, tag=parse_tag_path(renamed_text))
    return Document(tuple(renamed if r is node else r for r in doc.roots))


def test_lint_mutations_are_detected_exactly_once():
    t0 = time.perf_counter()
    renameable = set()
    duplicable = set()
    for name in GOLDEN_NAMES:
        doc = parse_surface((GOLDEN / f"{name}.lmn").read_text(encoding="utf-8"))
        bindings, _ = resolve_exec(doc)

        if bindings:
            renameable.add(name)
            mutated = _rename_instance(doc, bindings[0].resolved_instr)
            codes = [f.code for f in lint(mutated).findings]
            assert codes.count("DANGLING_REF") == 1, (name, codes)
            assert [c for c in codes if c != "DANGLING_REF"] == [], (name, codes)

        instanced = [
            n for n in doc.nodes()
            if hasattr(n, "tag") and n.tag.last.instance is not None
        ]
        if instanced:
            duplicable.add(name)
            mutated = Document(doc.roots + (copy.deepcopy(instanced[0]),))
            codes = [f.code for f in lint(mutated).findings]
            assert codes.count("DUP_INSTANCE") == 1, (name, codes)
            assert [c for c in codes if c != "DUP_INSTANCE"] == [], (name, codes)

    assert renameable == {"exec_noargs", "exec_1arg", "prompt_injection"}
    assert duplicable == renameable | {"email"}
    budget("lint mutations", t0, 5.0)
