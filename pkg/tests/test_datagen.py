import io
import json

import pytest

from llmon.analyze import build_catalog, resolve_exec
from llmon.datagen import (
    DistractorInstance,
    SftRecord,
    emit_dataset,
    llmonize,
    load_sft_jsonl,
    make_distractor_instance,
    write_jsonl,
)
from llmon.errors import DatagenError
from llmon.machine import parse_machine
from llmon.model import Scalar, Tagged
from llmon.surface import parse_surface

POOL = [
    SftRecord("Summarize the passage", "A long passage about tides.", "Tides, short."),
    SftRecord("Translate to German", "good morning", "guten Morgen"),
    SftRecord("List three colors", None, "red, green, blue"),
    SftRecord("Count the words", "one two three", "3"),
    SftRecord("Rhyme with cat", None, "hat"),
    SftRecord("Uppercase the input", "abc", "ABC"),
    SftRecord("Name a prime number", None, "7"),
]


# --- records ----------------------------------------------------------------


def test_empty_input_collapses_to_none():
    assert SftRecord("do", "").input is None
    assert SftRecord("do", None).input is None
    assert SftRecord("do", "x").input == "x"


def test_load_sft_jsonl():
    buf = io.StringIO(
        '{"instruction": "a", "input": "b", "output": "c"}\n'
        "\n"
        '{"instruction": "d"}\n'
    )
    records = load_sft_jsonl(buf)
    assert records == [SftRecord("a", "b", "c"), SftRecord("d", None, "")]


def test_load_sft_jsonl_field_map():
    buf = io.StringIO('{"task": "a", "context": "b", "answer": "c"}\n')
    records = load_sft_jsonl(
        buf, {"instruction": "task", "input": "context", "output": "answer"}
    )
    assert records == [SftRecord("a", "b", "c")]


def test_load_sft_jsonl_coerces_to_text():
    buf = io.StringIO('{"instruction": 5, "input": 6, "output": 7}\n')
    assert load_sft_jsonl(buf) == [SftRecord("5", "6", "7")]


@pytest.mark.parametrize(
    "line",
    ["not json", '{"no_instruction": 1}', "[1, 2]"],
)
def test_load_sft_jsonl_bad_records(line):
    with pytest.raises(DatagenError) as exc:
        load_sft_jsonl(io.StringIO(line + "\n"))
    assert exc.value.code == "BAD_RECORD"
    assert "line 1" in str(exc.value)


# --- single-record structuring ----------------------------------------------


def test_llmonize_with_input():
    doc = llmonize(SftRecord("Count words", "a b c", "3"))
    paths = [str(n.tag) for n in doc.nodes() if isinstance(n, Tagged)]
    assert paths == ["instr:a", "data:1", "exec:x", "exec:x.instr", "exec:x.input"]
    bindings, report = resolve_exec(doc)
    assert report.findings == ()
    assert bindings[0].instr_ref == "instr:a"
    assert bindings[0].input_refs == ("data:1",)


def test_llmonize_without_input():
    doc = llmonize(SftRecord("List colors", None, "red"))
    paths = [str(n.tag) for n in doc.nodes() if isinstance(n, Tagged)]
    assert paths == ["instr:a", "exec:x", "exec:x.instr"]
    bindings, _ = resolve_exec(doc)
    assert bindings[0].input_refs == ()


def test_llmonize_output_stays_out_of_the_prompt():
    doc = llmonize(SftRecord("do", "in", "SECRET_ANSWER"))
    raws = [n.raw for n in doc.nodes() if isinstance(n, Scalar)]
    assert not any("SECRET_ANSWER" in r for r in raws)


def test_llmonize_round_trips_both_syntaxes():
    from llmon.convert import flatten
    from llmon.machine import print_machine
    from llmon.surface import print_surface

    doc = llmonize(SftRecord("Count words", "a b c", "3"))
    assert parse_surface(print_surface(doc)) == doc
    assert parse_machine(print_machine(doc))[0] == flatten(doc)


# --- distractor instances ---------------------------------------------------


def test_distractor_instance_shape():
    inst = make_distractor_instance(POOL, k=3, seed=5)
    assert isinstance(inst, DistractorInstance)
    assert len(inst.distractor_refs) == 3
    assert inst.focus_ref not in inst.distractor_refs
    assert inst.seed == 5
    catalog, report = build_catalog(inst.document)
    assert report.findings == ()
    assert inst.focus_ref in catalog.refs
    for ref in inst.distractor_refs:
        assert ref in catalog.refs


def test_distractor_instance_is_deterministic():
    a = make_distractor_instance(POOL, k=3, seed=9)
    b = make_distractor_instance(POOL, k=3, seed=9)
    assert a == b
    c = make_distractor_instance(POOL, k=3, seed=10)
    assert a != c


def test_labels_follow_document_order():
    for seed in range(12):
        inst = make_distractor_instance(POOL, k=4, seed=seed)
        instr_labels = [
            n.tag.last.instance
            for n in inst.document.nodes()
            if isinstance(n, Tagged) and n.tag.head == "instr" and n.tag.last.instance
        ]
        assert instr_labels == [chr(ord("a") + i) for i in range(5)]


def test_focus_position_varies_with_seed():
    positions = set()
    for seed in range(30):
        inst = make_distractor_instance(POOL, k=4, seed=seed)
        positions.add(inst.focus_ref)
    assert len(positions) > 1


def test_exec_selects_the_focus():
    for seed in range(10):
        inst = make_distractor_instance(POOL, k=3, seed=seed)
        bindings, report = resolve_exec(inst.document)
        assert report.findings == ()
        assert len(bindings) == 1
        assert bindings[0].instr_ref == inst.focus_ref


def test_focus_input_is_bound_when_present():
    catalog_hits = 0
    for seed in range(40):
        inst = make_distractor_instance(POOL, k=3, seed=seed)
        bindings, _ = resolve_exec(inst.document)
        catalog, _ = build_catalog(inst.document)
        focus_instr_node = inst.document.node_at(catalog.refs[inst.focus_ref])
        focus_text = focus_instr_node.children[0].raw
        rec = next(r for r in POOL if r.instruction == focus_text)
        if rec.input is None:
            assert bindings[0].input_refs == ()
        else:
            assert len(bindings[0].input_refs) == 1
            bound = inst.document.node_at(bindings[0].resolved_inputs[0])
            assert bound.children[0].raw == rec.input
            catalog_hits += 1
    assert catalog_hits > 0


def test_unbound_distractor_input_appears_sometimes():
    with_extra = 0
    for seed in range(60):
        inst = make_distractor_instance(POOL, k=3, seed=seed)
        catalog, _ = build_catalog(inst.document)
        bindings, _ = resolve_exec(inst.document)
        n_data = len(catalog.data_spans)
        n_bound = len(bindings[0].resolved_inputs)
        assert n_data - n_bound in (0, 1)
        if n_data - n_bound == 1:
            with_extra += 1
    # probability one half per eligible instance; sixty draws cannot all miss
    assert with_extra > 0


def test_data_ids_are_numeric_in_document_order():
    for seed in range(20):
        inst = make_distractor_instance(POOL, k=4, seed=seed)
        data_ids = [
            n.tag.last.instance
            for n in inst.document.nodes()
            if isinstance(n, Tagged) and n.tag.head == "data" and n.tag.last.instance
        ]
        assert data_ids == [str(i + 1) for i in range(len(data_ids))]


def test_expected_output_matches_focus_record():
    inst = make_distractor_instance(POOL, k=3, seed=4)
    catalog, _ = build_catalog(inst.document)
    focus_node = inst.document.node_at(catalog.refs[inst.focus_ref])
    rec = next(r for r in POOL if r.instruction == focus_node.children[0].raw)
    assert inst.expected_output == rec.output


def test_bad_k_rejected():
    with pytest.raises(DatagenError) as exc:
        make_distractor_instance(POOL, k=0, seed=1)
    assert exc.value.code == "BAD_K"


def test_pool_too_small_rejected():
    with pytest.raises(DatagenError) as exc:
        make_distractor_instance(POOL[:3], k=3, seed=1)
    assert exc.value.code == "POOL_TOO_SMALL"


def test_pool_exactly_large_enough():
    inst = make_distractor_instance(POOL[:4], k=3, seed=1)
    assert len(inst.distractor_refs) == 3


# --- dataset emission -------------------------------------------------------


def test_emit_dataset_rows():
    rows = list(emit_dataset(POOL, count=5, k=2, seed=100))
    assert len(rows) == 5
    seeds = [r["seed"] for r in rows]
    assert seeds == [100, 101, 102, 103, 104]
    for row in rows:
        assert set(row) == {
            "mrllmon", "llmon", "focus", "distractors", "expected_output", "seed",
        }
        surface_doc = parse_surface(row["llmon"])
        machine_doc = parse_machine(row["mrllmon"])[0]
        assert machine_doc == surface_doc
        catalog, report = build_catalog(surface_doc)
        assert report.findings == ()
        assert row["focus"] in catalog.refs
        assert len(row["distractors"]) == 2


def test_emit_dataset_is_reproducible():
    a = list(emit_dataset(POOL, count=3, k=2, seed=7))
    b = list(emit_dataset(POOL, count=3, k=2, seed=7))
    assert a == b


def test_write_jsonl():
    rows = list(emit_dataset(POOL, count=3, k=2, seed=0))
    buf = io.StringIO()
    n = write_jsonl(rows, buf)
    assert n == 3
    lines = buf.getvalue().splitlines()
    assert len(lines) == 3
    assert [json.loads(line) for line in lines] == rows
