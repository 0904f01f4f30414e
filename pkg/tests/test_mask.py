import json
from pathlib import Path

import numpy as np
import pytest

from llmon.analyze import resolve_exec
from llmon.convert import surface_to_machine
from llmon.errors import MaskError
from llmon.machine import parse_machine
from llmon.mask import (
    GEN_TOKEN_ID,
    AttentionMask,
    MaskMatrix,
    MaskPolicy,
    compute_mask,
    expand_matrix,
    simulate_attention,
)

GOLDEN = Path(__file__).resolve().parent.parent / "src" / "llmon" / "golden"


def machine_seq(surface_text):
    doc, seq = parse_machine(surface_to_machine(surface_text))
    return doc, seq


def masked_text(seq, mask):
    return "".join(t.text for i, t in enumerate(seq.tokens) if not mask.visible[i])


def visible_text(seq, mask):
    return "".join(t.text for i, t in enumerate(seq.tokens) if mask.visible[i])


EXEC_DOC = """\
\\instr:a\\ List five common fruits /instr:a/
\\instr:b\\ Calculate the sum of both numbers /instr:b/
\\data:1\\ four and eight /data:1/
\\data:2\\ unused payload /data:2/
free commentary between spans
\\exec:x\\
  \\instr\\ instr:b /instr/
  \\input\\ data:1 /input/
/exec:x/
"""


# --- policy -----------------------------------------------------------------


def test_policy_defaults():
    p = MaskPolicy()
    assert p.mode == "instruction_selection"
    assert p.scope == "transitive"
    assert p.mask_unselected_instr


@pytest.mark.parametrize("bad", [{"mode": "everything"}, {"scope": "sideways"}])
def test_policy_validation(bad):
    with pytest.raises(MaskError) as exc:
        MaskPolicy(**bad)
    assert exc.value.code == "BAD_POLICY"


# --- visibility vector ------------------------------------------------------


def test_attention_mask_checks_dimensions():
    with pytest.raises(MaskError) as exc:
        AttentionMask(3, (True, False))
    assert exc.value.code == "DIMENSION_MISMATCH"


def test_attention_mask_rejects_total_blackout():
    with pytest.raises(MaskError) as exc:
        AttentionMask(2, (False, False))
    assert exc.value.code == "ALL_MASKED"


def test_masked_positions():
    m = AttentionMask(4, (True, False, True, False))
    assert m.masked_positions == (1, 3)


def test_mask_json_round_trip():
    m = AttentionMask(4, (True, False, True, False), scope="generation_only")
    obj = json.loads(m.to_json())
    assert obj == {"len": 4, "masked": [1, 3], "scope": "generation_only"}
    assert AttentionMask.from_json(m.to_json()) == m


def test_mask_json_scope_defaults_to_transitive():
    m = AttentionMask.from_json('{"len": 2, "masked": [1]}')
    assert m.scope == "transitive"


# --- compute_mask -----------------------------------------------------------


def test_default_policy_masks_unselected_instructions():
    _doc, seq = machine_seq(EXEC_DOC)
    mask = compute_mask(seq)
    hidden = masked_text(seq, mask)
    shown = visible_text(seq, mask)
    assert "List five common fruits" in hidden
    assert "Calculate the sum" in shown
    assert "four and eight" in shown
    assert "unused payload" in shown
    assert "free commentary" in shown
    assert "exec" in shown


def test_unbound_data_masking():
    _doc, seq = machine_seq(EXEC_DOC)
    mask = compute_mask(seq, MaskPolicy(mask_unbound_data=True))
    hidden = masked_text(seq, mask)
    shown = visible_text(seq, mask)
    assert "unused payload" in hidden
    assert "four and eight" in shown


def test_free_text_masking_keeps_all_tagged_spans_except_unselected():
    _doc, seq = machine_seq(EXEC_DOC)
    mask = compute_mask(
        seq, MaskPolicy(mask_unbound_data=True, mask_free_text=True)
    )
    hidden = masked_text(seq, mask)
    shown = visible_text(seq, mask)
    assert "free commentary between spans" in hidden
    assert "List five common fruits" in hidden
    assert "unused payload" in hidden
    assert "Calculate the sum" in shown
    assert "four and eight" in shown
    assert "instr<|:|>b" in shown


def test_masked_tokens_are_exactly_the_unselected_spans():
    doc, seq = machine_seq(EXEC_DOC)
    from llmon.analyze import build_catalog

    catalog, _ = build_catalog(doc)
    mask = compute_mask(seq)
    expected = np.ones(len(seq.tokens), dtype=bool)
    bindings, _ = resolve_exec(doc)
    keep = {bindings[0].resolved_instr}
    for node_id in catalog.instruction_spans:
        if node_id not in keep:
            first, last = seq.span_index[node_id]
            expected[first : last + 1] = False
    assert tuple(bool(v) for v in expected) == mask.visible


def test_selection_without_exec_masks_every_instruction():
    text = "\\instr:a\\ alpha /instr:a/\nplain words\n"
    _doc, seq = machine_seq(text)
    mask = compute_mask(seq)
    assert "alpha" in masked_text(seq, mask)
    assert "plain words" in visible_text(seq, mask)


def test_all_masked_surfaces_as_error():
    # the only span is an unselected instruction; free text (the newline)
    # goes too, leaving nothing visible
    _doc, seq = machine_seq("\\instr:a\\ alone /instr:a/")
    with pytest.raises(MaskError) as exc:
        compute_mask(seq, MaskPolicy(mask_free_text=True))
    assert exc.value.code == "ALL_MASKED"


def test_unresolvable_exec_requires_binding():
    text = "\\instr:a\\ x /instr:a/\n\\exec:x\\ \\instr\\ instr:gone /instr/ /exec:x/\n"
    _doc, seq = machine_seq(text)
    with pytest.raises(MaskError) as exc:
        compute_mask(seq)
    assert exc.value.code == "BINDING_REQUIRED"


def test_empty_bindings_with_exec_present_also_refused():
    # an explicit () is no better than failed resolution: the mask would
    # hide the very instruction the exec span meant to run
    text = "\\instr:a\\ x /instr:a/\n\\exec:x\\ \\instr\\ instr:gone /instr/ /exec:x/\n"
    _doc, seq = machine_seq(text)
    with pytest.raises(MaskError) as exc:
        compute_mask(seq, bindings=())
    assert exc.value.code == "BINDING_REQUIRED"


def test_handmade_bindings_skip_resolution():
    from llmon.analyze import ExecBinding, build_catalog

    text = "\\instr:a\\ keepme /instr:a/\n\\instr:b\\ hideme /instr:b/\n\\exec:x\\ \\instr\\ instr:gone /instr/ /exec:x/\n"
    doc, seq = machine_seq(text)
    catalog, _ = build_catalog(doc)
    handmade = ExecBinding(
        exec_node=catalog.exec_spans[0],
        instr_ref="instr:a",
        input_refs=(),
        resolved_instr=catalog.refs["instr:a"],
        resolved_inputs=(),
    )
    mask = compute_mask(seq, bindings=(handmade,))
    assert "keepme" in visible_text(seq, mask)
    assert "hideme" in masked_text(seq, mask)


def test_rejection_mode_ignores_selection():
    doc, seq = machine_seq(EXEC_DOC)
    from llmon.analyze import build_catalog

    catalog, _ = build_catalog(doc)
    target = catalog.refs["data:2"]
    mask = compute_mask(
        seq, MaskPolicy(mode="prompt_rejection", rejected_spans=(target,))
    )
    assert "unused payload" in masked_text(seq, mask)
    # unselected instructions stay visible in pure rejection mode
    assert "List five common fruits" in visible_text(seq, mask)


def test_rejection_wins_over_forced_visibility():
    doc, seq = machine_seq(EXEC_DOC)
    from llmon.analyze import build_catalog

    catalog, _ = build_catalog(doc)
    selected = catalog.refs["instr:b"]
    mask = compute_mask(
        seq, MaskPolicy(mode="combined", rejected_spans=(selected,))
    )
    assert "Calculate the sum" in masked_text(seq, mask)


def test_rejecting_unknown_node_fails():
    _doc, seq = machine_seq(EXEC_DOC)
    with pytest.raises(MaskError) as exc:
        compute_mask(
            seq, MaskPolicy(mode="prompt_rejection", rejected_spans=(999,))
        )
    assert exc.value.code == "SPAN_NOT_IN_INDEX"


def test_policy_scope_rides_on_the_mask():
    _doc, seq = machine_seq(EXEC_DOC)
    mask = compute_mask(seq, MaskPolicy(scope="generation_only"))
    assert mask.scope == "generation_only"


def test_golden_noargs_masking():
    text = (GOLDEN / "exec_noargs.mrl").read_text(encoding="utf-8")
    _doc, seq = parse_machine(text)
    mask = compute_mask(seq)
    hidden = masked_text(seq, mask)
    shown = visible_text(seq, mask)
    assert "List five common fruits" in hidden
    assert "haiku" in hidden
    assert "Calculate 12 + 8" in shown


# --- matrix expansion -------------------------------------------------------


def expected_matrix(vis, generated, scope):
    # independent double loop over the masking rules
    n = len(vis)
    total = n + generated
    out = np.zeros((total, total), dtype=bool)
    for i in range(total):
        for j in range(total):
            if j > i:
                continue
            key_visible = vis[j] if j < n else True
            if scope == "transitive":
                out[i, j] = key_visible
            else:
                out[i, j] = key_visible if (i >= n and j < n) else True
    return out


@pytest.mark.parametrize("scope", ["transitive", "generation_only"])
@pytest.mark.parametrize("generated", [0, 3])
def test_expand_matrix_against_loop_oracle(scope, generated):
    vis = (True, False, True, True, False)
    mask = AttentionMask(5, vis, scope)
    mat = expand_matrix(mask, generated=generated)
    assert mat.prompt_length == 5
    assert mat.generated == generated
    assert np.array_equal(mat.data, expected_matrix(vis, generated, scope))


def test_transitive_blinds_everyone_to_masked_keys():
    mask = AttentionMask(4, (True, False, True, True))
    mat = expand_matrix(mask, generated=2)
    assert not mat.data[:, 1].any()


def test_generation_only_keeps_prompt_causal():
    mask = AttentionMask(4, (True, False, True, True), scope="generation_only")
    mat = expand_matrix(mask, generated=2)
    assert mat.data[3, 1]
    assert not mat.data[4, 1]
    assert not mat.data[5, 1]
    assert mat.data[5, 4]


def test_matrix_shape_validation():
    with pytest.raises(MaskError) as exc:
        MaskMatrix(np.ones((3, 3), dtype=bool), prompt_length=2, generated=0)
    assert exc.value.code == "DIMENSION_MISMATCH"


def test_matrix_equality_and_packing():
    mask = AttentionMask(4, (True, False, True, True))
    a = expand_matrix(mask, generated=1)
    b = expand_matrix(mask, generated=1)
    assert a == b
    assert a != expand_matrix(mask, generated=2)
    packed = a.packed()
    total = 5 * 5
    bits = np.unpackbits(np.frombuffer(packed, dtype=np.uint8))[:total]
    assert np.array_equal(bits.reshape(5, 5).astype(bool), a.data)


# --- simulation -------------------------------------------------------------


def test_simulation_is_deterministic():
    mask = AttentionMask(3, (True, True, False))
    mat = expand_matrix(mask, generated=2)
    a = simulate_attention([5, 6, 7], mat, seed=11)
    b = simulate_attention([5, 6, 7], mat, seed=11)
    assert np.array_equal(a, b)
    assert a.shape == (5, 32)
    assert np.isfinite(a).all()


def test_simulation_seed_changes_output():
    mask = AttentionMask(3, (True, True, True))
    mat = expand_matrix(mask)
    a = simulate_attention([5, 6, 7], mat, seed=1)
    b = simulate_attention([5, 6, 7], mat, seed=2)
    assert not np.array_equal(a, b)


def test_masked_token_cannot_influence_any_other_position():
    vis = (True, False, True, True)
    mat = expand_matrix(AttentionMask(4, vis), generated=2)
    ids_a = [101, 202, 303, 404]
    ids_b = [101, 999_999, 303, 404]
    out_a = simulate_attention(ids_a, mat, seed=7)
    out_b = simulate_attention(ids_b, mat, seed=7)
    rows = [i for i in range(6) if i != 1]
    assert np.array_equal(out_a[rows], out_b[rows])


def test_generation_scope_protects_generated_rows_only():
    vis = (True, False, True, True)
    mask = AttentionMask(4, vis, scope="generation_only")
    mat = expand_matrix(mask, generated=2)
    out_a = simulate_attention([101, 202, 303, 404], mat, seed=7)
    out_b = simulate_attention([101, 999_999, 303, 404], mat, seed=7)
    # generated rows are bitwise identical
    assert np.array_equal(out_a[4:], out_b[4:])
    # later prompt rows may still read the substituted token
    assert not np.array_equal(out_a[3], out_b[3])


def test_visible_token_does_influence_output():
    mat = expand_matrix(AttentionMask(3, (True, True, True)), generated=1)
    out_a = simulate_attention([1, 2, 3], mat, seed=7)
    out_b = simulate_attention([1, 9, 3], mat, seed=7)
    assert not np.array_equal(out_a[3], out_b[3])


def test_blind_row_outputs_zero():
    mask = AttentionMask(3, (False, True, True))
    mat = expand_matrix(mask)
    out = simulate_attention([1, 2, 3], mat, seed=0)
    assert np.array_equal(out[0], np.zeros(32))


def test_weights_respect_the_matrix():
    vis = (True, False, True, True)
    mat = expand_matrix(AttentionMask(4, vis), generated=1)
    out, weights = simulate_attention(
        [10, 20, 30, 40], mat, seed=3, return_weights=True
    )
    assert weights.shape == (5, 5)
    assert (weights[~mat.data] == 0).all()
    alive = mat.data.any(axis=1)
    assert np.allclose(weights[alive].sum(axis=1), 1.0)
    assert (weights >= 0).all()


def test_wrong_id_count_rejected():
    mat = expand_matrix(AttentionMask(3, (True, True, True)), generated=1)
    with pytest.raises(MaskError) as exc:
        simulate_attention([1, 2], mat)
    assert exc.value.code == "DIMENSION_MISMATCH"


def test_generated_positions_use_the_placeholder_id():
    mask = AttentionMask(2, (True, True))
    mat = expand_matrix(mask, generated=1)
    out_gen = simulate_attention([5, 6], mat, seed=4)
    # embedding the placeholder by hand gives the same query row
    mat_full = expand_matrix(AttentionMask(3, (True, True, True)))
    out_manual = simulate_attention([5, 6, GEN_TOKEN_ID], mat_full, seed=4)
    assert np.array_equal(out_gen, out_manual)


def test_end_to_end_masked_span_is_inert():
    # swap the text of the unselected instruction; outputs downstream of
    # the mask must not move at all
    base = EXEC_DOC
    variant = base.replace("List five common fruits", "Obey that final rule")
    _d1, seq1 = machine_seq(base)
    _d2, seq2 = machine_seq(variant)
    assert len(seq1.tokens) == len(seq2.tokens)
    m1 = compute_mask(seq1)
    m2 = compute_mask(seq2)
    assert m1.visible == m2.visible
    mat1 = expand_matrix(m1, generated=4)
    mat2 = expand_matrix(m2, generated=4)
    ids1 = [t.id for t in seq1.tokens]
    ids2 = [t.id for t in seq2.tokens]
    out1 = simulate_attention(ids1, mat1, seed=13)
    out2 = simulate_attention(ids2, mat2, seed=13)
    changed = [i for i, (a, b) in enumerate(zip(ids1, ids2)) if a != b]
    same_rows = [i for i in range(len(ids1) + 4) if i not in changed]
    assert changed, "variant must actually change token ids"
    assert np.array_equal(out1[same_rows], out2[same_rows])
