"""Token-level attention masking driven by document structure.

A mask policy turns a machine-form token sequence plus its exec bindings
into a per-token visibility vector, then into a full attention matrix a
transformer layer could consume. ``simulate_attention`` runs one
deterministic attention layer so tests can show that masked spans cannot
influence the output at all.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from llmon.analyze import DEFAULT_VOCAB, ExecBinding, TagVocabulary, build_catalog, resolve_exec
from llmon.errors import MaskError
from llmon.machine import TokenSequence

__all__ = [
    "GEN_TOKEN_ID",
    "MaskPolicy",
    "AttentionMask",
    "MaskMatrix",
    "compute_mask",
    "expand_matrix",
    "simulate_attention",
]

# Placeholder id for not-yet-sampled generated positions.
GEN_TOKEN_ID = 999


@dataclass(frozen=True)
class MaskPolicy:
    """What becomes invisible, and to whom.

    mode selects the masking goal: instruction_selection hides unselected
    instructions, prompt_rejection hides explicitly rejected spans,
    combined does both. scope "transitive" blinds every later token to a
    masked one; "generation_only" blinds only generated positions.
    """

    mode: str = "instruction_selection"
    mask_unselected_instr: bool = True
    mask_unbound_data: bool = False
    mask_free_text: bool = False
    rejected_spans: tuple[int, ...] = ()
    scope: str = "transitive"

    def __post_init__(self) -> None:
        if self.mode not in ("instruction_selection", "prompt_rejection", "combined"):
            raise MaskError("BAD_POLICY", f"unknown mode {self.mode!r}")
        if self.scope not in ("transitive", "generation_only"):
            raise MaskError("BAD_POLICY", f"unknown scope {self.scope!r}")


@dataclass(frozen=True)
class AttentionMask:
    """Per-token visibility over a prompt of sequence_length tokens."""

    sequence_length: int
    visible: tuple[bool, ...]
    scope: str = "transitive"

    def __post_init__(self) -> None:
        if len(self.visible) != self.sequence_length:
            raise MaskError(
                "DIMENSION_MISMATCH",
                f"visibility has {len(self.visible)} entries for "
                f"{self.sequence_length} tokens",
            )
        if self.sequence_length > 0 and not any(self.visible):
            raise MaskError("ALL_MASKED", "every prompt token is masked")

    @property
    def masked_positions(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.visible) if not v)

    def to_json(self) -> str:
        return json.dumps(
            {
                "len": self.sequence_length,
                "masked": list(self.masked_positions),
                "scope": self.scope,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "AttentionMask":
        obj = json.loads(text)
        masked = set(obj["masked"])
        vis = tuple(i not in masked for i in range(obj["len"]))
        return cls(obj["len"], vis, obj.get("scope", "transitive"))


def _span_tokens(seq: TokenSequence, node_id: int) -> tuple[int, int]:
    rng = seq.span_index.get(node_id)
    if rng is None:
        raise MaskError("SPAN_NOT_IN_INDEX", f"node {node_id} has no token span")
    return rng


def compute_mask(
    seq: TokenSequence,
    policy: MaskPolicy = MaskPolicy(),
    bindings: tuple[ExecBinding, ...] | None = None,
    vocab: TagVocabulary = DEFAULT_VOCAB,
) -> AttentionMask:
    """Derive the visibility vector for one machine token sequence.

    Passes run in a fixed order: start all-visible, hide unselected
    instructions, hide unbound data, hide free text, force the selected
    instruction / bound inputs / exec spans back on, and apply explicit
    rejections last so they always win.
    """
    doc = seq.document
    catalog, _report = build_catalog(doc, vocab)
    if bindings is None:
        bindings, _exec_report = resolve_exec(doc, catalog, vocab)

    n = len(seq.tokens)
    visible = np.ones(n, dtype=bool)

    def paint(node_id: int, value: bool) -> None:
        first, last = _span_tokens(seq, node_id)
        visible[first : last + 1] = value

    selection = policy.mode in ("instruction_selection", "combined")
    rejection = policy.mode in ("prompt_rejection", "combined")

    if selection and (policy.mask_unselected_instr or policy.mask_unbound_data):
        if not bindings and catalog.exec_spans:
            raise MaskError(
                "BINDING_REQUIRED",
                "no exec binding resolved; cannot pick spans to keep",
            )
        selected_instr = {b.resolved_instr for b in bindings}
        bound_inputs = {t for b in bindings for t in b.resolved_inputs}
        if policy.mask_unselected_instr:
            for node_id in catalog.instruction_spans:
                if node_id not in selected_instr:
                    paint(node_id, False)
        if policy.mask_unbound_data:
            for node_id in catalog.data_spans:
                if node_id not in bound_inputs:
                    paint(node_id, False)
        if policy.mask_free_text:
            covered = np.zeros(n, dtype=bool)
            for node_id in catalog.tagged_spans:
                first, last = _span_tokens(seq, node_id)
                covered[first : last + 1] = True
            visible &= covered
        # Whatever the exec selected must stay readable, including the
        # exec span itself.
        for b in bindings:
            paint(b.resolved_instr, True)
            for t in b.resolved_inputs:
                paint(t, True)
            paint(b.exec_node, True)

    if rejection:
        for node_id in policy.rejected_spans:
            paint(node_id, False)

    return AttentionMask(n, tuple(bool(v) for v in visible), policy.scope)


@dataclass(frozen=True)
class MaskMatrix:
    """Dense boolean attention matrix, queries by keys."""

    data: np.ndarray = field(compare=False)
    prompt_length: int = 0
    generated: int = 0

    def __post_init__(self) -> None:
        total = self.prompt_length + self.generated
        if self.data.shape != (total, total):
            raise MaskError(
                "DIMENSION_MISMATCH",
                f"matrix shape {self.data.shape} for {total} positions",
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaskMatrix):
            return NotImplemented
        return (
            self.prompt_length == other.prompt_length
            and self.generated == other.generated
            and bool(np.array_equal(self.data, other.data))
        )

    def packed(self) -> bytes:
        """Row-major bit packing, for compact fixtures."""
        return np.packbits(self.data, axis=None).tobytes()


def expand_matrix(mask: AttentionMask, generated: int = 0) -> MaskMatrix:
    """Expand a visibility vector into a causal attention matrix.

    Transitive scope removes a masked key for every query. Generation
    scope leaves prompt rows causal and blinds only generated rows to the
    masked prompt keys.
    """
    n = mask.sequence_length
    total = n + generated
    base = np.tril(np.ones((total, total), dtype=bool))
    vis = np.array(mask.visible, dtype=bool)
    vis_ext = np.concatenate([vis, np.ones(generated, dtype=bool)])
    if mask.scope == "transitive":
        base &= vis_ext[None, :]
    else:
        if generated:
            base[n:, :n] &= vis[None, :]
    return MaskMatrix(base, prompt_length=n, generated=generated)


def _embed(rng_seed: tuple[int, ...], shape: tuple[int, ...]) -> np.ndarray:
    return np.random.default_rng(list(rng_seed)).standard_normal(shape)


def simulate_attention(
    token_ids: tuple[int, ...] | list[int],
    matrix: MaskMatrix,
    seed: int = 0,
    d_model: int = 32,
    return_weights: bool = False,
):
    """Run one deterministic single-head attention layer under a mask.

    Embeddings derive from (seed, token id), so the same id always embeds
    identically. Keys invisible to every query get their K/V rows zeroed,
    which makes the output bitwise independent of what those tokens are.
    Masked scores become -inf before softmax, so visible weights are
    exact. Returns the (total, d_model) output array.
    """
    total = matrix.prompt_length + matrix.generated
    ids = list(token_ids) + [GEN_TOKEN_ID] * matrix.generated
    if len(ids) != total:
        raise MaskError(
            "DIMENSION_MISMATCH",
            f"{len(token_ids)} token ids for prompt of {matrix.prompt_length}",
        )

    x = np.stack([_embed((seed, tid), (d_model,)) for tid in ids])
    wq = _embed((seed, 7919), (d_model, d_model))
    wk = _embed((seed, 7927), (d_model, d_model))
    wv = _embed((seed, 7933), (d_model, d_model))

    q = x @ wq
    k = x @ wk
    v = x @ wv

    # A key no query can see must not touch any arithmetic path.
    dead = ~matrix.data.any(axis=0)
    k[dead] = 0.0
    v[dead] = 0.0

    scores = (q @ k.T) / np.sqrt(d_model)
    scores = np.where(matrix.data, scores, -np.inf)
    # Rows with no visible key would softmax NaN; they yield zero output.
    row_alive = matrix.data.any(axis=1)
    row_max = np.max(scores, axis=1, keepdims=True)
    row_max[~row_alive] = 0.0
    shifted = scores - row_max
    weights = np.zeros_like(scores)
    np.exp(shifted, out=weights, where=matrix.data)
    sums = weights.sum(axis=1, keepdims=True)
    sums[~row_alive] = 1.0
    weights = weights / sums
    out = weights @ v
    out[~row_alive] = 0.0
    if return_weights:
        return out, weights
    return out
