"""Turn plain instruction/input/output records into structured prompts.

Each generated document lays out candidate instruction spans, optional
data spans, and one exec span that points at the focus instruction. The
distractor builder packs several unrelated instructions into the same
prompt so selection behavior can be exercised and measured.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from llmon.errors import DatagenError
from llmon.machine import DEFAULT_REGISTRY, SpecialTokenRegistry, print_machine
from llmon.model import Document, Scalar, TagPath, TagSegment, Tagged
from llmon.surface import print_surface

__all__ = [
    "SftRecord",
    "DistractorInstance",
    "load_sft_jsonl",
    "llmonize",
    "make_distractor_instance",
    "emit_dataset",
    "write_jsonl",
]

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def _instr_label(i: int) -> str:
    # a..z, then a1..z1, a2..
    letter = _ALPHABET[i % 26]
    round_no = i // 26
    return letter if round_no == 0 else f"{letter}{round_no}"


@dataclass(frozen=True, slots=True)
class SftRecord:
    """One supervised example. Empty input collapses to None."""

    instruction: str
    input: str | None = None
    output: str = ""

    def __post_init__(self) -> None:
        if self.input == "":
            object.__setattr__(self, "input", None)


_DEFAULT_FIELDS = {"instruction": "instruction", "input": "input", "output": "output"}


def load_sft_jsonl(
    fp: IO[str], field_map: dict[str, str] | None = None
) -> list[SftRecord]:
    """Read one JSON object per line; field_map renames source keys."""
    fields = dict(_DEFAULT_FIELDS)
    if field_map:
        fields.update(field_map)
    records = []
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatagenError("BAD_RECORD", f"line {lineno}: {exc}") from exc
        if not isinstance(obj, dict) or fields["instruction"] not in obj:
            raise DatagenError(
                "BAD_RECORD", f"line {lineno}: missing {fields['instruction']!r}"
            )
        raw_input = obj.get(fields["input"])
        records.append(
            SftRecord(
                instruction=str(obj[fields["instruction"]]),
                input=None if raw_input is None else str(raw_input),
                output=str(obj.get(fields["output"], "")),
            )
        )
    return records


def _instr_span(label: str, text: str) -> Tagged:
    return Tagged(TagPath((TagSegment("instr", label),)), (Scalar(text),))


def _data_span(data_id: str, text: str) -> Tagged:
    return Tagged(TagPath((TagSegment("data", data_id),)), (Scalar(text),))


def _exec_span(focus_label: str, bound_data_id: str | None) -> Tagged:
    exec_seg = TagSegment("exec", "x")
    children: list[Tagged] = [
        Tagged(
            TagPath((exec_seg, TagSegment("instr"))),
            (Scalar(f"instr:{focus_label}"),),
        )
    ]
    if bound_data_id is not None:
        children.append(
            Tagged(
                TagPath((exec_seg, TagSegment("input"))),
                (Scalar(f"data:{bound_data_id}"),),
            )
        )
    return Tagged(TagPath((exec_seg,)), tuple(children))


def llmonize(record: SftRecord) -> Document:
    """Structure a single record: its instruction, its input if any, and
    an exec span selecting them. The output never enters the prompt."""
    roots: list[Tagged] = [_instr_span("a", record.instruction)]
    data_id = None
    if record.input is not None:
        data_id = "1"
        roots.append(_data_span(data_id, record.input))
    roots.append(_exec_span("a", data_id))
    return Document(tuple(roots))


@dataclass(frozen=True, slots=True)
class DistractorInstance:
    """A prompt with one focus instruction buried among distractors."""

    document: Document
    focus_ref: str
    distractor_refs: tuple[str, ...]
    expected_output: str
    seed: int


def make_distractor_instance(
    pool: list[SftRecord] | tuple[SftRecord, ...],
    k: int,
    seed: int,
) -> DistractorInstance:
    """Pick a focus record plus k distractors and build the prompt.

    Labels follow final document order, so the focus lands at a uniform
    position. The focus input, when present, is bound through the exec
    span; with probability one half one distractor input is also present
    but left unbound.
    """
    if k < 1:
        raise DatagenError("BAD_K", "need at least one distractor")
    if len(pool) < k + 1:
        raise DatagenError(
            "POOL_TOO_SMALL", f"need {k + 1} records, pool has {len(pool)}"
        )
    rng = random.Random(seed)
    picked = rng.sample(range(len(pool)), k + 1)
    focus_idx = picked[0]
    order = list(picked)
    rng.shuffle(order)
    labels = {idx: _instr_label(i) for i, idx in enumerate(order)}

    focus_rec = pool[focus_idx]
    data_entries: list[tuple[str, int | None]] = []
    if focus_rec.input is not None:
        data_entries.append((focus_rec.input, focus_idx))
    with_input = [i for i in picked[1:] if pool[i].input is not None]
    if with_input and rng.random() < 0.5:
        data_entries.append((pool[rng.choice(with_input)].input, None))
    rng.shuffle(data_entries)

    bound_data_id = None
    roots: list[Tagged] = [
        _instr_span(labels[idx], pool[idx].instruction) for idx in order
    ]
    for j, (text, owner) in enumerate(data_entries, start=1):
        roots.append(_data_span(str(j), text))
        if owner == focus_idx:
            bound_data_id = str(j)
    roots.append(_exec_span(labels[focus_idx], bound_data_id))

    return DistractorInstance(
        document=Document(tuple(roots)),
        focus_ref=f"instr:{labels[focus_idx]}",
        distractor_refs=tuple(
            f"instr:{labels[idx]}" for idx in order if idx != focus_idx
        ),
        expected_output=focus_rec.output,
        seed=seed,
    )


def emit_dataset(
    pool: list[SftRecord] | tuple[SftRecord, ...],
    count: int,
    k: int = 3,
    seed: int = 0,
    registry: SpecialTokenRegistry = DEFAULT_REGISTRY,
) -> Iterator[dict]:
    """Yield JSONL-ready rows, one distractor instance per row."""
    for i in range(count):
        inst = make_distractor_instance(pool, k, seed + i)
        yield {
            "mrllmon": print_machine(inst.document, registry),
            "llmon": print_surface(inst.document),
            "focus": inst.focus_ref,
            "distractors": list(inst.distractor_refs),
            "expected_output": inst.expected_output,
            "seed": inst.seed,
        }


def write_jsonl(rows: Iterable[dict], fp: IO[str]) -> int:
    n = 0
    for row in rows:
        fp.write(json.dumps(row, ensure_ascii=False) + "\n")
        n += 1
    return n
