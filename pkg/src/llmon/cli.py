"""Command line front end.

Data goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 any structured failure, 2 usage errors (argparse's own).
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from llmon import __version__
from llmon.analyze import lint, resolve_exec
from llmon.convert import (
    flatten,
    json_to_llmon,
    llmon_to_json,
    machine_to_surface,
    surface_to_machine,
)
from llmon.datagen import emit_dataset, llmonize, load_sft_jsonl, write_jsonl
from llmon.errors import LlmonError
from llmon.machine import (
    DEFAULT_REGISTRY,
    SpecialTokenRegistry,
    parse_machine,
    print_machine,
    tokenize,
)
from llmon.mask import MaskPolicy, compute_mask, expand_matrix
from llmon.model import Document, ListNode, Node, ObjectNode, Scalar, Tagged
from llmon.surface import parse_surface, print_surface

__all__ = ["main", "doc_to_tree_json"]


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_registry(args: argparse.Namespace) -> SpecialTokenRegistry:
    if not getattr(args, "registry", None):
        return DEFAULT_REGISTRY
    registry = SpecialTokenRegistry.from_json(
        Path(args.registry).read_text(encoding="utf-8")
    )
    for w in registry.warnings:
        print(f"registry: {w}", file=sys.stderr)
    return registry


def _detect_format(text: str, registry: SpecialTokenRegistry) -> str:
    return "machine" if registry.strings[0] in text else "surface"


def _parse_any(
    text: str,
    fmt: str,
    registry: SpecialTokenRegistry,
    *,
    strict_literals: bool = False,
    permissive_close: bool = False,
):
    """Returns (document, token_sequence_or_None)."""
    if fmt == "auto":
        fmt = _detect_format(text, registry)
    warnings: list[str] = []
    if fmt == "machine":
        doc, seq = parse_machine(
            text,
            registry,
            strict_literals=strict_literals,
            permissive_close=permissive_close,
            warnings=warnings,
        )
    else:
        doc = parse_surface(
            text,
            strict_literals=strict_literals,
            permissive_close=permissive_close,
            warnings=warnings,
        )
        seq = None
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return doc, seq


def _node_json(doc: Document, node: Node) -> dict:
    node_id = doc.node_id_of(node)
    if isinstance(node, Scalar):
        return {
            "id": node_id,
            "node": "scalar",
            "kind": node.kind.value,
            "raw": node.raw,
            "cast": node.cast_explicit,
        }
    if isinstance(node, Tagged):
        return {
            "id": node_id,
            "node": "tagged",
            "tag": node.tag.serialize(),
            "self_closed": node.self_closed,
            "children": [_node_json(doc, c) for c in node.children],
        }
    if isinstance(node, ObjectNode):
        return {
            "id": node_id,
            "node": "object",
            "items": [
                {"key": k, "value": _node_json(doc, v)} for k, v in node.items
            ],
        }
    assert isinstance(node, ListNode)
    return {
        "id": node_id,
        "node": "list",
        "elements": [_node_json(doc, e) for e in node.elements],
    }


def doc_to_tree_json(doc: Document) -> dict:
    out = {"roots": [_node_json(doc, r) for r in doc.roots]}
    if doc.source_spans:
        out["spans"] = {str(k): list(v) for k, v in sorted(doc.source_spans.items())}
    return out


def _cmd_parse(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    doc, _seq = _parse_any(
        _read(args.file),
        args.format,
        registry,
        strict_literals=args.strict_literals,
        permissive_close=args.permissive_close,
    )
    json.dump(doc_to_tree_json(doc), sys.stdout, ensure_ascii=False, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_convert(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    text = _read(args.file)
    src = args.src
    if src == "auto":
        stripped = text.lstrip()
        if registry.strings[0] in text:
            src = "machine"
        elif stripped[:1] in "{[\"" or stripped[:1].isdigit():
            try:
                json.loads(text)
                src = "json"
            except ValueError:
                src = "surface"
        else:
            src = "surface"

    if src == "json":
        doc = json_to_llmon(text)
    else:
        doc, _seq = _parse_any(text, src, registry)

    if args.to == "machine":
        out = print_machine(flatten(doc), registry)
    elif args.to == "surface":
        out = print_surface(doc, style=args.style)
    else:
        out = llmon_to_json(doc) + "\n"
    sys.stdout.write(out)
    return 0


def _cmd_lint(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    doc, _seq = _parse_any(_read(args.file), args.format, registry)
    report = lint(doc)
    if args.json:
        text = report.to_json_lines()
        if text:
            sys.stdout.write(text + "\n")
    else:
        sys.stdout.write(report.human() + "\n")
    return 1 if report.has_errors() else 0


def _cmd_tokenize(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    tokens = tokenize(_read(args.file), registry)
    json.dump(
        [{"id": t.id, "text": t.text, "special": t.is_special} for t in tokens],
        sys.stdout,
        ensure_ascii=False,
    )
    sys.stdout.write("\n")
    return 0


def _cmd_mask(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    text = _read(args.file)
    if _detect_format(text, registry) == "surface":
        text = surface_to_machine(text, registry)
    _doc, seq = _parse_any(text, "machine", registry)
    assert seq is not None
    policy = MaskPolicy(
        mode=args.mode,
        mask_unbound_data=args.mask_unbound_data,
        mask_free_text=args.mask_free_text,
        rejected_spans=tuple(args.reject or ()),
        scope=args.scope,
    )
    bindings, report = resolve_exec(seq.document)
    if report.has_errors():
        print(report.human(), file=sys.stderr)
    mask = compute_mask(seq, policy, bindings)
    if args.matrix is not None:
        matrix = expand_matrix(mask, generated=args.matrix)
        json.dump(
            {
                "prompt_length": matrix.prompt_length,
                "generated": matrix.generated,
                "rows": [
                    "".join("1" if v else "0" for v in row) for row in matrix.data
                ],
            },
            sys.stdout,
        )
        sys.stdout.write("\n")
    else:
        sys.stdout.write(mask.to_json() + "\n")
    return 0


def _cmd_llmonize(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    field_map = json.loads(args.fields) if args.fields else None
    with io.StringIO(_read(args.file)) as fp:
        records = load_sft_jsonl(fp, field_map)
    for rec in records:
        doc = llmonize(rec)
        row = {
            "llmon": print_surface(doc),
            "mrllmon": print_machine(doc, registry),
        }
        sys.stdout.write(json.dumps(row, ensure_ascii=False) + "\n")
    return 0


def _cmd_distract(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    field_map = json.loads(args.fields) if args.fields else None
    with io.StringIO(_read(args.file)) as fp:
        pool = load_sft_jsonl(fp, field_map)
    rows = emit_dataset(
        pool, args.count, k=args.k, seed=args.seed, registry=registry
    )
    write_jsonl(rows, sys.stdout)
    return 0


def _cmd_roundtrip(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    text = _read(args.file)
    fmt = args.format
    if fmt == "auto":
        fmt = _detect_format(text, registry)
    doc, _seq = _parse_any(text, fmt, registry)
    if fmt == "machine":
        again = print_machine(doc, registry)
        doc2, _ = parse_machine(again, registry)
    else:
        again = print_surface(doc)
        doc2 = parse_surface(again)
    if doc != doc2:
        print("round trip changed the document", file=sys.stderr)
        return 1
    sys.stdout.write("ok\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--registry",
        metavar="FILE",
        help="JSON file overriding special-token strings",
    )

    parser = argparse.ArgumentParser(
        prog="llmon", description="Structured prompt markup tools"
    )
    parser.add_argument("--version", action="version", version=f"llmon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse to a JSON tree")
    p.add_argument("file", help="input path or - for stdin")
    p.add_argument("--format", choices=("auto", "surface", "machine"), default="auto")
    p.add_argument("--strict-literals", action="store_true")
    p.add_argument("--permissive-close", action="store_true")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("convert", parents=[common], help="convert between forms")
    p.add_argument("file")
    p.add_argument(
        "--from",
        dest="src",
        choices=("auto", "surface", "machine", "json"),
        default="auto",
    )
    p.add_argument("--to", choices=("surface", "machine", "json"), required=True)
    p.add_argument("--style", choices=("indented", "compact"), default="indented")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("lint", parents=[common], help="report structural findings")
    p.add_argument("file")
    p.add_argument("--format", choices=("auto", "surface", "machine"), default="auto")
    p.add_argument("--json", action="store_true", help="one JSON object per finding")
    p.set_defaults(func=_cmd_lint)

    p = sub.add_parser("tokenize", parents=[common], help="machine text to tokens")
    p.add_argument("file")
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser("mask", parents=[common], help="compute attention visibility")
    p.add_argument("file")
    p.add_argument(
        "--mode",
        choices=("instruction_selection", "prompt_rejection", "combined"),
        default="instruction_selection",
    )
    p.add_argument("--scope", choices=("transitive", "generation_only"), default="transitive")
    p.add_argument("--mask-unbound-data", action="store_true")
    p.add_argument("--mask-free-text", action="store_true")
    p.add_argument(
        "--reject", type=int, action="append", metavar="NODE_ID",
        help="mask this span id (repeatable)",
    )
    p.add_argument(
        "--matrix", type=int, metavar="GENERATED", default=None,
        help="emit the expanded matrix with this many generated rows",
    )
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("llmonize", parents=[common], help="structure SFT records")
    p.add_argument("file", help="JSONL with instruction/input/output")
    p.add_argument("--fields", help='JSON field-name map, e.g. {"input": "context"}')
    p.set_defaults(func=_cmd_llmonize)

    p = sub.add_parser(
        "distract", parents=[common], help="build distractor instances"
    )
    p.add_argument("file", help="JSONL pool of records")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fields", help="JSON field-name map")
    p.set_defaults(func=_cmd_distract)

    p = sub.add_parser(
        "roundtrip-check", parents=[common], help="parse, reprint, compare"
    )
    p.add_argument("file")
    p.add_argument("--format", choices=("auto", "surface", "machine"), default="auto")
    p.set_defaults(func=_cmd_roundtrip)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LlmonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1
    except (OSError, ValueError) as exc:
        # unreadable files, bad --fields/--registry JSON, bad registry config
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
