"""Reference analysis: span catalog, exec binding resolution, linting.

Instance-bearing tags (`instr:a`, `data:1`) are addressable spans. Exec
spans select an instruction and bind inputs through selector children
(`.instr`, `.input`) whose content is a single reference. The linter
collects every structural complaint in deterministic order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from llmon.errors import ParseError
from llmon.model import (
    Document,
    ListNode,
    Node,
    ObjectNode,
    Scalar,
    ScalarKind,
    Tagged,
    parse_tag_path,
)
from llmon.surface import CAST_TAGS

__all__ = [
    "TagVocabulary",
    "DEFAULT_VOCAB",
    "Finding",
    "LintReport",
    "SpanCatalog",
    "ExecBinding",
    "build_catalog",
    "resolve_exec",
    "lint",
]


@dataclass(frozen=True)
class TagVocabulary:
    """Head names that give tagged spans their roles."""

    instruction_heads: tuple[str, ...] = ("instr", "instruction")
    data_heads: tuple[str, ...] = ("data",)
    exec_heads: tuple[str, ...] = ("exec",)
    selector_instr: str = "instr"
    selector_input: str = "input"


DEFAULT_VOCAB = TagVocabulary()


@dataclass(frozen=True, slots=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    node_id: int | None = None
    byte_range: tuple[int, int] | None = None

    def human(self) -> str:
        where = f" at node {self.node_id}" if self.node_id is not None else ""
        if self.byte_range is not None:
            where += f" (bytes {self.byte_range[0]}..{self.byte_range[1]})"
        return f"{self.severity} {self.code}{where}: {self.message}"


@dataclass(frozen=True)
class LintReport:
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    def has_errors(self) -> bool:
        return any(f.severity == "error" for f in self.findings)

    def human(self) -> str:
        if not self.findings:
            return "clean"
        return "\n".join(f.human() for f in self.findings)

    def to_json_lines(self) -> str:
        out = []
        for f in self.findings:
            out.append(
                json.dumps(
                    {
                        "severity": f.severity,
                        "code": f.code,
                        "message": f.message,
                        "node": f.node_id,
                        "range": list(f.byte_range) if f.byte_range else None,
                    },
                    ensure_ascii=False,
                )
            )
        return "\n".join(out)


def _sorted_findings(
    doc: Document, findings: list[Finding]
) -> tuple[Finding, ...]:
    spans = doc.source_spans or {}
    decorated = []
    for f in findings:
        if f.byte_range is None and f.node_id is not None and f.node_id in spans:
            f = Finding(f.severity, f.code, f.message, f.node_id, spans[f.node_id])
        pos = f.node_id if f.node_id is not None else 1 << 60
        decorated.append((pos, f.code, f))
    decorated.sort(key=lambda t: (t[0], t[1]))
    return tuple(f for _p, _c, f in decorated)


@dataclass(frozen=True)
class SpanCatalog:
    """Addressable spans of one document.

    ``refs`` maps full serialized paths of instance-bearing tags to node
    ids; ``aliases`` maps bare last segments (``attachment:1``) to ids, or
    None where the bare form is ambiguous. ``by_head`` groups every tagged
    span by its first segment name. Role tuples exclude exec selectors.
    """

    refs: dict[str, int] = field(default_factory=dict)
    aliases: dict[str, int | None] = field(default_factory=dict)
    by_head: dict[str, tuple[int, ...]] = field(default_factory=dict)
    instruction_spans: tuple[int, ...] = ()
    data_spans: tuple[int, ...] = ()
    exec_spans: tuple[int, ...] = ()
    selector_spans: tuple[int, ...] = ()
    tagged_spans: tuple[int, ...] = ()

    def resolve(self, ref: str) -> int | None:
        """Resolve reference text to a NodeId; None when dangling or
        ambiguous (use resolve_status to tell which)."""
        node_id, _status = self.resolve_status(ref)
        return node_id

    def resolve_status(self, ref: str) -> tuple[int | None, str]:
        if ref in self.refs:
            return self.refs[ref], "ok"
        if ref in self.aliases:
            alias = self.aliases[ref]
            if alias is None:
                return None, "ambiguous"
            return alias, "ok"
        return None, "dangling"


def _role_of(
    node: Tagged, parent: Tagged | None, vocab: TagVocabulary
) -> str | None:
    last = node.tag.last
    if (
        parent is not None
        and parent.tag.last.name in vocab.exec_heads
        and last.instance is None
        and last.name in (vocab.selector_instr, vocab.selector_input)
    ):
        return "selector"
    if last.name in vocab.exec_heads:
        return "exec"
    if last.name in vocab.instruction_heads:
        return "instr"
    if last.name in vocab.data_heads:
        return "data"
    return None


def build_catalog(
    doc: Document, vocab: TagVocabulary = DEFAULT_VOCAB
) -> tuple[SpanCatalog, LintReport]:
    """Walk the document and index instance-bearing spans.

    First occurrence wins a contested path; later ones produce
    DUP_INSTANCE errors and stay out of the catalog.
    """
    refs: dict[str, int] = {}
    alias_targets: dict[str, list[int]] = {}
    by_head: dict[str, list[int]] = {}
    roles: dict[str, list[int]] = {
        "instr": [], "data": [], "exec": [], "selector": [], "tagged": [],
    }
    findings: list[Finding] = []

    stack: list[tuple[Node, Tagged | None]] = [
        (r, None) for r in reversed(doc.roots)
    ]
    while stack:
        node, parent = stack.pop()
        next_parent = parent
        if isinstance(node, Tagged):
            node_id = doc.node_id_of(node)
            roles["tagged"].append(node_id)
            by_head.setdefault(node.tag.head, []).append(node_id)
            role = _role_of(node, parent, vocab)
            if role is not None:
                roles[role].append(node_id)
            if node.tag.last.instance is not None:
                full = node.tag.serialize()
                if full in refs:
                    findings.append(
                        Finding(
                            "error",
                            "DUP_INSTANCE",
                            f"instance path {full!r} already used by node "
                            f"{refs[full]}",
                            node_id,
                        )
                    )
                else:
                    refs[full] = node_id
                    bare = node.tag.last.serialize()
                    if bare != full:
                        alias_targets.setdefault(bare, []).append(node_id)
            next_parent = node
        if isinstance(node, Tagged):
            kids: tuple[Node, ...] = node.children
        elif isinstance(node, ObjectNode):
            kids = tuple(v for _k, v in node.items)
        elif isinstance(node, ListNode):
            kids = node.elements
        else:
            kids = ()
        stack.extend((c, next_parent) for c in reversed(kids))

    aliases: dict[str, int | None] = {}
    for bare, targets in alias_targets.items():
        if bare in refs:
            continue  # the full form owns this text
        aliases[bare] = targets[0] if len(targets) == 1 else None

    catalog = SpanCatalog(
        refs=refs,
        aliases=aliases,
        by_head={k: tuple(v) for k, v in by_head.items()},
        instruction_spans=tuple(sorted(roles["instr"])),
        data_spans=tuple(sorted(roles["data"])),
        exec_spans=tuple(sorted(roles["exec"])),
        selector_spans=tuple(sorted(roles["selector"])),
        tagged_spans=tuple(sorted(roles["tagged"])),
    )
    return catalog, LintReport(_sorted_findings(doc, findings))


@dataclass(frozen=True, slots=True)
class ExecBinding:
    """One resolved exec span: which instruction runs, on which inputs."""

    exec_node: int
    instr_ref: str
    input_refs: tuple[str, ...]
    resolved_instr: int
    resolved_inputs: tuple[int, ...]


def _selector_ref(node: Tagged) -> str | None:
    # Selector content must be exactly one scalar holding a tag path.
    if len(node.children) != 1:
        return None
    child = node.children[0]
    if not isinstance(child, Scalar) or child.kind is not ScalarKind.STRING:
        return None
    text = child.raw.strip()
    try:
        parse_tag_path(text)
    except ParseError:
        return None
    return text


def resolve_exec(
    doc: Document,
    catalog: SpanCatalog | None = None,
    vocab: TagVocabulary = DEFAULT_VOCAB,
) -> tuple[tuple[ExecBinding, ...], LintReport]:
    """Resolve every exec span to an ExecBinding.

    A binding is omitted wholesale when any of its parts is missing,
    malformed, dangling, or of the wrong kind; each problem is a finding.
    """
    if catalog is None:
        catalog, _report = build_catalog(doc, vocab)
    findings: list[Finding] = []
    bindings: list[ExecBinding] = []

    def role_of_target(node_id: int) -> str:
        if node_id in catalog.exec_spans:
            return "exec"
        if node_id in catalog.selector_spans:
            return "selector"
        if node_id in catalog.instruction_spans:
            return "instr"
        if node_id in catalog.data_spans:
            return "data"
        return "other"

    for exec_id in catalog.exec_spans:
        exec_node = doc.node_at(exec_id)
        assert isinstance(exec_node, Tagged)
        instr_sels: list[Tagged] = []
        input_sels: list[Tagged] = []
        for child in exec_node.children:
            if not isinstance(child, Tagged) or child.tag.last.instance is not None:
                continue
            if child.tag.last.name == vocab.selector_instr:
                instr_sels.append(child)
            elif child.tag.last.name == vocab.selector_input:
                input_sels.append(child)

        ok = True
        if not instr_sels:
            findings.append(
                Finding(
                    "error",
                    "MISSING_INSTR",
                    "exec span has no instruction selector",
                    exec_id,
                )
            )
            ok = False
        elif len(instr_sels) > 1:
            findings.append(
                Finding(
                    "error",
                    "MULTIPLE_INSTR",
                    f"exec span has {len(instr_sels)} instruction selectors",
                    exec_id,
                )
            )
            ok = False

        def resolve_one(sel: Tagged, want: str) -> tuple[str, int] | None:
            sel_id = doc.node_id_of(sel)
            ref = _selector_ref(sel)
            if ref is None:
                findings.append(
                    Finding(
                        "error",
                        "MALFORMED_REF",
                        "selector content is not a single reference",
                        sel_id,
                    )
                )
                return None
            target, status = catalog.resolve_status(ref)
            if status == "ambiguous":
                findings.append(
                    Finding(
                        "error",
                        "AMBIGUOUS_REF",
                        f"reference {ref!r} matches several spans",
                        sel_id,
                    )
                )
                return None
            if target is None:
                findings.append(
                    Finding(
                        "error",
                        "DANGLING_REF",
                        f"reference {ref!r} does not resolve",
                        sel_id,
                    )
                )
                return None
            kind = role_of_target(target)
            if want == "instr" and kind != "instr":
                findings.append(
                    Finding(
                        "error",
                        "BAD_TARGET_KIND",
                        f"instruction reference {ref!r} targets a {kind} span",
                        sel_id,
                    )
                )
                return None
            if want == "input" and kind in ("exec", "selector"):
                findings.append(
                    Finding(
                        "error",
                        "BAD_TARGET_KIND",
                        f"input reference {ref!r} targets a {kind} span",
                        sel_id,
                    )
                )
                return None
            return ref, target

        instr_res = resolve_one(instr_sels[0], "instr") if len(instr_sels) == 1 else None
        input_res: list[tuple[str, int]] = []
        for sel in input_sels:
            r = resolve_one(sel, "input")
            if r is None:
                ok = False
            else:
                input_res.append(r)
        if instr_res is None:
            ok = False
        if ok:
            assert instr_res is not None
            bindings.append(
                ExecBinding(
                    exec_node=exec_id,
                    instr_ref=instr_res[0],
                    input_refs=tuple(r for r, _t in input_res),
                    resolved_instr=instr_res[1],
                    resolved_inputs=tuple(t for _r, t in input_res),
                )
            )

    return tuple(bindings), LintReport(_sorted_findings(doc, findings))


_CAST_LIKE = {
    "int", "integer", "float", "double", "number", "num",
    "bool", "boolean", "string", "str", "null", "none", "nil",
}


def lint(doc: Document, vocab: TagVocabulary = DEFAULT_VOCAB) -> LintReport:
    """Full structural lint: catalog + exec resolution + flatten
    consistency + duplicate keys + suspicious cast-like tags."""
    from llmon.convert import iter_flatten_conflicts

    catalog, catalog_report = build_catalog(doc, vocab)
    _bindings, exec_report = resolve_exec(doc, catalog, vocab)
    findings = list(catalog_report.findings) + list(exec_report.findings)

    for node_id in iter_flatten_conflicts(doc):
        node = doc.node_at(node_id)
        assert isinstance(node, Tagged)
        findings.append(
            Finding(
                "error",
                "FLATTEN_INCONSISTENT",
                f"tag {node.tag} conflicts with its ancestor prefix",
                node_id,
            )
        )

    for node in doc.nodes():
        if isinstance(node, ObjectNode):
            seen: set[str] = set()
            for key, _value in node.items:
                if key in seen:
                    findings.append(
                        Finding(
                            "warning",
                            "DUP_OBJECT_KEY",
                            f"object repeats key {key!r}",
                            doc.node_id_of(node),
                        )
                    )
                seen.add(key)
        elif isinstance(node, Tagged):
            seg = node.tag.last
            if (
                len(node.tag.segments) == 1
                and seg.instance is None
                and seg.name not in CAST_TAGS
                and seg.name.lower() in _CAST_LIKE
            ):
                findings.append(
                    Finding(
                        "warning",
                        "UNKNOWN_CAST_TAG",
                        f"tag {seg.name!r} looks like a cast but is not one",
                        doc.node_id_of(node),
                    )
                )

    return LintReport(_sorted_findings(doc, findings))
