"""Structured markup for LLM prompts, in two interconvertible forms.

The surface form is human text with backslash tags; the machine form
replaces structure with dedicated special tokens so models can attend to
it reliably. On top of the two parsers sit converters (JSON included),
reference resolution for exec spans, attention-mask computation, and
training-data generation.
"""

from llmon._kernels import BACKEND
from llmon.analyze import (
    DEFAULT_VOCAB,
    ExecBinding,
    Finding,
    LintReport,
    SpanCatalog,
    TagVocabulary,
    build_catalog,
    lint,
    resolve_exec,
)
from llmon.convert import (
    flatten,
    iter_flatten_conflicts,
    json_to_llmon,
    llmon_to_json,
    machine_to_surface,
    surface_to_machine,
)
from llmon.datagen import (
    DistractorInstance,
    SftRecord,
    emit_dataset,
    llmonize,
    load_sft_jsonl,
    make_distractor_instance,
)
from llmon.errors import (
    ConvertError,
    DatagenError,
    LlmonError,
    MaskError,
    ParseError,
    PrintError,
)
from llmon.machine import (
    DEFAULT_REGISTRY,
    SpecialTokenRegistry,
    Token,
    TokenSequence,
    detokenize,
    ordinary_token_id,
    parse_machine,
    print_machine,
    tokenize,
)
from llmon.mask import (
    GEN_TOKEN_ID,
    AttentionMask,
    MaskMatrix,
    MaskPolicy,
    compute_mask,
    expand_matrix,
    simulate_attention,
)
from llmon.model import (
    Document,
    ListNode,
    Node,
    ObjectNode,
    Scalar,
    ScalarKind,
    TagPath,
    TagSegment,
    Tagged,
    parse_tag_path,
)
from llmon.surface import parse_surface, print_surface

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    # model
    "Document",
    "Node",
    "Scalar",
    "ScalarKind",
    "Tagged",
    "ObjectNode",
    "ListNode",
    "TagPath",
    "TagSegment",
    "parse_tag_path",
    # errors
    "LlmonError",
    "ParseError",
    "PrintError",
    "ConvertError",
    "MaskError",
    "DatagenError",
    # surface
    "parse_surface",
    "print_surface",
    # machine
    "DEFAULT_REGISTRY",
    "SpecialTokenRegistry",
    "Token",
    "TokenSequence",
    "tokenize",
    "detokenize",
    "ordinary_token_id",
    "parse_machine",
    "print_machine",
    # convert
    "flatten",
    "iter_flatten_conflicts",
    "surface_to_machine",
    "machine_to_surface",
    "json_to_llmon",
    "llmon_to_json",
    # analysis
    "TagVocabulary",
    "DEFAULT_VOCAB",
    "SpanCatalog",
    "ExecBinding",
    "Finding",
    "LintReport",
    "build_catalog",
    "resolve_exec",
    "lint",
    # masking
    "GEN_TOKEN_ID",
    "MaskPolicy",
    "AttentionMask",
    "MaskMatrix",
    "compute_mask",
    "expand_matrix",
    "simulate_attention",
    # datagen
    "SftRecord",
    "DistractorInstance",
    "load_sft_jsonl",
    "llmonize",
    "make_distractor_instance",
    "emit_dataset",
]
