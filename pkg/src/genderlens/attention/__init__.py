"""Attention dumps: bit-exact file format, span matching, head aggregation."""

from .analysis import (
    HeadMatrix,
    SpanMap,
    aggregate,
    cue_attention,
    detokenize,
    export_heatmap,
    locate_spans,
    prompt_attention_mass,
    secondary_entity_attention,
)
from .dumps import ROW_SUM_TOL, AttentionDump, iter_dumps, read_dump, write_dump

__all__ = [
    "AttentionDump",
    "HeadMatrix",
    "ROW_SUM_TOL",
    "SpanMap",
    "aggregate",
    "cue_attention",
    "detokenize",
    "export_heatmap",
    "iter_dumps",
    "locate_spans",
    "prompt_attention_mass",
    "read_dump",
    "secondary_entity_attention",
    "write_dump",
]
