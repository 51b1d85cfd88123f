"""Span matching and layer/head attention aggregation over dumps.

Cue attention is summed over the cue's subwords (they jointly carry the cue)
and averaged over the target span's generation steps, so values stay
comparable across tokenizations.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib import image as mpimage

from ..errors import ValidationError
from ..morpho import ArticleTable
from .dumps import AttentionDump

__all__ = [
    "SpanMap",
    "HeadMatrix",
    "detokenize",
    "locate_spans",
    "cue_attention",
    "aggregate",
    "prompt_attention_mass",
    "secondary_entity_attention",
    "export_heatmap",
]

_WORD_MARKERS = ("▁", "Ġ")  # SentencePiece / byte-BPE word starts


def detokenize(tokens: list[str]) -> tuple[str, list[tuple[int, int]]]:
    """Join subword tokens; returns the text and per-token char offsets."""
    text = []
    offsets = []
    length = 0
    for tok in tokens:
        piece = tok
        if piece.startswith(_WORD_MARKERS):
            piece = piece[1:]
            if length:
                text.append(" ")
                length += 1
        start = length
        text.append(piece)
        length += len(piece)
        offsets.append((start, length))
    return "".join(text), offsets


@dataclass(frozen=True)
class SpanMap:
    """Token spans for one dump: target noun (plus article), cue, secondary."""

    target_span: tuple[int, ...] | None  # generated-token indices
    cue_positions: tuple[int, ...]       # context-token indices
    secondary_span: tuple[int, ...] | None = None

    @property
    def matched(self) -> bool:
        return bool(self.target_span)


def _word_bounded(text: str, start: int, end: int) -> bool:
    before = text[start - 1] if start > 0 else " "
    after = text[end] if end < len(text) else " "
    return not before.isalpha() and not after.isalpha()


def _find_form(text: str, forms) -> tuple[int, int] | None:
    """Leftmost word-bounded occurrence of any form; longest wins on ties."""
    low = text.lower()
    best = None
    for form in forms:
        needle = form.lower()
        pos = 0
        while True:
            hit = low.find(needle, pos)
            if hit < 0:
                break
            end = hit + len(needle)
            if _word_bounded(low, hit, end):
                if best is None or (hit, -len(needle)) < (best[0], -(best[1] - best[0])):
                    best = (hit, end)
                break
            pos = hit + 1
    return best


def _tokens_overlapping(offsets, start: int, end: int) -> list[int]:
    return [
        i for i, (s, e) in enumerate(offsets) if s < end and e > start and e > s
    ]


def _match_generated_span(
    dump: AttentionDump, forms, articles: ArticleTable | None
) -> tuple[int, ...] | None:
    text, offsets = detokenize(dump.generated_tokens)
    hit = _find_form(text, forms)
    if hit is None:
        return None
    indices = _tokens_overlapping(offsets, *hit)
    if not indices:
        return None
    first = indices[0]
    if articles is not None and first > 0:
        prev = dump.generated_tokens[first - 1]
        piece = prev[1:] if prev.startswith(_WORD_MARKERS) else prev
        if articles.is_article(piece.strip()):
            indices = [first - 1, *indices]
    return tuple(indices)


def locate_spans(
    dump: AttentionDump,
    profession_forms,
    cue_surface: str,
    articles: ArticleTable | None = None,
    secondary_forms=None,
) -> SpanMap:
    """Locate the translated profession, the source cue, and optionally the
    secondary entity's translation.

    Profession matching is greedy left-to-right over the detokenized output
    against any of the given surface forms; a preceding article token joins
    the span. A missing profession yields an unmatched SpanMap (the instance
    is excluded from aggregation); a missing cue raises, since gendered
    inputs always contain one.
    """
    lo, hi = dump.source_span
    src_text, src_offsets = detokenize(dump.context_tokens[lo:hi])
    cue_hit = _find_form(src_text, [cue_surface])
    if cue_hit is None:
        raise ValidationError(
            f"{dump.sentence_id}: cue {cue_surface!r} not found in source segment"
        )
    cue_positions = tuple(
        lo + i for i in _tokens_overlapping(src_offsets, *cue_hit)
    )

    target_span = _match_generated_span(dump, profession_forms, articles)
    secondary_span = None
    if secondary_forms is not None:
        secondary_span = _match_generated_span(dump, secondary_forms, articles)
    return SpanMap(
        target_span=target_span,
        cue_positions=cue_positions,
        secondary_span=secondary_span,
    )


@dataclass(frozen=True)
class HeadMatrix:
    """Per layer/head mean attention, with the aggregation count."""

    values: np.ndarray  # (n_layers, n_heads) float64
    n: int
    sentence_id: str | None = None


def _span_attention(
    dump: AttentionDump, steps: tuple[int, ...], positions: tuple[int, ...]
) -> np.ndarray:
    total = np.zeros((dump.n_layers, dump.n_heads), dtype=np.float64)
    cols = list(positions)
    for t in steps:
        block = dump.steps[t].astype(np.float64)
        total += block[:, :, cols].sum(axis=-1)
    return total / len(steps)


def cue_attention(dump: AttentionDump, span: SpanMap) -> HeadMatrix:
    """Attention to the cue while generating the target span (n=1)."""
    if not span.matched:
        raise ValidationError(f"{dump.sentence_id}: target span not matched")
    values = _span_attention(dump, span.target_span, span.cue_positions)
    return HeadMatrix(values=values, n=1, sentence_id=dump.sentence_id)


def secondary_entity_attention(dump: AttentionDump, span: SpanMap) -> HeadMatrix:
    """Attention to the cue while generating the secondary entity (n=1)."""
    if span.secondary_span is None:
        raise ValidationError(
            f"{dump.sentence_id}: secondary entity span absent from SpanMap"
        )
    values = _span_attention(dump, span.secondary_span, span.cue_positions)
    return HeadMatrix(values=values, n=1, sentence_id=dump.sentence_id)


def prompt_attention_mass(dump: AttentionDump, span: SpanMap) -> float:
    """Mean total attention on prompt-template tokens during target generation.

    Template tokens are the prompt positions outside the embedded source
    sentence; the value is averaged over target-span steps, layers and heads.
    """
    if not span.matched:
        raise ValidationError(f"{dump.sentence_id}: target span not matched")
    lo, hi = dump.source_span
    template = tuple(p for p in range(dump.prompt_len) if not lo <= p < hi)
    if not template:
        return 0.0
    return float(_span_attention(dump, span.target_span, template).mean())


def aggregate(instances: list[HeadMatrix], n_min: int) -> HeadMatrix:
    """Cell-wise mean over the first n_min instances in sentence-id order."""
    if n_min < 1:
        raise ValidationError("n_min must be >= 1")
    if len(instances) < n_min:
        raise ValidationError(
            f"{len(instances)} instances available, n_min={n_min} required"
        )
    chosen = sorted(instances, key=lambda m: (m.sentence_id is None, m.sentence_id))
    chosen = chosen[:n_min]
    shapes = {m.values.shape for m in chosen}
    if len(shapes) != 1:
        raise ValidationError(f"instances disagree on shape: {sorted(shapes)}")
    stacked = np.stack([m.values for m in chosen])
    return HeadMatrix(values=stacked.mean(axis=0), n=n_min)


def export_heatmap(
    matrix: HeadMatrix,
    layer_lo: int,
    layer_hi: int,
    base_path: str | Path,
    anchor: tuple[float, float] | None = None,
    scale: int = 24,
) -> tuple[Path, Path]:
    """Write <base>.csv and <base>.png for an inclusive layer range.

    CSV rows run from layer_hi down to layer_lo, one column per head, four
    decimals. The raster upscales each cell to a uniform pixel block; with a
    fixed (vmin, vmax) anchor, equal cells map to identical pixels across
    files.
    """
    n_layers = matrix.values.shape[0]
    if not (0 <= layer_lo <= layer_hi < n_layers):
        raise ValidationError(
            f"layer range {layer_lo}-{layer_hi} invalid for {n_layers} layers"
        )
    base_path = Path(base_path)
    sliced = matrix.values[layer_lo:layer_hi + 1][::-1]  # descending layers

    csv_path = base_path.with_suffix(".csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        for row in sliced:
            fh.write(",".join(f"{v:.4f}" for v in row) + "\n")

    png_path = base_path.with_suffix(".png")
    if anchor is None:
        vmin, vmax = 0.0, float(sliced.max()) or 1.0
    else:
        vmin, vmax = anchor
    blocks = np.kron(sliced, np.ones((scale, scale)))
    mpimage.imsave(png_path, blocks, vmin=vmin, vmax=vmax, cmap="viridis")
    return csv_path, png_path
