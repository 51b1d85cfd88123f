"""Greedy decoding with per-step attention capture.

Attention is taken from the same autoregressive passes that produce the
translation (not a separate teacher-forced pass): step t records each
layer/head's distribution over the prompt plus the t tokens generated so
far. Generation stops at end-of-sequence or at a token containing a newline;
hitting the token budget marks the record truncated.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .dumpio import write_dump
from .templates import split_around_source

_WORD_MARKERS = ("▁", "Ġ")


@dataclass
class SourceSentence:
    sentence_id: str
    text: str


@dataclass
class TranslationRecord:
    sentence_id: str
    source: str
    translation: str
    generated_tokens: list[str]
    dump_path: Path
    truncated: bool


def display_tokens(tokenizer, ids: list[int]) -> list[str]:
    """Token strings with word-start markers.

    SentencePiece and byte-BPE vocabularies already carry their markers;
    word-level vocabularies get a "▁" prefix per token so that dump
    consumers can detokenize with the standard convention.
    """
    tokens = tokenizer.convert_ids_to_tokens(ids)
    if tokens and not any(t.startswith(_WORD_MARKERS) for t in tokens):
        tokens = ["▁" + t for t in tokens]
    return tokens


def _encode_prompt(tokenizer, source: str, style: str):
    """Piecewise encoding so the source-sentence token span is exact."""
    prefix, suffix = split_around_source(style)
    prefix_ids = tokenizer.encode(prefix, add_special_tokens=False)
    source_ids = tokenizer.encode(source, add_special_tokens=False)
    suffix_ids = tokenizer.encode(suffix, add_special_tokens=False)
    ids = prefix_ids + source_ids + suffix_ids
    span = (len(prefix_ids), len(prefix_ids) + len(source_ids))
    return ids, span


def _layer_stack(attentions) -> np.ndarray:
    """(n_layers, n_heads, context) rows for the newest query position."""
    rows = [layer[0, :, -1, :].detach().to(torch.float32).cpu().numpy()
            for layer in attentions]
    return np.stack(rows)


@torch.no_grad()
def translate_and_dump(
    model,
    tokenizer,
    sources: list[SourceSentence],
    style: str,
    out_dir: str | Path,
    max_new_tokens: int = 64,
    device: str = "cpu",
) -> list[TranslationRecord]:
    """Translate each source greedily, dumping attention per sentence.

    One dump directory per sentence under ``out_dir``, named by sentence id.
    """
    if not sources:
        raise ValueError("no source sentences to translate")
    if max_new_tokens < 1:
        raise ValueError("max_new_tokens must be >= 1")
    out_dir = Path(out_dir)
    model = model.to(device)
    model.eval()
    eos_id = model.config.eos_token_id

    records = []
    for source in sources:
        prompt_ids, source_span = _encode_prompt(tokenizer, source.text, style)
        input_ids = torch.tensor([prompt_ids], dtype=torch.long, device=device)
        output = model(input_ids=input_ids, use_cache=True,
                       output_attentions=True)
        steps = [_layer_stack(output.attentions)]
        past = output.past_key_values
        generated_ids: list[int] = []
        truncated = True
        next_id = int(output.logits[0, -1].argmax())
        while True:
            piece = tokenizer.decode([next_id])
            if next_id == eos_id or "\n" in piece:
                truncated = False
                steps.pop()  # the step that proposed the stop token
                break
            generated_ids.append(next_id)
            if len(generated_ids) >= max_new_tokens:
                break
            output = model(
                input_ids=torch.tensor([[next_id]], dtype=torch.long,
                                       device=device),
                past_key_values=past,
                use_cache=True,
                output_attentions=True,
            )
            past = output.past_key_values
            steps.append(_layer_stack(output.attentions))
            next_id = int(output.logits[0, -1].argmax())

        steps = steps[: len(generated_ids)]
        prompt_tokens = display_tokens(tokenizer, prompt_ids)
        generated_tokens = display_tokens(tokenizer, generated_ids)
        dump_path = write_dump(
            out_dir / source.sentence_id,
            sentence_id=source.sentence_id,
            prompt_tokens=prompt_tokens,
            source_span=source_span,
            generated_tokens=generated_tokens,
            steps=steps,
            n_layers=model.config.num_hidden_layers,
            n_heads=model.config.num_attention_heads,
        )
        records.append(TranslationRecord(
            sentence_id=source.sentence_id,
            source=source.text,
            translation=tokenizer.decode(generated_ids).strip(),
            generated_tokens=generated_tokens,
            dump_path=dump_path,
            truncated=truncated and len(generated_ids) >= max_new_tokens,
        ))
    return records
