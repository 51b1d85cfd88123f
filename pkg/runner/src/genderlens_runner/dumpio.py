"""Writer for the attention-dump directory format.

Implements the published interface independently of the evaluation toolkit:
per sentence a `meta` JSON sidecar (sentence_id, prompt_len, source_span,
context_tokens, generated_tokens, n_layers, n_heads, dtype "f32le") plus
`attn.bin` with magic "ATTD", uint32 version 1, uint32 step count, and one
row-major little-endian float32 block of shape
n_layers x n_heads x (prompt_len + t) per generated step t.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ATTD"
VERSION = 1


def write_dump(
    directory: str | Path,
    sentence_id: str,
    prompt_tokens: list[str],
    source_span: tuple[int, int],
    generated_tokens: list[str],
    steps: list[np.ndarray],
    n_layers: int | None = None,
    n_heads: int | None = None,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if len(steps) != len(generated_tokens):
        raise ValueError("one attention block required per generated token")
    if n_layers is None or n_heads is None:
        if not steps:
            raise ValueError("empty dumps need explicit n_layers/n_heads")
        n_layers, n_heads = steps[0].shape[:2]
    meta = {
        "sentence_id": sentence_id,
        "prompt_len": len(prompt_tokens),
        "source_span": list(source_span),
        "context_tokens": prompt_tokens + generated_tokens,
        "generated_tokens": generated_tokens,
        "n_layers": int(n_layers),
        "n_heads": int(n_heads),
        "dtype": "f32le",
    }
    (directory / "meta").write_text(
        json.dumps(meta, ensure_ascii=False, sort_keys=True,
                   separators=(",", ":")) + "\n",
        encoding="utf-8",
    )
    with open(directory / "attn.bin", "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(steps)))
        for t, block in enumerate(steps):
            expected = (n_layers, n_heads, len(prompt_tokens) + t)
            if block.shape != expected:
                raise ValueError(
                    f"step {t}: block shape {block.shape}, expected {expected}"
                )
            fh.write(np.ascontiguousarray(block, dtype="<f4").tobytes())
    return directory
