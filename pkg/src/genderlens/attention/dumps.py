"""On-disk attention dump format: one directory per sentence.

Layout per sentence directory:
  meta      JSON sidecar: sentence_id, prompt_len, source_span (half-open
            context positions of the embedded source sentence), context_tokens
            (prompt tokens followed by all generated tokens), generated_tokens,
            n_layers, n_heads, dtype "f32le".
  attn.bin  magic "ATTD", uint32 version=1, uint32 n_steps, then per step t a
            row-major little-endian float32 block of shape
            n_layers x n_heads x (prompt_len + t).

Token strings carry their word-start marker (SentencePiece "▁" or BPE
"Ġ"); unmarked tokens continue the previous word when detokenized.
Readers validate magic, version and total byte length; the sum-to-one check
rejects any attention row off by more than 1e-3.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DumpFormatError

__all__ = ["AttentionDump", "write_dump", "read_dump", "iter_dumps", "ROW_SUM_TOL"]

MAGIC = b"ATTD"
VERSION = 1
ROW_SUM_TOL = 1e-3

_META_KEYS = frozenset(
    ["sentence_id", "prompt_len", "source_span", "context_tokens",
     "generated_tokens", "n_layers", "n_heads", "dtype"]
)


@dataclass
class AttentionDump:
    """Per-sentence attention tensors with token metadata."""

    sentence_id: str
    prompt_len: int
    source_span: tuple[int, int]  # context positions of the source sentence
    context_tokens: list[str]     # prompt tokens + generated tokens
    generated_tokens: list[str]
    n_layers: int
    n_heads: int
    steps: list[np.ndarray]       # step t: (n_layers, n_heads, prompt_len + t)

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def check_consistent(self) -> None:
        if len(self.context_tokens) != self.prompt_len + len(self.generated_tokens):
            raise DumpFormatError(
                f"{self.sentence_id}: context tokens ({len(self.context_tokens)}) "
                f"!= prompt_len ({self.prompt_len}) + generated "
                f"({len(self.generated_tokens)})"
            )
        if self.context_tokens[self.prompt_len:] != self.generated_tokens:
            raise DumpFormatError(
                f"{self.sentence_id}: context tail disagrees with generated tokens"
            )
        lo, hi = self.source_span
        if not (0 <= lo <= hi <= self.prompt_len):
            raise DumpFormatError(
                f"{self.sentence_id}: source span {self.source_span} outside prompt"
            )
        if len(self.steps) != len(self.generated_tokens):
            raise DumpFormatError(
                f"{self.sentence_id}: {len(self.steps)} steps for "
                f"{len(self.generated_tokens)} generated tokens"
            )
        for t, block in enumerate(self.steps):
            expected = (self.n_layers, self.n_heads, self.prompt_len + t)
            if block.shape != expected:
                raise DumpFormatError(
                    f"{self.sentence_id}: step {t} has shape {block.shape}, "
                    f"expected {expected}"
                )

    def check_row_sums(self, tol: float = ROW_SUM_TOL) -> None:
        for t, block in enumerate(self.steps):
            sums = block.astype(np.float64).sum(axis=-1)
            bad = np.abs(sums - 1.0) > tol
            if bad.any():
                layer, head = np.argwhere(bad)[0]
                raise DumpFormatError(
                    f"{self.sentence_id}: attention row sums to "
                    f"{sums[layer, head]:.6f} at step {t}, layer {layer}, "
                    f"head {head} (tolerance {tol})"
                )


def write_dump(dump: AttentionDump, directory: str | Path) -> Path:
    """Serialize a dump bit-exactly; returns the sentence directory."""
    dump.check_consistent()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "sentence_id": dump.sentence_id,
        "prompt_len": dump.prompt_len,
        "source_span": list(dump.source_span),
        "context_tokens": dump.context_tokens,
        "generated_tokens": dump.generated_tokens,
        "n_layers": dump.n_layers,
        "n_heads": dump.n_heads,
        "dtype": "f32le",
    }
    meta_text = json.dumps(meta, ensure_ascii=False, sort_keys=True,
                           separators=(",", ":")) + "\n"
    (directory / "meta").write_text(meta_text, encoding="utf-8")
    with open(directory / "attn.bin", "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, dump.n_steps))
        for block in dump.steps:
            fh.write(np.ascontiguousarray(block, dtype="<f4").tobytes())
    return directory


def read_dump(directory: str | Path, check_sums: bool = True) -> AttentionDump:
    """Load and validate one sentence directory.

    Raises DumpFormatError on bad magic, version, layout, byte length, or
    (unless ``check_sums`` is off) attention rows violating sum-to-one.
    """
    directory = Path(directory)
    meta_path = directory / "meta"
    bin_path = directory / "attn.bin"
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DumpFormatError(f"{directory}: unreadable meta sidecar: {exc}") from exc
    if not isinstance(meta, dict):
        raise DumpFormatError(f"{directory}: meta sidecar is not a JSON object")
    missing = _META_KEYS - set(meta)
    if missing:
        raise DumpFormatError(f"{directory}: meta misses keys {sorted(missing)}")
    if meta["dtype"] != "f32le":
        raise DumpFormatError(f"{directory}: unsupported dtype {meta['dtype']!r}")

    try:
        raw = bin_path.read_bytes()
    except OSError as exc:
        raise DumpFormatError(f"{directory}: unreadable attn.bin: {exc}") from exc
    if raw[:4] != MAGIC:
        raise DumpFormatError(f"{directory}: bad magic {raw[:4]!r}")
    if len(raw) < 12:
        raise DumpFormatError(f"{directory}: truncated header")
    version, n_steps = struct.unpack("<II", raw[4:12])
    if version != VERSION:
        raise DumpFormatError(f"{directory}: unsupported version {version}")

    try:
        n_layers = int(meta["n_layers"])
        n_heads = int(meta["n_heads"])
        prompt_len = int(meta["prompt_len"])
        source_span = tuple(int(v) for v in meta["source_span"])
        context_tokens = [str(t) for t in meta["context_tokens"]]
        generated_tokens = [str(t) for t in meta["generated_tokens"]]
    except (TypeError, ValueError) as exc:
        raise DumpFormatError(f"{directory}: malformed meta field: {exc}") from exc
    if len(source_span) != 2:
        raise DumpFormatError(
            f"{directory}: source_span must have 2 entries, got {len(source_span)}"
        )
    if min(n_layers, n_heads, prompt_len) < 0:
        raise DumpFormatError(f"{directory}: negative dimension in meta")
    expected = 12 + sum(
        4 * n_layers * n_heads * (prompt_len + t) for t in range(n_steps)
    )
    if len(raw) != expected:
        raise DumpFormatError(
            f"{directory}: byte length {len(raw)} != expected {expected}"
        )

    steps = []
    offset = 12
    for t in range(n_steps):
        count = n_layers * n_heads * (prompt_len + t)
        block = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        steps.append(block.reshape(n_layers, n_heads, prompt_len + t))
        offset += 4 * count
    dump = AttentionDump(
        sentence_id=str(meta["sentence_id"]),
        prompt_len=prompt_len,
        source_span=source_span,
        context_tokens=context_tokens,
        generated_tokens=generated_tokens,
        n_layers=n_layers,
        n_heads=n_heads,
        steps=steps,
    )
    dump.check_consistent()
    if check_sums:
        dump.check_row_sums()
    return dump


def iter_dumps(root: str | Path, check_sums: bool = True):
    """Yield dumps from every sentence directory under ``root``, sorted."""
    root = Path(root)
    for child in sorted(p for p in root.iterdir() if p.is_dir()):
        if (child / "meta").exists():
            yield read_dump(child, check_sums=check_sums)
