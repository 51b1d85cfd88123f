"""Alignment-side tokenization and file formats (bitext, Pharaoh links)."""

from __future__ import annotations

from pathlib import Path

from ..errors import ParseError
from .em import AlignmentLink

__all__ = [
    "tokenize_for_alignment",
    "load_bitext",
    "load_parallel_files",
    "write_pharaoh",
    "read_pharaoh",
]

_FINAL_PUNCT = ".?!,;:"

# Italian elided articles and article-preposition contractions; these carry no
# usable gender signal on their own and must not absorb the following noun.
_ELIDED_PREFIXES = frozenset(
    ["l'", "un'", "d'", "all'", "dell'", "dall'", "sull'", "nell'", "coll'",
     "quell'", "quest'", "sant'"]
)


def _split_elision(token: str) -> list[str]:
    apos = token.find("'")
    if 0 < apos < len(token) - 1:
        prefix = token[: apos + 1]
        if prefix.lower() in _ELIDED_PREFIXES:
            return [prefix, token[apos + 1:]]
    return [token]


def tokenize_for_alignment(text: str) -> list[str]:
    """Whitespace split, detach sentence-final punctuation, split elisions.

    Detaching only the final punctuation keeps every word position identical
    to the dataset's whitespace indexing, so entity indices carry over.
    """
    tokens = []
    for raw in text.split():
        tokens.extend(_split_elision(raw))
    if tokens:
        last = tokens[-1]
        core = last.rstrip(_FINAL_PUNCT)
        if core and core != last:
            tokens[-1:] = [core, last[len(core):]]
    return tokens


def load_bitext(path: str | Path) -> list[tuple[list[str], list[str]]]:
    """One pair per line, "source ||| target"."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("|||")
            if len(parts) != 2:
                raise ParseError("expected exactly one '|||' separator", path, line_no)
            pairs.append(
                (tokenize_for_alignment(parts[0]), tokenize_for_alignment(parts[1]))
            )
    return pairs


def load_parallel_files(
    src_path: str | Path, tgt_path: str | Path
) -> list[tuple[list[str], list[str]]]:
    with open(src_path, encoding="utf-8") as fh:
        src_lines = [l.rstrip("\n") for l in fh]
    with open(tgt_path, encoding="utf-8") as fh:
        tgt_lines = [l.rstrip("\n") for l in fh]
    if len(src_lines) != len(tgt_lines):
        raise ParseError(
            f"side lengths differ: {len(src_lines)} vs {len(tgt_lines)}", src_path
        )
    return [
        (tokenize_for_alignment(s), tokenize_for_alignment(t))
        for s, t in zip(src_lines, tgt_lines)
        if s or t
    ]


def format_pharaoh(links: list[AlignmentLink]) -> str:
    ordered = sorted(links, key=lambda l: (l.target_index, l.source_index))
    return " ".join(f"{l.source_index}-{l.target_index}" for l in ordered)


def write_pharaoh(alignments: list[list[AlignmentLink]], path: str | Path) -> None:
    """One line per pair, space-separated i-j links sorted by target index."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for links in alignments:
            fh.write(format_pharaoh(links) + "\n")


def read_pharaoh(path: str | Path) -> list[list[AlignmentLink]]:
    alignments = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            links = []
            for chunk in line.split():
                try:
                    i, j = chunk.split("-")
                    links.append(AlignmentLink(int(i), int(j)))
                except ValueError:
                    raise ParseError(
                        f"malformed link {chunk!r}", path, line_no
                    ) from None
            alignments.append(links)
    return alignments
