"""Runner CLI: translate a challenge set and emit attention dumps.

Reads the 4/5-column tab-separated challenge layout (gender, entity index,
sentence, profession[, secondary index]); only line numbers and sentences are
consumed here. Emits one dump directory per sentence plus translations.tsv
(id <tab> translation) and run.log.json under the output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .generate import SourceSentence, translate_and_dump
from .templates import STYLES


def read_sources(path: str | Path) -> list[SourceSentence]:
    sources = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) < 4:
                raise ValueError(
                    f"{path}:{line_no}: expected at least 4 tab-separated fields"
                )
            sources.append(SourceSentence(sentence_id=str(line_no),
                                          text=fields[2]))
    return sources


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genderlens-runner",
        description="Greedy EN->IT translation with per-step attention dumps.",
    )
    parser.add_argument("--model", required=True,
                        help="model path or hub identifier")
    parser.add_argument("--challenge-set", required=True)
    parser.add_argument("--template", choices=STYLES, default="plain")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--max-new-tokens", type=int, default=64)
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        from transformers import AutoModelForCausalLM, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(args.model)
        # eager attention: sdpa/flash kernels do not expose attention weights
        model = AutoModelForCausalLM.from_pretrained(
            args.model, attn_implementation="eager"
        )
    except Exception as exc:  # model load failures get a named cause
        sys.stderr.write(f"error: cannot load model {args.model!r}: {exc}\n")
        return 2
    try:
        sources = read_sources(args.challenge_set)
        if not sources:
            raise ValueError("challenge set is empty")
        records = translate_and_dump(
            model, tokenizer, sources, args.template, args.out_dir,
            max_new_tokens=args.max_new_tokens, device=args.device,
        )
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return 3

    out_dir = Path(args.out_dir)
    with open(out_dir / "translations.tsv", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(f"{rec.sentence_id}\t{rec.translation}\n")
    log = {
        "model": args.model,
        "template": args.template,
        "max_new_tokens": args.max_new_tokens,
        "sentences": len(records),
        "truncated_ids": [r.sentence_id for r in records if r.truncated],
    }
    with open(out_dir / "run.log.json", "w", encoding="utf-8") as fh:
        json.dump(log, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"translated {len(records)} sentences -> {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
