"""Stage wiring: file formats shared by the CLI subcommands."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .align import (
    AlignmentLink,
    ParallelCorpus,
    tokenize_for_alignment,
    train,
    viterbi_align,
)
from .corpus import Gender, SentenceRecord
from .errors import ParseError, ValidationError
from .morpho import ArticleTable, GenderLabel, GenderLexicon, GenderOutcome, extract_outcome

__all__ = [
    "load_translations",
    "write_challenge_set",
    "write_outcomes",
    "read_outcomes",
    "compute_outcomes",
    "EvaluationDiagnostics",
]


def load_translations(path: str | Path) -> dict[str, str]:
    """id -> translation text, tab-separated."""
    translations = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError("expected 2 tab-separated fields", path, line_no)
            if fields[0] in translations:
                raise ParseError(f"duplicate id {fields[0]!r}", path, line_no)
            translations[fields[0]] = fields[1]
    return translations


def write_challenge_set(records: list[SentenceRecord], path: str | Path) -> None:
    """Serialize records in the 4/5-column tab-separated layout."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fields = [
                rec.gold_gender.value,
                str(rec.entity_index),
                rec.sentence,
                rec.profession,
            ]
            if rec.secondary_entity_index is not None:
                fields.append(str(rec.secondary_entity_index))
            fh.write("\t".join(fields) + "\n")


def write_outcomes(outcomes: list[GenderOutcome], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for out in outcomes:
            correct = "-" if out.correct is None else str(out.correct).lower()
            span = ",".join(str(i) for i in sorted(out.span)) if out.span else "-"
            fh.write(
                f"{out.record_id}\t{out.gold_gender.value}\t{out.label.value}\t"
                f"{correct}\t{span}\n"
            )


def read_outcomes(path: str | Path) -> dict[str, GenderOutcome]:
    outcomes = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ParseError("expected 5 tab-separated fields", path, line_no)
            rec_id, gold, label, correct, span = fields
            outcome = GenderOutcome(
                record_id=rec_id,
                gold_gender=Gender(gold),
                label=GenderLabel(label),
                correct=None if correct == "-" else correct == "true",
                span=frozenset(
                    int(i) for i in span.split(",") if span != "-" and i
                ),
            )
            # correctness is defined exactly for gendered records, and a
            # correct outcome always carries a detected gender
            if (outcome.correct is None) != (outcome.gold_gender is Gender.NEUTRAL):
                raise ParseError(
                    f"correct flag inconsistent with gold {gold!r}", path, line_no
                )
            if outcome.correct and outcome.label is GenderLabel.UNKNOWN:
                raise ParseError(
                    "correct outcome cannot carry an Unknown label", path, line_no
                )
            outcomes[rec_id] = outcome
    return outcomes


@dataclass
class EvaluationDiagnostics:
    """Counts and ids a run must surface, never swallow."""

    unknown_ids: list[str] = field(default_factory=list)
    alignment_miss_ids: list[str] = field(default_factory=list)
    distortion_only_ids: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "unknown_ids": self.unknown_ids,
            "alignment_miss_ids": self.alignment_miss_ids,
            "distortion_only_ids": self.distortion_only_ids,
        }


def compute_outcomes(
    records: list[SentenceRecord],
    translations: dict[str, str],
    lexicon: GenderLexicon,
    articles: ArticleTable,
    alignments: list[list[AlignmentLink]] | None = None,
    iterations: int = 5,
    lam: float = 4.0,
    p0: float = 0.08,
) -> tuple[list[GenderOutcome], EvaluationDiagnostics]:
    """Run alignment projection plus gender extraction for every record.

    With precomputed ``alignments`` (one Pharaoh line per record, in order)
    no training happens; otherwise an aligner is trained on the records'
    own sentence/translation pairs.
    """
    missing = [rec.id for rec in records if rec.id not in translations]
    if missing:
        raise ValidationError(
            f"{len(missing)} records lack translations (first: {missing[0]})"
        )
    source_tokens = [tokenize_for_alignment(rec.sentence) for rec in records]
    target_tokens = [tokenize_for_alignment(translations[rec.id]) for rec in records]

    diag = EvaluationDiagnostics()
    if alignments is None:
        corpus = ParallelCorpus(list(zip(source_tokens, target_tokens)))
        model = train(corpus, iterations=iterations, lam=lam, p0=p0)
        alignments = []
        for rec, src, tgt in zip(records, source_tokens, target_tokens):
            result = viterbi_align(model, src, tgt)
            if result.distortion_only_targets:
                diag.distortion_only_ids.append(rec.id)
            alignments.append(result.links)
    elif len(alignments) != len(records):
        raise ValidationError(
            f"{len(alignments)} alignment lines for {len(records)} records"
        )

    outcomes = []
    for rec, tgt, links in zip(records, target_tokens, alignments):
        outcome = extract_outcome(rec, tgt, links, lexicon, articles)
        if not outcome.span:
            diag.alignment_miss_ids.append(rec.id)
        if outcome.label is GenderLabel.UNKNOWN:
            diag.unknown_ids.append(rec.id)
        outcomes.append(outcome)
    return outcomes, diag
