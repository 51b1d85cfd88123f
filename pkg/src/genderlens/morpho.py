"""Grammatical gender of the aligned Italian span via a deterministic cascade.

Decision order: unambiguous lexicon form, article agreement (window 2 before
the span, skipping adjectives), suffix heuristic, Unknown. Epicene nouns
resolve only through their article; bare epicenes stay Unknown. The lexicon
and article tables are versioned data files covering the profession inventory.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .corpus import Gender, SentenceRecord, split_token
from .errors import ParseError, ValidationError

__all__ = [
    "GenderLabel",
    "LexiconEntry",
    "GenderLexicon",
    "ArticleTable",
    "GenderOutcome",
    "detect_gender",
    "extract_outcome",
    "default_lexicon",
    "default_articles",
]


class GenderLabel(Enum):
    MASCULINE = "Masculine"
    FEMININE = "Feminine"
    UNKNOWN = "Unknown"


_GOLD_TO_LABEL = {Gender.MALE: GenderLabel.MASCULINE, Gender.FEMALE: GenderLabel.FEMININE}


@dataclass(frozen=True)
class LexiconEntry:
    lemma: str
    masc_forms: frozenset[str]
    fem_forms: frozenset[str]
    epicene: bool

    def all_forms(self) -> frozenset[str]:
        return self.masc_forms | self.fem_forms


class GenderLexicon:
    """Profession lemma -> Italian masculine/feminine surface forms."""

    def __init__(self, entries: dict[str, LexiconEntry]):
        self.entries = {k.lower(): v for k, v in entries.items()}
        for entry in self.entries.values():
            if not entry.epicene and entry.masc_forms & entry.fem_forms:
                raise ValidationError(
                    f"non-epicene entry {entry.lemma!r} shares forms across genders"
                )
            if not entry.masc_forms or not entry.fem_forms:
                raise ValidationError(f"entry {entry.lemma!r} misses a form set")
        # form -> set of genders it can realize, across all entries
        self.form_genders: dict[str, set[GenderLabel]] = {}
        for entry in self.entries.values():
            for form in entry.masc_forms:
                self.form_genders.setdefault(form, set()).add(GenderLabel.MASCULINE)
            for form in entry.fem_forms:
                self.form_genders.setdefault(form, set()).add(GenderLabel.FEMININE)

    def __contains__(self, lemma: str) -> bool:
        return lemma.lower() in self.entries

    def entry(self, lemma: str) -> LexiconEntry:
        try:
            return self.entries[lemma.lower()]
        except KeyError:
            raise ValidationError(f"lemma {lemma!r} not in gender lexicon") from None

    @classmethod
    def load(cls, path: str | Path) -> "GenderLexicon":
        entries = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 4:
                    raise ParseError("expected 4 tab-separated fields", path, line_no)
                lemma, masc, fem, epicene = fields
                if epicene not in ("true", "false"):
                    raise ParseError(
                        f"epicene flag must be true/false, got {epicene!r}",
                        path,
                        line_no,
                    )
                if lemma.lower() in entries:
                    raise ParseError(f"duplicate lemma {lemma!r}", path, line_no)
                entries[lemma.lower()] = LexiconEntry(
                    lemma=lemma,
                    masc_forms=frozenset(f.lower() for f in masc.split(",") if f),
                    fem_forms=frozenset(f.lower() for f in fem.split(",") if f),
                    epicene=epicene == "true",
                )
        return cls(entries)


class ArticleTable:
    """Italian articles (inflected and elided) with their grammatical gender."""

    def __init__(self, gendered: dict[str, GenderLabel], opaque: frozenset[str]):
        self.gendered = {k.lower(): v for k, v in gendered.items()}
        self.opaque = frozenset(f.lower() for f in opaque)
        overlap = set(self.gendered) & self.opaque
        if overlap:
            raise ValidationError(f"articles mapped twice: {sorted(overlap)}")

    def is_article(self, token: str) -> bool:
        low = token.lower()
        return low in self.gendered or low in self.opaque

    def gender_of(self, token: str) -> GenderLabel | None:
        """Gender signalled by an article token; None if opaque or not one."""
        return self.gendered.get(token.lower())

    @classmethod
    def load(cls, path: str | Path) -> "ArticleTable":
        gendered: dict[str, GenderLabel] = {}
        opaque = set()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                form, cls_name = fields[0], fields[1]
                if form.lower() in gendered or form.lower() in opaque:
                    raise ParseError(f"duplicate article {form!r}", path, line_no)
                if cls_name == "masc":
                    gendered[form.lower()] = GenderLabel.MASCULINE
                elif cls_name == "fem":
                    gendered[form.lower()] = GenderLabel.FEMININE
                elif cls_name == "elided":
                    resolve = fields[2] if len(fields) > 2 else "-"
                    if resolve == "fem":
                        gendered[form.lower()] = GenderLabel.FEMININE
                    elif resolve == "masc":
                        gendered[form.lower()] = GenderLabel.MASCULINE
                    else:
                        opaque.add(form.lower())
                else:
                    raise ParseError(
                        f"unknown article class {cls_name!r}", path, line_no
                    )
        return cls(gendered, frozenset(opaque))


def default_lexicon() -> GenderLexicon:
    with resources.as_file(
        resources.files("genderlens.data").joinpath("gender_lexicon.tsv")
    ) as path:
        return GenderLexicon.load(path)


def default_articles() -> ArticleTable:
    with resources.as_file(
        resources.files("genderlens.data").joinpath("articles.tsv")
    ) as path:
        return ArticleTable.load(path)


def _article_evidence(
    tokens: list[str], span_start: int, articles: ArticleTable
) -> GenderLabel | None:
    """Nearest article in the two positions before the span, skipping adjectives.

    An opaque elided article (l') ends the search: it is this noun's article
    and carries no gender.
    """
    for back in (1, 2):
        pos = span_start - back
        if pos < 0:
            return None
        _, core, _ = split_token(tokens[pos])
        if articles.is_article(core):
            return articles.gender_of(core)
    return None


def _suffix_evidence(head: str) -> GenderLabel | None:
    low = head.lower()
    if low.endswith("essa"):
        return GenderLabel.FEMININE
    if low.endswith(("o", "i")):
        return GenderLabel.MASCULINE
    if low.endswith("a"):
        return GenderLabel.FEMININE
    return None  # -e and anything else: lexicon only


def detect_gender(
    target_tokens: list[str],
    span: set[int],
    lexicon: GenderLexicon,
    articles: ArticleTable,
) -> GenderLabel:
    """Gender of the aligned span; Unknown is the total fallback.

    On multi-token spans the first token with decisive lexicon evidence wins;
    a token known only as epicene restricts resolution to article agreement.
    """
    if not span:
        return GenderLabel.UNKNOWN
    indices = sorted(i for i in span if 0 <= i < len(target_tokens))
    if not indices:
        return GenderLabel.UNKNOWN

    epicene_hit = False
    for i in indices:
        _, core, _ = split_token(target_tokens[i])
        genders = lexicon.form_genders.get(core.lower())
        if not genders:
            continue
        if genders == {GenderLabel.MASCULINE}:
            return GenderLabel.MASCULINE
        if genders == {GenderLabel.FEMININE}:
            return GenderLabel.FEMININE
        epicene_hit = True

    article = _article_evidence(target_tokens, indices[0], articles)
    if article is not None:
        return article
    if epicene_hit:
        return GenderLabel.UNKNOWN  # bare epicene: no usable evidence

    _, head, _ = split_token(target_tokens[indices[-1]])
    suffix = _suffix_evidence(head)
    return suffix if suffix is not None else GenderLabel.UNKNOWN


@dataclass(frozen=True)
class GenderOutcome:
    """Per-sentence result of the extraction pipeline."""

    record_id: str
    gold_gender: Gender
    label: GenderLabel
    correct: bool | None  # None iff gold is Neutral
    span: frozenset[int]


def extract_outcome(
    record: SentenceRecord,
    translation_tokens: list[str],
    links,
    lexicon: GenderLexicon,
    articles: ArticleTable,
) -> GenderOutcome:
    """Compose entity projection and gender detection for one record.

    Unknown labels (including alignment misses, i.e. empty spans) count as
    incorrect for gendered records; Neutral records have no correctness.
    """
    from .align import project_entity

    span = project_entity(links, record.entity_index)
    label = detect_gender(translation_tokens, span, lexicon, articles)
    if record.gold_gender is Gender.NEUTRAL:
        correct = None
    else:
        correct = label is _GOLD_TO_LABEL[record.gold_gender]
    return GenderOutcome(
        record_id=record.id,
        gold_gender=record.gold_gender,
        label=label,
        correct=correct,
        span=frozenset(span),
    )
