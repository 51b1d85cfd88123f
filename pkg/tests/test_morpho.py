import pytest

from genderlens.align import AlignmentLink
from genderlens.corpus import Gender, SentenceRecord
from genderlens.errors import ValidationError
from genderlens.morpho import (
    ArticleTable,
    GenderLabel,
    GenderLexicon,
    LexiconEntry,
    detect_gender,
    extract_outcome,
)


def load_gold(data_dir):
    items = []
    for line in (data_dir / "morpho_gold.tsv").read_text("utf-8").splitlines():
        if not line:
            continue
        tokens_s, span_s, expected = line.split("\t")
        span = set() if span_s == "-" else {int(i) for i in span_s.split(",")}
        items.append((tokens_s.split(), span, GenderLabel(expected)))
    return items


class TestDetectGender:
    def test_epicene_resolved_by_feminine_article(self, lexicon, articles):
        assert detect_gender(["la", "governante"], {1}, lexicon, articles) \
            is GenderLabel.FEMININE

    def test_masculine_form_resolved_by_lexicon(self, lexicon, articles):
        assert detect_gender(["il", "bibliotecario"], {1}, lexicon, articles) \
            is GenderLabel.MASCULINE

    def test_bare_epicene_is_unknown(self, lexicon, articles):
        assert detect_gender(["contabile"], {0}, lexicon, articles) \
            is GenderLabel.UNKNOWN

    def test_empty_span_is_unknown(self, lexicon, articles):
        assert detect_gender(["il", "cuoco"], set(), lexicon, articles) \
            is GenderLabel.UNKNOWN

    def test_out_of_bounds_span_is_unknown(self, lexicon, articles):
        assert detect_gender(["cuoco"], {7}, lexicon, articles) \
            is GenderLabel.UNKNOWN

    def test_lexicon_beats_article(self, lexicon, articles):
        # decisive lexicon form wins even against a contradicting article
        assert detect_gender(["il", "sviluppatrice"], {1}, lexicon, articles) \
            is GenderLabel.FEMININE

    def test_epicene_never_resolved_by_suffix(self, lexicon, articles):
        # "autista" ends in -a but is epicene; only an article may decide
        assert detect_gender(["autista"], {0}, lexicon, articles) \
            is GenderLabel.UNKNOWN

    def test_suffix_fallback_for_oov(self, lexicon, articles):
        assert detect_gender(["macellaio"], {0}, lexicon, articles) \
            is GenderLabel.MASCULINE
        assert detect_gender(["benzinaia"], {0}, lexicon, articles) \
            is GenderLabel.FEMININE
        assert detect_gender(["giudice"], {0}, lexicon, articles) \
            is GenderLabel.UNKNOWN

    def test_gold_file_scores_100_percent(self, data_dir, lexicon, articles):
        items = load_gold(data_dir)
        assert len(items) == 60
        for tokens, span, expected in items:
            assert detect_gender(tokens, span, lexicon, articles) is expected, tokens

    def test_determinism(self, data_dir, lexicon, articles):
        items = load_gold(data_dir)
        first = [detect_gender(t, s, lexicon, articles) for t, s, _ in items]
        second = [detect_gender(t, s, lexicon, articles) for t, s, _ in items]
        assert first == second


class TestTables:
    def test_lexicon_rejects_cross_gender_forms(self):
        with pytest.raises(ValidationError):
            GenderLexicon({
                "x": LexiconEntry("x", frozenset({"forma"}), frozenset({"forma"}),
                                  epicene=False),
            })

    def test_lexicon_requires_both_sides(self):
        with pytest.raises(ValidationError):
            GenderLexicon({
                "x": LexiconEntry("x", frozenset({"a"}), frozenset(), epicene=False),
            })

    def test_article_table_contents(self, articles):
        assert articles.gender_of("il") is GenderLabel.MASCULINE
        assert articles.gender_of("la") is GenderLabel.FEMININE
        assert articles.gender_of("un'") is GenderLabel.FEMININE
        assert articles.gender_of("l'") is None
        assert articles.is_article("l'")
        assert not articles.is_article("molto")

    def test_unknown_lemma(self, lexicon):
        with pytest.raises(ValidationError):
            lexicon.entry("astronaut")

    def test_duplicate_lemma_rejected(self, tmp_path):
        from genderlens.errors import ParseError

        path = tmp_path / "lex.tsv"
        path.write_text(
            "nurse\tinfermiere\tinfermiera\tfalse\n"
            "nurse\tinfermiere\tinfermiera\tfalse\n",
            encoding="utf-8",
        )
        with pytest.raises(ParseError, match="duplicate"):
            GenderLexicon.load(path)

    def test_duplicate_article_rejected(self, tmp_path):
        from genderlens.errors import ParseError

        path = tmp_path / "articles.tsv"
        path.write_text("il\tmasc\nil\tfem\n", encoding="utf-8")
        with pytest.raises(ParseError, match="duplicate"):
            ArticleTable.load(path)


class TestExtractOutcome:
    def make_record(self, gender=Gender.MALE):
        return SentenceRecord(
            "r1", gender, 1, "The cook prepared the soup because he was hungry.",
            "cook",
        )

    def test_wrong_gender_realization(self, lexicon, articles):
        # gold Male rendered as "la governante": Feminine, incorrect
        outcome = extract_outcome(
            self.make_record(), ["la", "governante"],
            [AlignmentLink(1, 1)], lexicon, articles,
        )
        assert outcome.label is GenderLabel.FEMININE
        assert outcome.correct is False
        assert outcome.span == frozenset({1})

    def test_correct_feminine(self, lexicon, articles):
        outcome = extract_outcome(
            self.make_record(Gender.FEMALE), ["la", "bibliotecaria"],
            [AlignmentLink(1, 1)], lexicon, articles,
        )
        assert outcome.label is GenderLabel.FEMININE
        assert outcome.correct is True

    def test_alignment_miss_is_unknown_and_incorrect(self, lexicon, articles):
        outcome = extract_outcome(
            self.make_record(), ["la", "zuppa"], [], lexicon, articles,
        )
        assert outcome.label is GenderLabel.UNKNOWN
        assert outcome.correct is False
        assert outcome.span == frozenset()

    def test_neutral_record_has_no_correctness(self, lexicon, articles):
        rec = SentenceRecord(
            "n1", Gender.NEUTRAL, 1,
            "The cook prepared the soup because they were hungry.", "cook",
        )
        outcome = extract_outcome(rec, ["il", "cuoco"], [AlignmentLink(1, 1)],
                                  lexicon, articles)
        assert outcome.correct is None
        assert outcome.label is GenderLabel.MASCULINE
