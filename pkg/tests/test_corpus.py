import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genderlens.corpus import (
    Gender,
    ProfessionStereotype,
    PronounRole,
    SentenceRecord,
    StereotypeLexicon,
    build_minimal_pairs,
    first_gendered_pronoun,
    pairing_key,
    parse_challenge_set,
    pronoun_role,
    read_pair_file,
    split_token,
    tokenize,
    write_pair_file,
)
from genderlens.errors import PairingError, ParseError, ValidationError


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


class TestParse:
    def test_winomt_layout(self, tmp_path):
        path = tmp_path / "set.tsv"
        write_lines(path, [
            "male\t1\tThe developer argued with the designer because he did "
            "not like the design.\tdeveloper",
        ])
        records = parse_challenge_set(path)
        assert len(records) == 1
        rec = records[0]
        assert rec.gold_gender is Gender.MALE
        assert rec.entity_index == 1
        assert rec.profession == "developer"
        assert rec.id == "1"
        assert rec.secondary_entity_index is None

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("", encoding="utf-8")
        assert parse_challenge_set(path) == []

    def test_three_fields_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        write_lines(path, ["male\t1\tThe developer slept."])
        with pytest.raises(ParseError) as exc:
            parse_challenge_set(path)
        assert ":1:" in str(exc.value)

    def test_non_integer_index(self, tmp_path):
        path = tmp_path / "bad.tsv"
        write_lines(path, ["male\tx\tThe developer slept.\tdeveloper"])
        with pytest.raises(ParseError):
            parse_challenge_set(path)

    def test_index_out_of_range(self, tmp_path):
        path = tmp_path / "bad.tsv"
        write_lines(path, ["male\t9\tThe developer slept.\tdeveloper"])
        with pytest.raises(ParseError):
            parse_challenge_set(path)

    def test_entity_token_must_match_profession(self, tmp_path):
        path = tmp_path / "bad.tsv"
        write_lines(path, ["male\t0\tThe developer slept.\tdeveloper"])
        with pytest.raises(ParseError):
            parse_challenge_set(path)

    def test_secondary_column(self, tmp_path):
        path = tmp_path / "set.tsv"
        write_lines(path, [
            "female\t1\tThe nurse asked the doctor because she was unsure."
            "\tnurse\t4",
        ])
        rec = parse_challenge_set(path)[0]
        assert rec.secondary_entity_index == 4

    def test_secondary_equals_entity_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        write_lines(path, [
            "female\t1\tThe nurse asked the doctor because she was unsure."
            "\tnurse\t1",
        ])
        with pytest.raises(ParseError):
            parse_challenge_set(path)

    def test_no_gender_column_mode(self, tmp_path):
        path = tmp_path / "bare.tsv"
        write_lines(path, ["1\tThe nurse smiled happily today.\tnurse"])
        rec = parse_challenge_set(path, expected_gender_column=False)[0]
        assert rec.gold_gender is Gender.NEUTRAL

    def test_id_prefix(self, tmp_path):
        path = tmp_path / "set.tsv"
        write_lines(path, ["male\t1\tThe developer slept well.\tdeveloper"])
        rec = parse_challenge_set(path, id_prefix="pro")[0]
        assert rec.id == "pro:1"

    def test_unknown_gender_value(self, tmp_path):
        path = tmp_path / "bad.tsv"
        write_lines(path, ["robot\t1\tThe developer slept well.\tdeveloper"])
        with pytest.raises(ParseError):
            parse_challenge_set(path)


class TestPronounRoles:
    def test_roles(self):
        cases = [
            ("Because he left early.", 1, PronounRole.SUBJ),
            ("She paid him.", 2, PronounRole.OBJ),
            ("She cut her hair.", 2, PronounRole.DET),
            ("He paid her.", 2, PronounRole.OBJ),
            ("He waited for her.", 3, PronounRole.OBJ),
            ("He told her that it works.", 2, PronounRole.OBJ),
            ("The idea was his.", 3, PronounRole.POSS),
            ("The idea was hers.", 3, PronounRole.POSS),
            ("He cut his hair.", 2, PronounRole.DET),
            ("She did it herself.", 3, PronounRole.REFL),
        ]
        for sentence, index, expected in cases:
            tokens = tokenize(sentence)
            assert pronoun_role(tokens, index) is expected, sentence

    def test_non_pronoun(self):
        tokens = tokenize("The developer slept.")
        assert all(pronoun_role(tokens, i) is None for i in range(len(tokens)))

    def test_split_token(self):
        assert split_token("her.") == ("", "her", ".")
        assert split_token('"Hello,"') == ('"', "Hello", ',"')
        assert split_token("...") == ("...", "", "")

    def test_first_gendered_pronoun(self):
        rec = SentenceRecord("x", Gender.MALE, 1,
                             "The guard slept because he was tired.", "guard")
        assert first_gendered_pronoun(rec) == "he"


def make_pair_records(sentence_m, sentence_f, profession, entity_index):
    male = SentenceRecord("m1", Gender.MALE, entity_index, sentence_m, profession)
    female = SentenceRecord("f1", Gender.FEMALE, entity_index, sentence_f, profession)
    return male, female


LIBRARIAN_PRO = "The analyst consulted with the librarian because she knows a lot about books."
LIBRARIAN_ANTI = "The analyst consulted with the librarian because he knows a lot about books."


@pytest.fixture()
def small_lexicon():
    return StereotypeLexicon({
        "librarian": ProfessionStereotype.PRO_F,
        "developer": ProfessionStereotype.PRO_M,
    })


class TestMinimalPairs:
    def test_librarian_pair(self, small_lexicon):
        male, female = make_pair_records(LIBRARIAN_ANTI, LIBRARIAN_PRO, "librarian", 5)
        pairs, unpaired = build_minimal_pairs([female, male], small_lexicon)
        assert len(pairs) == 1 and not unpaired
        pair = pairs[0]
        assert pair.male_variant.id == "m1"
        assert pair.female_variant.id == "f1"
        assert pair.stereotype_of_profession is ProfessionStereotype.PRO_F

    def test_unpaired_single(self, small_lexicon):
        male, _ = make_pair_records(LIBRARIAN_ANTI, LIBRARIAN_PRO, "librarian", 5)
        pairs, unpaired = build_minimal_pairs([male], small_lexicon)
        assert pairs == [] and unpaired == ["m1"]

    def test_duplicate_same_gender_is_ambiguous(self, small_lexicon):
        male, female = make_pair_records(LIBRARIAN_ANTI, LIBRARIAN_PRO, "librarian", 5)
        dupe = SentenceRecord("m2", Gender.MALE, 5, LIBRARIAN_ANTI, "librarian")
        with pytest.raises(PairingError) as exc:
            build_minimal_pairs([male, female, dupe], small_lexicon)
        assert "m1" in str(exc.value) and "m2" in str(exc.value)

    def test_neutral_input_rejected(self, small_lexicon):
        rec = SentenceRecord("n1", Gender.NEUTRAL, 5,
                             LIBRARIAN_PRO.replace("she", "they"), "librarian")
        with pytest.raises(ValidationError):
            build_minimal_pairs([rec], small_lexicon)

    def test_role_sensitive_keys_do_not_cross_pair(self, small_lexicon):
        # "him" (OBJ) must not pair with a determiner "her"
        male = SentenceRecord("m1", Gender.MALE, 1,
                              "The developer paid him.", "developer")
        female = SentenceRecord("f1", Gender.FEMALE, 1,
                                "The developer cut her hair.", "developer")
        pairs, unpaired = build_minimal_pairs([male, female], small_lexicon)
        assert pairs == []
        assert sorted(unpaired) == ["f1", "m1"]

    def test_permutation_symmetry(self, pro_anti_records):
        pro, anti = pro_anti_records
        lexicon = StereotypeLexicon.from_subsets(pro, anti)
        records = (pro + anti)[:300]
        pairs_a, unpaired_a = build_minimal_pairs(records, lexicon)
        shuffled = records[:]
        random.Random(7).shuffle(shuffled)
        pairs_b, unpaired_b = build_minimal_pairs(shuffled, lexicon)
        key = lambda p: (p.male_variant.id, p.female_variant.id)
        assert sorted(map(key, pairs_a)) == sorted(map(key, pairs_b))
        assert sorted(unpaired_a) == sorted(unpaired_b)

    def test_count_invariant_and_token_shape(self, pro_anti_records):
        pro, anti = pro_anti_records
        lexicon = StereotypeLexicon.from_subsets(pro, anti)
        records = pro[:120] + anti[:80]  # leaves 40 unpaired
        pairs, unpaired = build_minimal_pairs(records, lexicon)
        assert 2 * len(pairs) + len(unpaired) == len(records)
        for pair in pairs:
            m_tokens = pair.male_variant.tokens()
            f_tokens = pair.female_variant.tokens()
            assert len(m_tokens) == len(f_tokens)
            assert m_tokens != f_tokens

    def test_pair_file_roundtrip(self, tmp_path, small_lexicon):
        male, female = make_pair_records(LIBRARIAN_ANTI, LIBRARIAN_PRO, "librarian", 5)
        pairs, _ = build_minimal_pairs([male, female], small_lexicon)
        path = tmp_path / "pairs.tsv"
        write_pair_file(pairs, path)
        triples = read_pair_file(path)
        assert triples == [("m1", "f1", ProfessionStereotype.PRO_F)]


class TestStereotypeLexicon:
    def test_from_subsets(self, pro_anti_records):
        pro, anti = pro_anti_records
        lexicon = StereotypeLexicon.from_subsets(pro, anti)
        assert lexicon.lookup("librarian") is ProfessionStereotype.PRO_F
        assert lexicon.lookup("developer") is ProfessionStereotype.PRO_M
        assert len(lexicon) == 44

    def test_conflicting_membership_rejected(self):
        a = SentenceRecord("1", Gender.FEMALE, 1,
                           "The nurse slept because she was tired.", "nurse")
        b = SentenceRecord("2", Gender.MALE, 1,
                           "The nurse slept because he was tired.", "nurse")
        with pytest.raises(ValidationError):
            StereotypeLexicon.from_subsets([a, b])

    def test_missing_profession(self):
        lexicon = StereotypeLexicon({})
        with pytest.raises(ValidationError):
            lexicon.lookup("astronaut")

    def test_load_rejects_duplicate_lemma(self, tmp_path):
        path = tmp_path / "stereo.tsv"
        path.write_text("nurse\tProF\nnurse\tProM\n", encoding="utf-8")
        with pytest.raises(ParseError, match="duplicate"):
            StereotypeLexicon.load(path)

    def test_dump_load_roundtrip(self, tmp_path):
        lexicon = StereotypeLexicon({
            "nurse": ProfessionStereotype.PRO_F,
            "driver": ProfessionStereotype.PRO_M,
        })
        path = tmp_path / "stereo.tsv"
        lexicon.dump(path)
        loaded = StereotypeLexicon.load(path)
        assert loaded.lookup("nurse") is ProfessionStereotype.PRO_F
        assert loaded.lookup("driver") is ProfessionStereotype.PRO_M
        assert len(loaded) == 2

    def test_packaged_file_matches_fixture_classes(self, pro_anti_records):
        from importlib import resources

        pro, anti = pro_anti_records
        derived = StereotypeLexicon.from_subsets(pro, anti)
        with resources.as_file(
            resources.files("genderlens.data").joinpath("stereotypes.tsv")
        ) as path:
            shipped = StereotypeLexicon.load(path)
        for rec in pro:
            assert shipped.lookup(rec.profession) is derived.lookup(rec.profession)


def test_pairing_key_erases_gender():
    male = SentenceRecord("m", Gender.MALE, 1,
                          "The developer paid him for his work.", "developer")
    female = SentenceRecord("f", Gender.FEMALE, 1,
                            "The developer paid her for her work.", "developer")
    assert pairing_key(male) == pairing_key(female)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), size=st.integers(0, 160))
def test_pair_count_invariant_on_random_subsets(pro_anti_records, seed, size):
    pro, anti = pro_anti_records
    rng = random.Random(seed)
    records = rng.sample(pro + anti, size)
    lexicon = StereotypeLexicon.from_subsets(pro, anti)
    pairs, unpaired = build_minimal_pairs(records, lexicon)
    assert 2 * len(pairs) + len(unpaired) == len(records)
