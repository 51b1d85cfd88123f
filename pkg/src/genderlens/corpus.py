"""WinoMT-style challenge sets: parsing, stereotype classes, minimal pairs.

The challenge-set layout is tab-separated with four columns
(gender, entity index, sentence, profession) and an optional fifth column
holding the secondary (non-coreferent) entity index. Token indices count
whitespace tokens of the sentence as written.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import PairingError, ParseError, ValidationError

__all__ = [
    "Gender",
    "StereotypeClass",
    "ProfessionStereotype",
    "PronounRole",
    "SentenceRecord",
    "MinimalPair",
    "StereotypeLexicon",
    "tokenize",
    "split_token",
    "pronoun_role",
    "pairing_key",
    "first_gendered_pronoun",
    "parse_challenge_set",
    "build_minimal_pairs",
    "write_pair_file",
    "read_pair_file",
    "GENDERED_PRONOUNS",
]


class Gender(Enum):
    MALE = "male"
    FEMALE = "female"
    NEUTRAL = "neutral"


class StereotypeClass(Enum):
    PRO_STEREOTYPICAL = "pro"
    ANTI_STEREOTYPICAL = "anti"
    NONE = "none"


class ProfessionStereotype(Enum):
    PRO_F = "ProF"
    PRO_M = "ProM"


class PronounRole(Enum):
    SUBJ = "SUBJ"
    OBJ = "OBJ"
    DET = "DET"
    POSS = "POSS"
    REFL = "REFL"


GENDERED_PRONOUNS = frozenset(
    ["he", "she", "him", "her", "his", "hers", "himself", "herself"]
)

MALE_PRONOUNS = frozenset(["he", "him", "his", "himself"])
FEMALE_PRONOUNS = frozenset(["she", "her", "hers", "herself"])

_PUNCT = ".,;:!?\"()"

# Words that cannot start the noun phrase of a determiner reading. Used by the
# lookahead that splits "her" into OBJ vs DET (and "his" into POSS vs DET):
# a pronoun followed by one of these, by punctuation, or by nothing is not a
# determiner.
_OBJ_TRIGGERS = frozenset(
    """
    about above across after against along among around at before behind below
    beneath beside between by down during for from in inside into near of off
    on onto out outside over past through to toward towards under up upon with
    without
    that because and but so if when while since then as
    """.split()
)


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization; matches the dataset's index convention."""
    return text.split()


def split_token(token: str) -> tuple[str, str, str]:
    """Split a token into (leading punctuation, core, trailing punctuation)."""
    start, end = 0, len(token)
    while start < end and token[start] in _PUNCT:
        start += 1
    while end > start and token[end - 1] in _PUNCT:
        end -= 1
    return token[:start], token[start:end], token[end:]


def _object_like(tokens: list[str], index: int) -> bool:
    _, _, trailing = split_token(tokens[index])
    if trailing:
        return True
    if index + 1 >= len(tokens):
        return True
    _, nxt, _ = split_token(tokens[index + 1])
    return not nxt or nxt.lower() in _OBJ_TRIGGERS


def pronoun_role(tokens: list[str], index: int) -> PronounRole | None:
    """Grammatical role of the gendered pronoun at ``tokens[index]``.

    Returns None when the token is not a gendered pronoun. "her" and "his"
    are disambiguated by lookahead (see _OBJ_TRIGGERS); WinoMT's templated
    sentences make that heuristic exact, and any residual mismatch surfaces
    as an unpaired record rather than a silent error.
    """
    _, core, _ = split_token(tokens[index])
    low = core.lower()
    if low not in GENDERED_PRONOUNS:
        return None
    if low in ("he", "she"):
        return PronounRole.SUBJ
    if low == "him":
        return PronounRole.OBJ
    if low in ("himself", "herself"):
        return PronounRole.REFL
    if low == "hers":
        return PronounRole.POSS
    if low == "her":
        return PronounRole.OBJ if _object_like(tokens, index) else PronounRole.DET
    # "his": possessive pronoun at clause end, determiner otherwise
    return PronounRole.POSS if _object_like(tokens, index) else PronounRole.DET


@dataclass(frozen=True)
class SentenceRecord:
    """One challenge-set sentence with its gold annotations."""

    id: str
    gold_gender: Gender
    entity_index: int
    sentence: str
    profession: str
    stereotype_class: StereotypeClass = StereotypeClass.NONE
    secondary_entity_index: int | None = None

    def tokens(self) -> list[str]:
        return tokenize(self.sentence)


@dataclass(frozen=True)
class MinimalPair:
    """Two records identical up to their gendered pronouns."""

    male_variant: SentenceRecord
    female_variant: SentenceRecord
    profession: str
    stereotype_of_profession: ProfessionStereotype

    def key_hash(self) -> str:
        key = pairing_key(self.male_variant)
        digest = hashlib.sha1(repr(key).encode("utf-8")).hexdigest()
        return digest[:12]


class StereotypeLexicon:
    """Profession lemma -> ProF/ProM, total over the pro/anti inventory."""

    def __init__(self, entries: dict[str, ProfessionStereotype]):
        self._entries = {k.lower(): v for k, v in entries.items()}

    def __contains__(self, lemma: str) -> bool:
        return lemma.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, lemma: str) -> ProfessionStereotype:
        try:
            return self._entries[lemma.lower()]
        except KeyError:
            raise ValidationError(
                f"profession {lemma!r} missing from stereotype lexicon"
            ) from None

    @classmethod
    def from_subsets(
        cls,
        pro_records: list[SentenceRecord],
        anti_records: list[SentenceRecord] = (),
    ) -> "StereotypeLexicon":
        """Compile the lexicon from subset membership.

        A profession paired with a female pronoun in the pro-stereotypical
        subset is ProF; with a male pronoun, ProM. Anti records contribute the
        inverted reading. Conflicts are rejected: no lemma may map to both.
        """
        entries: dict[str, ProfessionStereotype] = {}

        def put(lemma: str, cls_: ProfessionStereotype) -> None:
            prev = entries.get(lemma)
            if prev is not None and prev is not cls_:
                raise ValidationError(
                    f"profession {lemma!r} classified as both ProF and ProM"
                )
            entries[lemma] = cls_

        for rec in pro_records:
            if rec.gold_gender is Gender.NEUTRAL:
                continue
            cls_ = (
                ProfessionStereotype.PRO_F
                if rec.gold_gender is Gender.FEMALE
                else ProfessionStereotype.PRO_M
            )
            put(rec.profession.lower(), cls_)
        for rec in anti_records:
            if rec.gold_gender is Gender.NEUTRAL:
                continue
            cls_ = (
                ProfessionStereotype.PRO_M
                if rec.gold_gender is Gender.FEMALE
                else ProfessionStereotype.PRO_F
            )
            put(rec.profession.lower(), cls_)
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "StereotypeLexicon":
        entries = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 2:
                    raise ParseError("expected 2 tab-separated fields", path, line_no)
                lemma, cls_name = fields
                if lemma.lower() in entries:
                    raise ParseError(f"duplicate lemma {lemma!r}", path, line_no)
                try:
                    entries[lemma.lower()] = ProfessionStereotype(cls_name)
                except ValueError:
                    raise ParseError(
                        f"unknown stereotype class {cls_name!r}", path, line_no
                    ) from None
        return cls(entries)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for lemma in sorted(self._entries):
                fh.write(f"{lemma}\t{self._entries[lemma].value}\n")


_GENDER_ALIASES = {
    "male": Gender.MALE,
    "m": Gender.MALE,
    "female": Gender.FEMALE,
    "f": Gender.FEMALE,
    "neutral": Gender.NEUTRAL,
    "n": Gender.NEUTRAL,
}


def _check_record(rec: SentenceRecord, path, line_no) -> None:
    tokens = rec.tokens()
    if not 0 <= rec.entity_index < len(tokens):
        raise ParseError(
            f"entity index {rec.entity_index} out of range for "
            f"{len(tokens)}-token sentence",
            path,
            line_no,
        )
    _, core, _ = split_token(tokens[rec.entity_index])
    last = rec.profession.split()[-1] if rec.profession.split() else ""
    if core.lower() != last.lower():
        raise ParseError(
            f"token at entity index ({core!r}) does not end profession "
            f"{rec.profession!r}",
            path,
            line_no,
        )
    if rec.secondary_entity_index is not None:
        if not 0 <= rec.secondary_entity_index < len(tokens):
            raise ParseError(
                f"secondary entity index {rec.secondary_entity_index} out of range",
                path,
                line_no,
            )
        if rec.secondary_entity_index == rec.entity_index:
            raise ParseError(
                "secondary entity index equals target entity index", path, line_no
            )


def parse_challenge_set(
    path: str | Path,
    expected_gender_column: bool = True,
    stereotype_class: StereotypeClass = StereotypeClass.NONE,
    id_prefix: str | None = None,
) -> list[SentenceRecord]:
    """Parse a tab-separated challenge set into SentenceRecords.

    With ``expected_gender_column`` the first column must hold
    male/female/neutral; without it the file starts at the entity-index
    column and records default to Neutral gold. Line numbers (1-based)
    become record ids, optionally prefixed "prefix:line".
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            expected = (4, 5) if expected_gender_column else (3, 4)
            if len(fields) not in expected:
                raise ParseError(
                    f"expected {expected[0]} or {expected[1]} tab-separated "
                    f"fields, found {len(fields)}",
                    path,
                    line_no,
                )
            if expected_gender_column:
                gender_field, index_field, sentence, profession = fields[:4]
                secondary_field = fields[4] if len(fields) == 5 else None
                gender = _GENDER_ALIASES.get(gender_field.strip().lower())
                if gender is None:
                    raise ParseError(
                        f"unrecognized gender value {gender_field!r}", path, line_no
                    )
            else:
                index_field, sentence, profession = fields[:3]
                secondary_field = fields[3] if len(fields) == 4 else None
                gender = Gender.NEUTRAL
            try:
                entity_index = int(index_field)
            except ValueError:
                raise ParseError(
                    f"entity index {index_field!r} is not an integer", path, line_no
                ) from None
            secondary_index = None
            if secondary_field is not None and secondary_field.strip() != "":
                try:
                    secondary_index = int(secondary_field)
                except ValueError:
                    raise ParseError(
                        f"secondary entity index {secondary_field!r} is not an "
                        "integer",
                        path,
                        line_no,
                    ) from None
            rec_id = f"{id_prefix}:{line_no}" if id_prefix else str(line_no)
            rec = SentenceRecord(
                id=rec_id,
                gold_gender=gender,
                entity_index=entity_index,
                sentence=sentence,
                profession=profession,
                stereotype_class=stereotype_class,
                secondary_entity_index=secondary_index,
            )
            _check_record(rec, path, line_no)
            records.append(rec)
    return records


def pairing_key(record: SentenceRecord) -> tuple:
    """Gender-erased pairing key: tokens with pronouns mapped to role tags."""
    tokens = record.tokens()
    mapped = []
    for i, tok in enumerate(tokens):
        role = pronoun_role(tokens, i)
        if role is None:
            mapped.append(tok)
        else:
            lead, _, trail = split_token(tok)
            mapped.append(f"{lead}<{role.value}>{trail}")
    return (tuple(mapped), record.entity_index)


def first_gendered_pronoun(record: SentenceRecord) -> str | None:
    """Surface form of the record's gender cue (first gendered pronoun)."""
    tokens = record.tokens()
    for i in range(len(tokens)):
        if pronoun_role(tokens, i) is not None:
            return split_token(tokens[i])[1]
    return None


def build_minimal_pairs(
    records: list[SentenceRecord],
    lexicon: StereotypeLexicon,
) -> tuple[list[MinimalPair], list[str]]:
    """Group records into minimal pairs by their gender-erased key.

    Returns (pairs, unpaired record ids). Keys holding more than one record
    of the same gender raise PairingError; keys missing one gender are
    reported as unpaired. Input must be fully gendered (no Neutral records).
    """
    for rec in records:
        if rec.gold_gender is Gender.NEUTRAL:
            raise ValidationError(
                f"record {rec.id} is Neutral; minimal pairs need gendered records"
            )

    buckets: dict[tuple, dict[Gender, list[SentenceRecord]]] = defaultdict(
        lambda: {Gender.MALE: [], Gender.FEMALE: []}
    )
    for rec in records:
        buckets[pairing_key(rec)][rec.gold_gender].append(rec)

    pairs = []
    unpaired = []
    for key in sorted(buckets, key=repr):
        males = buckets[key][Gender.MALE]
        females = buckets[key][Gender.FEMALE]
        if len(males) > 1 or len(females) > 1:
            dupes = males if len(males) > 1 else females
            raise PairingError(
                "duplicate pairing key for records "
                + ", ".join(sorted(r.id for r in dupes))
            )
        if males and females:
            male, female = males[0], females[0]
            if male.profession.lower() != female.profession.lower():
                raise PairingError(
                    f"records {male.id}/{female.id} share a key but disagree "
                    "on profession"
                )
            pairs.append(
                MinimalPair(
                    male_variant=male,
                    female_variant=female,
                    profession=male.profession,
                    stereotype_of_profession=lexicon.lookup(male.profession),
                )
            )
        else:
            unpaired.extend(r.id for r in males + females)
    return pairs, unpaired


def write_pair_file(pairs: list[MinimalPair], path: str | Path) -> None:
    """One pair per line: key hash, male id, female id, stereotype class."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(
                f"{pair.key_hash()}\t{pair.male_variant.id}\t"
                f"{pair.female_variant.id}\t{pair.stereotype_of_profession.value}\n"
            )


def read_pair_file(
    path: str | Path,
) -> list[tuple[str, str, ProfessionStereotype]]:
    """(male id, female id, stereotype) triples from a serialized pair file."""
    triples = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError("expected 4 tab-separated fields", path, line_no)
            _, male_id, female_id, cls_name = fields
            try:
                stereotype = ProfessionStereotype(cls_name)
            except ValueError:
                raise ParseError(
                    f"unknown stereotype class {cls_name!r}", path, line_no
                ) from None
            triples.append((male_id, female_id, stereotype))
    return triples
