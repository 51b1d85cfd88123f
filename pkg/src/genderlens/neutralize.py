"""Neutral-set construction: they/them rewriting with verb agreement repair.

The rewrite table and the irregular-verb table live in versioned data files
(data/pronoun_rewrites.tsv, data/verb_irregulars.tsv) so the reconstruction
can be audited against any released neutralized set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from importlib import resources

from .corpus import (
    GENDERED_PRONOUNS,
    Gender,
    PronounRole,
    SentenceRecord,
    pronoun_role,
    split_token,
)
from .errors import ParseError, ValidationError

__all__ = [
    "RewriteRule",
    "load_rewrite_rules",
    "load_verb_irregulars",
    "plural_verb_form",
    "neutralize",
    "verify_neutral",
    "NeutralityReport",
]


@dataclass(frozen=True)
class RewriteRule:
    match_form: str
    role: PronounRole
    replacement: str


def _data_text(name: str) -> str:
    return resources.files("genderlens.data").joinpath(name).read_text("utf-8")


def load_rewrite_rules(text: str | None = None) -> dict[tuple[str, PronounRole], str]:
    """Parse the rewrite-rule table into a (form, role) -> replacement map."""
    if text is None:
        text = _data_text("pronoun_rewrites.tsv")
    rules = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError("expected 3 tab-separated fields", line=line_no)
        form, role_name, replacement = fields
        rule = RewriteRule(form.lower(), PronounRole(role_name), replacement)
        rules[(rule.match_form, rule.role)] = rule.replacement
    return rules


def load_verb_irregulars(text: str | None = None) -> dict[str, str]:
    if text is None:
        text = _data_text("verb_irregulars.tsv")
    table = {}
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        singular, plural = line.split("\t")
        table[singular] = plural
    return table


_REWRITES = load_rewrite_rules()
_IRREGULARS = load_verb_irregulars()

# Tokens that end in -s but are never third-singular verbs; keeps the
# agreement check from flagging the rewrites themselves.
_NOT_VERBS = frozenset(["they", "them", "their", "theirs", "themselves", "this"])

_ADVERBS = frozenset(
    """
    always never often rarely seldom sometimes usually just still also even
    really truly almost already now then soon later today yesterday
    """.split()
)


def _is_adverb(word: str) -> bool:
    low = word.lower()
    return low in _ADVERBS or (low.endswith("ly") and len(low) > 3)


def plural_verb_form(verb: str) -> str:
    """Map a third-singular verb form to its plural; non-3sg forms pass through."""
    low = verb.lower()
    if low in _IRREGULARS:
        return _IRREGULARS[low]
    if low.endswith("ies") and len(low) > 4:
        return verb[:-3] + "y"
    if low.endswith(("ses", "zes", "xes", "ches", "shes", "oes")):
        return verb[:-2]
    if low.endswith("s") and not low.endswith("ss"):
        return verb[:-1]
    return verb


def _match_case(template: str, word: str) -> str:
    if template.isupper() and len(template) > 1:
        return word.upper()
    if template[:1].isupper():
        return word[:1].upper() + word[1:]
    return word


def _is_third_singular(word: str) -> bool:
    low = word.lower()
    if low in _NOT_VERBS:
        return False
    if low in _IRREGULARS:
        return True
    return len(low) >= 3 and low.endswith("s") and not low.endswith("ss")


def neutralize(record: SentenceRecord) -> SentenceRecord:
    """Rewrite a gendered record into its singular-they form.

    Every gendered pronoun is replaced 1:1 per the rewrite table; the first
    finite verb after each replaced subject pronoun (skipping adverbs) is
    repaired to its plural form. Token count and entity indices are preserved.
    """
    if record.gold_gender is Gender.NEUTRAL:
        warnings.warn(f"record {record.id} is already neutral; returning unchanged")
        return record

    tokens = record.tokens()
    out = list(tokens)
    subj_positions = []
    replaced = set()
    for i, tok in enumerate(tokens):
        role = pronoun_role(tokens, i)
        if role is None:
            continue
        lead, core, trail = split_token(tok)
        replacement = _REWRITES[(core.lower(), role)]
        out[i] = f"{lead}{_match_case(core, replacement)}{trail}"
        replaced.add(i)
        if role is PronounRole.SUBJ:
            subj_positions.append(i)

    if not replaced:
        raise ValidationError(
            f"record {record.id} contains no gendered pronoun; cannot neutralize"
        )

    for pos in subj_positions:
        j = pos + 1
        while j < len(out):
            _, core, _ = split_token(out[j])
            if j not in replaced and not _is_adverb(core):
                break
            j += 1
        if j < len(out):
            lead, core, trail = split_token(out[j])
            out[j] = f"{lead}{plural_verb_form(core)}{trail}"

    return replace(record, gold_gender=Gender.NEUTRAL, sentence=" ".join(out))


@dataclass
class NeutralityReport:
    """Residue scan over a (supposedly) neutralized set."""

    residual_pronoun_ids: list[str] = field(default_factory=list)
    agreement_residue_ids: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.residual_pronoun_ids and not self.agreement_residue_ids


def verify_neutral(records: list[SentenceRecord]) -> NeutralityReport:
    """Flag residual gendered pronouns and 3sg verbs governed by "they"."""
    report = NeutralityReport()
    for rec in records:
        tokens = rec.tokens()
        cores = [split_token(t)[1].lower() for t in tokens]
        if any(c in GENDERED_PRONOUNS for c in cores):
            report.residual_pronoun_ids.append(rec.id)
        for i, core in enumerate(cores):
            if core != "they":
                continue
            j = i + 1
            while j < len(cores) and _is_adverb(cores[j]):
                j += 1
            if j < len(cores) and _is_third_singular(cores[j]):
                report.agreement_residue_ids.append(rec.id)
                break
    return report
