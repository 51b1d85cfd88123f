"""Accuracy, minimal-pair, prior-bias and unknown-rate measures.

Every figure is backed by stored counts; percentages are derived values.
Reports print with one decimal, round-half-up, and empty strata render as
absent rather than 0% so "no data" never reads as "all wrong".
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .corpus import Gender, MinimalPair, ProfessionStereotype
from .errors import ValidationError
from .morpho import GenderLabel, GenderOutcome

__all__ = [
    "StandardAccuracy",
    "MpaResult",
    "PriorBias",
    "UnknownRate",
    "MetricsReport",
    "standard_accuracy",
    "minimal_pair_accuracy",
    "prior_bias",
    "unknown_rate",
    "format_pct",
]


def format_pct(value: float | None) -> str:
    if value is None:
        return "-"
    return str(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _pct(numer: int, denom: int) -> float | None:
    if denom == 0:
        return None
    return 100.0 * numer / denom


@dataclass(frozen=True)
class StandardAccuracy:
    total: int
    correct: int
    masc_total: int
    masc_correct: int
    fem_total: int
    fem_correct: int

    @property
    def overall(self) -> float | None:
        return _pct(self.correct, self.total)

    @property
    def masc(self) -> float | None:
        return _pct(self.masc_correct, self.masc_total)

    @property
    def fem(self) -> float | None:
        return _pct(self.fem_correct, self.fem_total)


def standard_accuracy(outcomes: list[GenderOutcome]) -> StandardAccuracy:
    """Overall/masculine/feminine accuracy; Unknown counts as incorrect."""
    if not outcomes:
        raise ValidationError("standard_accuracy requires at least one outcome")
    counts = {Gender.MALE: [0, 0], Gender.FEMALE: [0, 0]}
    for out in outcomes:
        if out.gold_gender is Gender.NEUTRAL:
            raise ValidationError(
                f"outcome {out.record_id} is Neutral; standard accuracy is "
                "defined on gendered records"
            )
        bucket = counts[out.gold_gender]
        bucket[0] += 1
        bucket[1] += 1 if out.correct else 0
    masc_total, masc_correct = counts[Gender.MALE]
    fem_total, fem_correct = counts[Gender.FEMALE]
    return StandardAccuracy(
        total=masc_total + fem_total,
        correct=masc_correct + fem_correct,
        masc_total=masc_total,
        masc_correct=masc_correct,
        fem_total=fem_total,
        fem_correct=fem_correct,
    )


@dataclass(frozen=True)
class MpaResult:
    total_pairs: int
    accurate_pair_ids: tuple[tuple[str, str], ...]  # (male id, female id)
    pro_f_accurate: int
    pro_m_accurate: int

    @property
    def accurate(self) -> int:
        return len(self.accurate_pair_ids)

    @property
    def mpa(self) -> float | None:
        return _pct(self.accurate, self.total_pairs)

    @property
    def pro_f_share(self) -> float | None:
        return _pct(self.pro_f_accurate, self.accurate)

    @property
    def pro_m_share(self) -> float | None:
        return _pct(self.pro_m_accurate, self.accurate)


def minimal_pair_accuracy(
    pairs: list[MinimalPair],
    outcomes: dict[str, GenderOutcome],
) -> MpaResult:
    """A pair is accurate iff both variants were translated correctly."""
    if not pairs:
        raise ValidationError("minimal_pair_accuracy requires at least one pair")
    accurate = []
    pro_f = pro_m = 0
    for pair in pairs:
        male_id = pair.male_variant.id
        female_id = pair.female_variant.id
        try:
            male_out = outcomes[male_id]
            female_out = outcomes[female_id]
        except KeyError as missing:
            raise ValidationError(
                f"pair ({male_id}, {female_id}) misses outcome {missing}"
            ) from None
        if male_out.correct and female_out.correct:
            accurate.append((male_id, female_id))
            if pair.stereotype_of_profession is ProfessionStereotype.PRO_F:
                pro_f += 1
            else:
                pro_m += 1
    return MpaResult(
        total_pairs=len(pairs),
        accurate_pair_ids=tuple(accurate),
        pro_f_accurate=pro_f,
        pro_m_accurate=pro_m,
    )


@dataclass(frozen=True)
class PriorBias:
    masc_detected: int
    fem_detected: int
    unknown_excluded: int

    @property
    def detected(self) -> int:
        return self.masc_detected + self.fem_detected

    @property
    def prior_masc(self) -> float | None:
        return _pct(self.masc_detected, self.detected)

    @property
    def prior_fem(self) -> float | None:
        return _pct(self.fem_detected, self.detected)


def prior_bias(neutral_outcomes: list[GenderOutcome]) -> PriorBias:
    """Masculine/feminine split over detected realizations on the Neutral Set.

    Unknown outcomes are excluded from numerator and denominator alike.
    """
    masc = fem = unknown = 0
    for out in neutral_outcomes:
        if out.gold_gender is not Gender.NEUTRAL:
            raise ValidationError(
                f"outcome {out.record_id} is gendered; prior bias is defined "
                "on the Neutral Set"
            )
        if out.label is GenderLabel.MASCULINE:
            masc += 1
        elif out.label is GenderLabel.FEMININE:
            fem += 1
        else:
            unknown += 1
    if masc + fem == 0:
        raise ValidationError("no gender realizations detected")
    return PriorBias(masc_detected=masc, fem_detected=fem, unknown_excluded=unknown)


@dataclass(frozen=True)
class UnknownRate:
    total: int
    unknown: int

    @property
    def rate(self) -> float | None:
        return _pct(self.unknown, self.total)


def unknown_rate(outcomes: list[GenderOutcome]) -> UnknownRate:
    if not outcomes:
        raise ValidationError("unknown_rate requires at least one outcome")
    unknown = sum(1 for o in outcomes if o.label is GenderLabel.UNKNOWN)
    return UnknownRate(total=len(outcomes), unknown=unknown)


@dataclass
class MetricsReport:
    """Assembled report; any component may be absent depending on the stage."""

    accuracy: StandardAccuracy | None = None
    mpa: MpaResult | None = None
    prior: PriorBias | None = None
    unknown: UnknownRate | None = None

    def machine_lines(self) -> list[str]:
        """Stable key=value serialization, counts first."""
        lines = []
        if self.accuracy is not None:
            a = self.accuracy
            lines += [
                f"accuracy.total={a.total}",
                f"accuracy.correct={a.correct}",
                f"accuracy.masc_total={a.masc_total}",
                f"accuracy.masc_correct={a.masc_correct}",
                f"accuracy.fem_total={a.fem_total}",
                f"accuracy.fem_correct={a.fem_correct}",
                f"accuracy.overall_pct={format_pct(a.overall)}",
                f"accuracy.masc_pct={format_pct(a.masc)}",
                f"accuracy.fem_pct={format_pct(a.fem)}",
            ]
        if self.mpa is not None:
            m = self.mpa
            lines += [
                f"mpa.total_pairs={m.total_pairs}",
                f"mpa.accurate_pairs={m.accurate}",
                f"mpa.pro_f_accurate={m.pro_f_accurate}",
                f"mpa.pro_m_accurate={m.pro_m_accurate}",
                f"mpa.mpa_pct={format_pct(m.mpa)}",
                f"mpa.pro_f_share_pct={format_pct(m.pro_f_share)}",
                f"mpa.pro_m_share_pct={format_pct(m.pro_m_share)}",
            ]
        if self.prior is not None:
            p = self.prior
            lines += [
                f"prior.masc_detected={p.masc_detected}",
                f"prior.fem_detected={p.fem_detected}",
                f"prior.unknown_excluded={p.unknown_excluded}",
                f"prior.masc_pct={format_pct(p.prior_masc)}",
                f"prior.fem_pct={format_pct(p.prior_fem)}",
            ]
        if self.unknown is not None:
            u = self.unknown
            lines += [
                f"unknown.total={u.total}",
                f"unknown.count={u.unknown}",
                f"unknown.rate_pct={format_pct(u.rate)}",
            ]
        return lines

    def table_lines(self) -> list[str]:
        lines = []
        if self.accuracy is not None:
            a = self.accuracy
            lines.append("Standard Gender Accuracy")
            lines.append(
                f"  overall    {format_pct(a.overall):>6}%   ({a.correct}/{a.total})"
            )
            lines.append(
                f"  masculine  {format_pct(a.masc):>6}%   "
                f"({a.masc_correct}/{a.masc_total})"
            )
            lines.append(
                f"  feminine   {format_pct(a.fem):>6}%   "
                f"({a.fem_correct}/{a.fem_total})"
            )
        if self.mpa is not None:
            m = self.mpa
            lines.append("Minimal Pair Accuracy")
            lines.append(
                f"  MPA        {format_pct(m.mpa):>6}%   ({m.accurate}/{m.total_pairs})"
            )
            lines.append(
                f"  Pro-F      {format_pct(m.pro_f_share):>6}%   "
                f"({m.pro_f_accurate}/{m.accurate})"
            )
            lines.append(
                f"  Pro-M      {format_pct(m.pro_m_share):>6}%   "
                f"({m.pro_m_accurate}/{m.accurate})"
            )
        if self.prior is not None:
            p = self.prior
            lines.append("Prior Bias (Neutral Set)")
            lines.append(
                f"  masculine  {format_pct(p.prior_masc):>6}%   "
                f"({p.masc_detected}/{p.detected})"
            )
            lines.append(
                f"  feminine   {format_pct(p.prior_fem):>6}%   "
                f"({p.fem_detected}/{p.detected})"
            )
            lines.append(f"  unknown excluded: {p.unknown_excluded}")
        if self.unknown is not None:
            u = self.unknown
            lines.append("Unknown rate")
            lines.append(
                f"  unknown    {format_pct(u.rate):>6}%   ({u.unknown}/{u.total})"
            )
        return lines

    def render(self, fmt: str = "table") -> str:
        if fmt == "machine":
            return "\n".join(self.machine_lines()) + "\n"
        return "\n".join(self.table_lines()) + "\n"
