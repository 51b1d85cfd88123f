"""Command-line pipeline; every stage is a subcommand writing its artifacts.

Exit codes: 0 success, 2 validation failure, 3 I/O failure. Each subcommand
also writes a machine-readable JSON log of counts, exclusions and decisions
next to its artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .align import read_pharaoh, train, viterbi_align, write_pharaoh
from .align import ParallelCorpus, load_bitext, load_parallel_files
from .attention import (
    aggregate,
    cue_attention,
    export_heatmap,
    iter_dumps,
    locate_spans,
    prompt_attention_mass,
    secondary_entity_attention,
)
from .corpus import (
    Gender,
    StereotypeClass,
    StereotypeLexicon,
    build_minimal_pairs,
    first_gendered_pronoun,
    parse_challenge_set,
    read_pair_file,
    split_token,
    write_pair_file,
)
from .errors import DumpFormatError, GenderLensError, ValidationError
from .metrics import (
    MetricsReport,
    minimal_pair_accuracy,
    prior_bias,
    standard_accuracy,
    unknown_rate,
)
from .morpho import default_articles, default_lexicon, GenderLexicon
from .neutralize import neutralize, verify_neutral
from .pipeline import (
    compute_outcomes,
    load_translations,
    read_outcomes,
    write_challenge_set,
    write_outcomes,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


@dataclass
class RunConfig:
    """Shared pipeline defaults; overridable via config file and flags."""

    lam: float = 4.0
    p0: float = 0.08
    iterations: int = 5
    n_min: int = 195
    layer_lo: int = 8
    layer_hi: int = 20
    format: str = "table"

    def lines(self) -> list[str]:
        return [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]


_CONFIG_TYPES = {
    "lam": float,
    "p0": float,
    "iterations": int,
    "n_min": int,
    "layer_lo": int,
    "layer_hi": int,
    "format": str,
}


def load_config_file(path: str | Path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in _CONFIG_TYPES:
                raise ValidationError(f"{path}:{line_no}: unknown config line {line!r}")
            try:
                values[key] = _CONFIG_TYPES[key](value.strip())
            except ValueError:
                raise ValidationError(
                    f"{path}:{line_no}: bad value for {key}: {value.strip()!r}"
                ) from None
    return values


def resolve_config(args) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            setattr(config, key, value)
    for key in _CONFIG_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(config, key, flag)
    if config.format not in ("table", "machine"):
        raise ValidationError(f"format must be table or machine, got {config.format!r}")
    if config.iterations < 1 or config.lam < 0 or not 0 < config.p0 < 1:
        raise ValidationError("aligner hyperparameters out of range")
    return config


def _write_log(out_dir: Path, name: str, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / name, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit_report(report: MetricsReport, out_dir: Path, config: RunConfig) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(report.render("table"), encoding="utf-8")
    (out_dir / "report.kv").write_text(report.render("machine"), encoding="utf-8")
    sys.stdout.write(report.render(config.format))


def cmd_neutralize(args, config: RunConfig) -> int:
    records = parse_challenge_set(args.input, id_prefix=args.id_prefix)
    neutralized = [neutralize(rec) for rec in records]
    write_challenge_set(neutralized, args.output)
    report = verify_neutral(neutralized)
    _write_log(
        Path(args.output).parent,
        Path(args.output).name + ".log.json",
        {
            "records": len(records),
            "residual_pronoun_ids": report.residual_pronoun_ids,
            "agreement_residue_ids": report.agreement_residue_ids,
        },
    )
    if not report.clean:
        sys.stderr.write(
            f"neutralization left residue in "
            f"{len(report.residual_pronoun_ids) + len(report.agreement_residue_ids)} "
            "records\n"
        )
        return EXIT_VALIDATION
    print(f"neutralized {len(records)} records -> {args.output}")
    return EXIT_OK


def cmd_align(args, config: RunConfig) -> int:
    if args.bitext:
        pairs = load_bitext(args.bitext)
    else:
        if not (args.source and args.target):
            raise ValidationError("provide --bitext or both --source and --target")
        pairs = load_parallel_files(args.source, args.target)
    corpus = ParallelCorpus(pairs)
    model = train(corpus, iterations=config.iterations, lam=config.lam, p0=config.p0)
    alignments = []
    distortion_only = 0
    for src, tgt in pairs:
        result = viterbi_align(model, src, tgt)
        distortion_only += len(result.distortion_only_targets)
        alignments.append(result.links)
    write_pharaoh(alignments, args.output)
    _write_log(
        Path(args.output).parent,
        Path(args.output).name + ".log.json",
        {
            "pairs": len(pairs),
            "iterations": config.iterations,
            "lambda": config.lam,
            "p0": config.p0,
            "log_likelihoods": model.log_likelihoods,
            "distortion_only_positions": distortion_only,
        },
    )
    print(f"aligned {len(pairs)} pairs -> {args.output}")
    return EXIT_OK


def _load_lexicons(args):
    lexicon = (
        GenderLexicon.load(args.gender_lexicon)
        if getattr(args, "gender_lexicon", None)
        else default_lexicon()
    )
    return lexicon, default_articles()


def cmd_evaluate(args, config: RunConfig) -> int:
    records = parse_challenge_set(args.challenge_set, id_prefix=args.id_prefix)
    if any(rec.gold_gender is Gender.NEUTRAL for rec in records):
        raise ValidationError(
            "challenge set contains Neutral records; use prior-bias for those"
        )
    translations = load_translations(args.translations)
    alignments = read_pharaoh(args.alignments) if args.alignments else None
    lexicon, articles = _load_lexicons(args)
    outcomes, diag = compute_outcomes(
        records, translations, lexicon, articles, alignments,
        iterations=config.iterations, lam=config.lam, p0=config.p0,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_outcomes(outcomes, out_dir / "outcomes.tsv")
    report = MetricsReport(
        accuracy=standard_accuracy(outcomes), unknown=unknown_rate(outcomes)
    )
    _emit_report(report, out_dir, config)
    _write_log(out_dir, "evaluate.log.json", {
        "records": len(records),
        **diag.as_dict(),
    })
    return EXIT_OK


def cmd_mpa(args, config: RunConfig) -> int:
    pro = parse_challenge_set(
        args.pro, stereotype_class=StereotypeClass.PRO_STEREOTYPICAL, id_prefix="pro"
    )
    anti = parse_challenge_set(
        args.anti, stereotype_class=StereotypeClass.ANTI_STEREOTYPICAL, id_prefix="anti"
    )
    if args.stereotypes:
        stereotype_lexicon = StereotypeLexicon.load(args.stereotypes)
    else:
        stereotype_lexicon = StereotypeLexicon.from_subsets(pro, anti)
    pairs, unpaired = build_minimal_pairs(pro + anti, stereotype_lexicon)
    outcomes = {}
    for path in args.outcomes:
        outcomes.update(read_outcomes(path))
    result = minimal_pair_accuracy(pairs, outcomes)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_pair_file(pairs, out_dir / "pairs.tsv")
    _emit_report(MetricsReport(mpa=result), out_dir, config)
    _write_log(out_dir, "mpa.log.json", {
        "pairs": result.total_pairs,
        "accurate_pairs": result.accurate,
        "unpaired_ids": unpaired,
        "accurate_pair_ids": [list(p) for p in result.accurate_pair_ids],
    })
    return EXIT_OK


def cmd_prior_bias(args, config: RunConfig) -> int:
    records = parse_challenge_set(args.challenge_set, id_prefix=args.id_prefix)
    gendered = [r.id for r in records if r.gold_gender is not Gender.NEUTRAL]
    if gendered:
        raise ValidationError(
            f"prior-bias requires a neutral set; {len(gendered)} gendered records "
            f"found (first: {gendered[0]})"
        )
    translations = load_translations(args.translations)
    alignments = read_pharaoh(args.alignments) if args.alignments else None
    lexicon, articles = _load_lexicons(args)
    outcomes, diag = compute_outcomes(
        records, translations, lexicon, articles, alignments,
        iterations=config.iterations, lam=config.lam, p0=config.p0,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_outcomes(outcomes, out_dir / "outcomes.tsv")
    report = MetricsReport(
        prior=prior_bias(outcomes), unknown=unknown_rate(outcomes)
    )
    _emit_report(report, out_dir, config)
    _write_log(out_dir, "prior_bias.log.json", {
        "records": len(records),
        **diag.as_dict(),
    })
    return EXIT_OK


def _load_dumps_by_id(dumps_dir: str) -> dict:
    return {dump.sentence_id: dump for dump in iter_dumps(dumps_dir)}


def _record_cue(record) -> str:
    cue = first_gendered_pronoun(record)
    if cue is None:
        raise ValidationError(f"record {record.id} has no gender cue")
    return cue


def cmd_attention_report(args, config: RunConfig) -> int:
    if args.validate_only:
        count = 0
        for dump in iter_dumps(args.dumps):
            count += 1
        print(f"validated {count} dumps under {args.dumps}")
        return EXIT_OK

    records = parse_challenge_set(args.challenge_set, id_prefix=args.id_prefix)
    by_id = {rec.id: rec for rec in records}
    lexicon, articles = _load_lexicons(args)
    dumps = _load_dumps_by_id(args.dumps)

    if bool(args.pairs) != bool(args.outcomes):
        raise ValidationError(
            "--pairs and --outcomes must be given together (accurate-pair "
            "filtering needs both)"
        )
    wanted_gender = Gender.FEMALE if args.cue_gender == "feminine" else Gender.MALE
    if args.pairs and args.outcomes:
        outcomes = {}
        for path in args.outcomes:
            outcomes.update(read_outcomes(path))
        selected_ids = []
        for male_id, female_id, _ in read_pair_file(args.pairs):
            male_out = outcomes.get(male_id)
            female_out = outcomes.get(female_id)
            if male_out and female_out and male_out.correct and female_out.correct:
                selected_ids.append(
                    female_id if wanted_gender is Gender.FEMALE else male_id
                )
    else:
        selected_ids = [
            rec.id for rec in records if rec.gold_gender is wanted_gender
        ]

    instances = []
    unmatched, missing_dump = [], []
    for rec_id in selected_ids:
        rec = by_id.get(rec_id)
        dump = dumps.get(rec_id)
        if rec is None or dump is None:
            missing_dump.append(rec_id)
            continue
        span = locate_spans(
            dump,
            lexicon.entry(rec.profession).all_forms(),
            _record_cue(rec),
            articles=articles,
        )
        if not span.matched:
            unmatched.append(rec_id)
            continue
        instances.append(cue_attention(dump, span))

    matrix = aggregate(instances, config.n_min)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    anchor = tuple(args.anchor) if args.anchor else None
    csv_path, png_path = export_heatmap(
        matrix, config.layer_lo, config.layer_hi, out_dir / "cue_attention",
        anchor=anchor,
    )
    _write_log(out_dir, "attention.log.json", {
        "selected": len(selected_ids),
        "aggregated": matrix.n,
        "unmatched_span_ids": unmatched,
        "missing_dump_ids": missing_dump,
        "layer_range": [config.layer_lo, config.layer_hi],
    })
    print(f"aggregated {matrix.n} instances -> {csv_path}, {png_path}")
    return EXIT_OK


def cmd_sanity_check(args, config: RunConfig) -> int:
    records = parse_challenge_set(args.challenge_set, id_prefix=args.id_prefix)
    lexicon, articles = _load_lexicons(args)
    dumps = _load_dumps_by_id(args.dumps)

    prompt_masses = []
    secondary_instances = []
    skipped = []
    for rec in records:
        dump = dumps.get(rec.id)
        if dump is None:
            continue
        secondary_forms = None
        if rec.secondary_entity_index is not None:
            _, lemma, _ = split_token(rec.tokens()[rec.secondary_entity_index])
            if lemma.lower() in lexicon:
                secondary_forms = lexicon.entry(lemma).all_forms()
        span = locate_spans(
            dump,
            lexicon.entry(rec.profession).all_forms(),
            _record_cue(rec),
            articles=articles,
            secondary_forms=secondary_forms,
        )
        if not span.matched:
            skipped.append(rec.id)
            continue
        prompt_masses.append(prompt_attention_mass(dump, span))
        if span.secondary_span:
            secondary_instances.append(secondary_entity_attention(dump, span))

    if not prompt_masses:
        raise ValidationError("no records with matched spans and dumps")

    mean_mass = sum(prompt_masses) / len(prompt_masses)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        f"prompt_attention_mass.mean={mean_mass:.4f}",
        f"prompt_attention_mass.n={len(prompt_masses)}",
    ]
    payload = {
        "prompt_attention_mass_mean": mean_mass,
        "instances": len(prompt_masses),
        "skipped_ids": skipped,
    }
    if secondary_instances:
        sec = aggregate(secondary_instances, len(secondary_instances))
        export_heatmap(
            sec, config.layer_lo, config.layer_hi, out_dir / "secondary_attention",
        )
        peak = float(sec.values.max())
        lines.append(f"secondary_attention.max={peak:.4f}")
        lines.append(f"secondary_attention.n={sec.n}")
        payload["secondary_attention_max"] = peak
        payload["secondary_attention_n"] = sec.n
    (out_dir / "sanity.kv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_log(out_dir, "sanity.log.json", payload)
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--format", choices=["table", "machine"], default=None)
    parser.add_argument("--show-config", action="store_true",
                        help="print the resolved configuration and exit")
    parser.add_argument("--id-prefix", default=None,
                        help="prefix for record ids parsed from challenge sets")


def _add_aligner_opts(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lam", "--lambda", dest="lam", type=float, default=None,
                        help="diagonal tension (default 4.0)")
    parser.add_argument("--p0", type=float, default=None,
                        help="NULL alignment mass (default 0.08)")
    parser.add_argument("--iterations", type=int, default=None,
                        help="EM iterations (default 5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genderlens",
        description="Gender-bias diagnostics for machine translation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("neutralize", help="emit the neutralized challenge set")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_neutralize)

    p = sub.add_parser("align", help="train the aligner and emit Pharaoh links")
    p.add_argument("--source")
    p.add_argument("--target")
    p.add_argument("--bitext", help="single file with 'src ||| tgt' lines")
    p.add_argument("--output", required=True)
    _add_aligner_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("evaluate", help="standard gender accuracy + unknown rate")
    p.add_argument("--challenge-set", required=True)
    p.add_argument("--translations", required=True)
    p.add_argument("--alignments", help="precomputed Pharaoh file (else trains)")
    p.add_argument("--gender-lexicon")
    p.add_argument("--out-dir", required=True)
    _add_aligner_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("mpa", help="minimal pair accuracy over pro+anti subsets")
    p.add_argument("--pro", required=True)
    p.add_argument("--anti", required=True)
    p.add_argument("--outcomes", action="append", required=True)
    p.add_argument("--stereotypes", help="stereotype lexicon file (else derived)")
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_mpa)

    p = sub.add_parser("prior-bias", help="masc/fem split on the neutral set")
    p.add_argument("--challenge-set", required=True)
    p.add_argument("--translations", required=True)
    p.add_argument("--alignments")
    p.add_argument("--gender-lexicon")
    p.add_argument("--out-dir", required=True)
    _add_aligner_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_prior_bias)

    p = sub.add_parser("attention-report",
                       help="aggregate cue attention over accurate pairs")
    p.add_argument("--dumps", required=True)
    p.add_argument("--challenge-set")
    p.add_argument("--pairs", help="pair file from the mpa stage")
    p.add_argument("--outcomes", action="append", default=None)
    p.add_argument("--gender-lexicon")
    p.add_argument("--cue-gender", choices=["feminine", "masculine"],
                   default="feminine")
    p.add_argument("--n-min", dest="n_min", type=int, default=None)
    p.add_argument("--layer-lo", dest="layer_lo", type=int, default=None)
    p.add_argument("--layer-hi", dest="layer_hi", type=int, default=None)
    p.add_argument("--anchor", nargs=2, type=float, default=None,
                   metavar=("VMIN", "VMAX"))
    p.add_argument("--validate-only", action="store_true",
                   help="only run dump format validation")
    p.add_argument("--out-dir")
    _add_common(p)
    p.set_defaults(func=cmd_attention_report)

    p = sub.add_parser("sanity-check",
                       help="prompt attention mass + secondary entity control")
    p.add_argument("--dumps", required=True)
    p.add_argument("--challenge-set", required=True)
    p.add_argument("--gender-lexicon")
    p.add_argument("--layer-lo", dest="layer_lo", type=int, default=None)
    p.add_argument("--layer-hi", dest="layer_hi", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_sanity_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        if getattr(args, "show_config", False):
            print("\n".join(config.lines()))
            return EXIT_OK
        if args.command == "attention-report" and not args.validate_only:
            if not (args.challenge_set and args.out_dir):
                raise ValidationError(
                    "attention-report needs --challenge-set and --out-dir "
                    "(or --validate-only)"
                )
        return args.func(args, config)
    except (ValidationError, DumpFormatError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except GenderLensError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
