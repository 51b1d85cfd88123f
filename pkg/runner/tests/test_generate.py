import json
import struct
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from genderlens_runner.cli import main, read_sources
from genderlens_runner.generate import SourceSentence, translate_and_dump

SENTENCES = [
    "The developer visited the hairdresser because she needed to update her records.",
    "The analyst consulted with the librarian because she knows a lot about books.",
]


def make_challenge_file(path: Path) -> Path:
    lines = [
        f"female\t1\t{SENTENCES[0]}\tdeveloper",
        f"female\t5\t{SENTENCES[1]}\tlibrarian",
    ]
    path.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    return path


def validate_with_primary(dumps_dir: Path) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "genderlens.cli", "attention-report",
         "--dumps", str(dumps_dir), "--validate-only"],
        capture_output=True, text=True,
    )


def run_translate(loaded_tiny_model, out_dir, style="plain", budget=4):
    model, tokenizer = loaded_tiny_model
    sources = [SourceSentence(str(i + 1), s) for i, s in enumerate(SENTENCES)]
    return translate_and_dump(model, tokenizer, sources, style, out_dir,
                              max_new_tokens=budget)


class TestDumps:
    def test_dumps_pass_primary_validator(self, loaded_tiny_model, tmp_path):
        records = run_translate(loaded_tiny_model, tmp_path / "dumps")
        assert len(records) == 2
        result = validate_with_primary(tmp_path / "dumps")
        assert result.returncode == 0, result.stderr
        assert "validated 2 dumps" in result.stdout

    def test_chat_dumps_pass_primary_validator(self, loaded_tiny_model, tmp_path):
        run_translate(loaded_tiny_model, tmp_path / "dumps", style="chat")
        assert validate_with_primary(tmp_path / "dumps").returncode == 0

    def test_two_runs_are_byte_identical(self, loaded_tiny_model, tmp_path):
        run_translate(loaded_tiny_model, tmp_path / "a")
        run_translate(loaded_tiny_model, tmp_path / "b")
        for sub in sorted((tmp_path / "a").iterdir()):
            twin = tmp_path / "b" / sub.name
            for name in ("meta", "attn.bin"):
                assert (sub / name).read_bytes() == (twin / name).read_bytes()

    def test_attention_rows_are_distributions(self, loaded_tiny_model, tmp_path):
        records = run_translate(loaded_tiny_model, tmp_path / "dumps")
        raw = (Path(records[0].dump_path) / "attn.bin").read_bytes()
        assert raw[:4] == b"ATTD"
        version, n_steps = struct.unpack("<II", raw[4:12])
        assert (version, n_steps) == (1, len(records[0].generated_tokens))
        meta = json.loads((Path(records[0].dump_path) / "meta").read_text())
        offset = 12
        for t in range(n_steps):
            count = meta["n_layers"] * meta["n_heads"] * (meta["prompt_len"] + t)
            block = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
            sums = block.reshape(meta["n_layers"], meta["n_heads"], -1).sum(-1)
            assert np.abs(sums - 1.0).max() < 1e-4
            offset += 4 * count

    def test_source_span_covers_source_words(self, loaded_tiny_model, tmp_path):
        records = run_translate(loaded_tiny_model, tmp_path / "dumps")
        meta = json.loads((Path(records[0].dump_path) / "meta").read_text())
        lo, hi = meta["source_span"]
        span_tokens = [t.lstrip("▁")
                       for t in meta["context_tokens"][lo:hi]]
        assert span_tokens[0] == "The"
        assert "hairdresser" in span_tokens
        assert span_tokens[-1] == "."

    def test_translation_matches_detokenized_output(self, loaded_tiny_model,
                                                    tmp_path):
        for rec in run_translate(loaded_tiny_model, tmp_path / "dumps"):
            rebuilt = " ".join(t.lstrip("▁")
                               for t in rec.generated_tokens).strip()
            assert rec.translation == rebuilt

    def test_budget_marks_truncation(self, loaded_tiny_model, tmp_path):
        records = run_translate(loaded_tiny_model, tmp_path / "dumps", budget=2)
        for rec in records:
            assert len(rec.generated_tokens) <= 2
            if len(rec.generated_tokens) == 2:
                assert rec.truncated

    def test_empty_sources_rejected(self, loaded_tiny_model, tmp_path):
        model, tokenizer = loaded_tiny_model
        with pytest.raises(ValueError):
            translate_and_dump(model, tokenizer, [], "plain", tmp_path)

    def test_zero_budget_rejected(self, loaded_tiny_model, tmp_path):
        model, tokenizer = loaded_tiny_model
        with pytest.raises(ValueError):
            translate_and_dump(model, tokenizer,
                               [SourceSentence("1", "Hello.")], "plain",
                               tmp_path, max_new_tokens=0)

    def test_zero_step_dump_is_format_valid(self, tmp_path):
        # a model whose first proposal is EOS produces an empty dump that
        # must still pass the primary validator
        from genderlens_runner.dumpio import write_dump

        write_dump(tmp_path / "dumps" / "1", sentence_id="1",
                   prompt_tokens=["▁a", "▁b"], source_span=(0, 1),
                   generated_tokens=[], steps=[], n_layers=2, n_heads=2)
        assert validate_with_primary(tmp_path / "dumps").returncode == 0


class TestCli:
    def test_end_to_end(self, tiny_model_dir, tmp_path, capsys):
        challenge = make_challenge_file(tmp_path / "challenge.tsv")
        out = tmp_path / "run"
        code = main(["--model", str(tiny_model_dir),
                     "--challenge-set", str(challenge),
                     "--out-dir", str(out), "--max-new-tokens", "4"])
        assert code == 0
        translations = (out / "translations.tsv").read_text().splitlines()
        assert len(translations) == 2
        assert translations[0].startswith("1\t")
        log = json.loads((out / "run.log.json").read_text())
        assert log["sentences"] == 2
        assert validate_with_primary(out).returncode == 0

    def test_read_sources_uses_line_numbers(self, tmp_path):
        challenge = make_challenge_file(tmp_path / "challenge.tsv")
        sources = read_sources(challenge)
        assert [s.sentence_id for s in sources] == ["1", "2"]
        assert sources[1].text == SENTENCES[1]

    def test_bad_model_path_is_error(self, tmp_path):
        challenge = make_challenge_file(tmp_path / "challenge.tsv")
        code = main(["--model", str(tmp_path / "missing"),
                     "--challenge-set", str(challenge),
                     "--out-dir", str(tmp_path / "out")])
        assert code == 2

    def test_empty_challenge_is_error(self, tiny_model_dir, tmp_path):
        empty = tmp_path / "empty.tsv"
        empty.write_text("", encoding="utf-8")
        code = main(["--model", str(tiny_model_dir),
                     "--challenge-set", str(empty),
                     "--out-dir", str(tmp_path / "out")])
        assert code == 2
