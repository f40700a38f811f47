import json

import pytest

from ner_embed_exporter.conll import read_sentences
from ner_embed_exporter.export import ExportConfig, export

TEN_SENTENCES = "".join(
    f"# id s{i}\n" + "".join(f"{w} O\n" for w in words) + "\n"
    for i, words in enumerate(
        [
            ("pharma", "company", "eli", "lilly"),
            ("lilly", "announced"),
            ("a", "b", "c"),
            ("corpbeg", "corpmid", "corpend"),
            ("one",),
            ("x9", "y7"),
            ("company", "company", "company"),
            ("zz", "top"),
            ("tiny", "words", "here", "now"),
            ("last", "one", "indeed"),
        ]
    )
)


def test_read_sentences_ids_and_words():
    sentences = read_sentences(TEN_SENTENCES)
    assert len(sentences) == 10
    assert sentences[0].id == "s0"
    assert sentences[0].words == ("pharma", "company", "eli", "lilly")
    assert read_sentences("") == []


def test_read_sentences_running_index_without_comment():
    sentences = read_sentences("a O\n\nb O\n")
    assert [s.id for s in sentences] == ["0", "1"]


def test_export_config_requires_model():
    with pytest.raises(ValueError):
        ExportConfig(model="", input_path="x", output_path="y")


def _export(tmp_path, tiny_model_dir, text, specials, name="out.ndjson"):
    conll = tmp_path / "input.conll"
    conll.write_text(text, encoding="utf-8")
    out = tmp_path / name
    config = ExportConfig(
        model=tiny_model_dir,
        input_path=str(conll),
        output_path=str(out),
        include_specials=specials,
    )
    summary = export(config)
    lines = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
    return summary, lines[0], lines[1:], out


def test_export_record_per_sentence(tmp_path, tiny_model_dir):
    summary, header, records, _ = _export(tmp_path, tiny_model_dir, TEN_SENTENCES, specials=False)
    assert summary.exported == 10 and not summary.skipped
    assert header["format"] == "ner-embeddings"
    assert header["version"] == 1
    assert header["encoder"] == tiny_model_dir
    assert header["specials_included"] is False
    assert [r["id"] for r in records] == [f"s{i}" for i in range(10)]
    for record in records:
        n = len(record["subtokens"])
        assert len(record["word_index"]) == n
        assert len(record["vectors"]) == n
        assert all(len(row) == record["dim"] for row in record["vectors"])
        assert record["dim"] == 16
        assert -1 not in record["word_index"]


def test_export_specials_first_and_last(tmp_path, tiny_model_dir):
    _, header, records, _ = _export(tmp_path, tiny_model_dir, TEN_SENTENCES, specials=True)
    assert header["specials_included"] is True
    for record in records:
        flags = [w == -1 for w in record["word_index"]]
        assert flags[0] and flags[-1]
        assert sum(flags) == 2
        assert record["subtokens"][0] == "[CLS]" and record["subtokens"][-1] == "[SEP]"


def test_export_specials_add_two_rows(tmp_path, tiny_model_dir):
    _, _, bare, _ = _export(tmp_path, tiny_model_dir, "# id a\neli O\nlilly O\n", specials=False)
    _, _, wrapped, _ = _export(tmp_path, tiny_model_dir, "# id a\neli O\nlilly O\n", specials=True, name="b.ndjson")
    assert len(wrapped[0]["subtokens"]) == len(bare[0]["subtokens"]) + 2


def test_export_word_alignment_follows_subword_splits(tmp_path, tiny_model_dir):
    _, _, records, _ = _export(tmp_path, tiny_model_dir, "# id a\neli O\nlilly O\n", specials=False)
    record = records[0]
    # "eli" has no whole-word entry, so it splits to pieces of word 0;
    # "lilly" becomes lil + ##ly, both word 1
    assert record["subtokens"] == ["e", "##l", "##i", "lil", "##ly"]
    assert record["word_index"] == [0, 0, 0, 1, 1]


def test_export_rerun_identical(tmp_path, tiny_model_dir):
    *_, first = _export(tmp_path, tiny_model_dir, TEN_SENTENCES, specials=True, name="a.ndjson")
    *_, second = _export(tmp_path, tiny_model_dir, TEN_SENTENCES, specials=True, name="b.ndjson")
    assert first.read_bytes() == second.read_bytes()


def test_export_skips_overlong_sentence(tmp_path, tiny_model_dir, caplog):
    # 60 single-letter words exceed the 48-position encoder limit
    long_block = "# id big\n" + "".join("q O\n" for _ in range(60)) + "\n"
    text = long_block + "# id ok\nfine O\n"
    with caplog.at_level("WARNING"):
        summary, _, records, _ = _export(tmp_path, tiny_model_dir, text, specials=False)
    assert summary.exported == 1
    assert summary.skipped == ["big"]
    assert [r["id"] for r in records] == ["ok"]
    assert any("big" in message for message in caplog.messages)


def test_export_duplicate_ids_rejected(tmp_path, tiny_model_dir):
    text = "# id dup\na O\n\n# id dup\nb O\n"
    conll = tmp_path / "dup.conll"
    conll.write_text(text, encoding="utf-8")
    config = ExportConfig(model=tiny_model_dir, input_path=str(conll), output_path=str(tmp_path / "o"))
    with pytest.raises(ValueError, match="dup"):
        export(config)


def test_cli_runs(tmp_path, tiny_model_dir, capsys):
    from ner_embed_exporter.cli import main

    conll = tmp_path / "input.conll"
    conll.write_text("# id s0\neli O\nlilly O\n", encoding="utf-8")
    out = tmp_path / "out.ndjson"
    code = main(
        [
            "--model",
            tiny_model_dir,
            "--input",
            str(conll),
            "--output",
            str(out),
            "--include-specials",
        ]
    )
    assert code == 0
    assert "exported 1 sentence(s)" in capsys.readouterr().out
    header = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
    assert header["specials_included"] is True


def test_cli_missing_input(tmp_path, tiny_model_dir, capsys):
    from ner_embed_exporter.cli import main

    code = main(
        ["--model", tiny_model_dir, "--input", str(tmp_path / "none.conll"), "--output", str(tmp_path / "o")]
    )
    assert code == 1
    assert "error" in capsys.readouterr().err
