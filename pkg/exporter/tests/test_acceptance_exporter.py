"""Acceptance: exporter output must drive the core toolkit end to end,
touching it only through the CoNLL and interchange file formats plus the
public CLI."""

import json
import random

import pytest

from ner_embed_exporter.export import ExportConfig, export


def _report(name, detail):
    print(f"ACCEPTANCE PASS: {name} ({detail})")


def _write_corpus(path, count, seed=3):
    """Small tagged corpus over the tiny encoder's lowercase vocabulary."""
    rng = random.Random(seed)
    fillers = ["the", "and", "of", "it", "was"]
    types = ["Corp", "Loc"]
    blocks = []
    for i in range(count):
        etype = types[i % len(types)]
        stem = etype.lower()
        length = i % 3 + 1
        if length == 1:
            entity = [f"{stem}solo{i % 4}"]
        else:
            entity = [f"{stem}beg{i % 4}"] + [f"{stem}end{i % 4}"] * (length - 1)
        tags = [f"B-{etype}"] + [f"I-{etype}"] * (length - 1)
        lead = [rng.choice(fillers) for _ in range(rng.randint(1, 3))]
        tail = [rng.choice(fillers) for _ in range(rng.randint(1, 2))]
        words = lead + entity + tail
        row_tags = ["O"] * len(lead) + tags + ["O"] * len(tail)
        blocks.append(
            f"# id s{i}\n" + "".join(f"{w} {t}\n" for w, t in zip(words, row_tags)) + "\n"
        )
    path.write_text("".join(blocks), encoding="utf-8")


def test_interchange_round_trip(tmp_path, tiny_model_dir):
    """A 10-sentence export loads in the core with zero validation
    errors, with and without specials; specials records carry exactly two
    word_index=-1 rows."""
    from nerduo.embeddings import load_embedding_file

    corpus = tmp_path / "ten.conll"
    _write_corpus(corpus, count=10)
    for specials in (False, True):
        out = tmp_path / f"emb-{specials}.ndjson"
        summary = export(
            ExportConfig(
                model=tiny_model_dir,
                input_path=str(corpus),
                output_path=str(out),
                include_specials=specials,
            )
        )
        assert summary.exported == 10 and not summary.skipped
        provider = load_embedding_file(out)  # validates every record
        assert provider.specials_included is specials
        assert len(provider.ids) == 10
        for sid in provider.ids:
            sub = provider.subtokenized_by_id(sid)
            matrix = provider.matrix(sid)
            assert matrix.shape == (len(sub), provider.dim)
            flags = [w == -1 for w in sub.word_index]
            if specials:
                assert sum(flags) == 2 and flags[0] and flags[-1]
            else:
                assert not any(flags)
    _report("interchange round trip", "10 sentences load cleanly with and without specials")


def test_end_to_end_smoke(tmp_path, tiny_model_dir):
    """Both heads train on exporter-produced embeddings for a
    100-sentence subset; the span pipeline emits valid, non-overlapping
    BIO output."""
    from nerduo.bio import RepairPolicy, bio_to_spans, validate_bio
    from nerduo.cli import main
    from nerduo.corpus import infer_label_set, parse_conll

    corpus = tmp_path / "hundred.conll"
    _write_corpus(corpus, count=100)
    emb_path = tmp_path / "emb.ndjson"
    summary = export(
        ExportConfig(
            model=tiny_model_dir,
            input_path=str(corpus),
            output_path=str(emb_path),
            include_specials=True,
        )
    )
    assert summary.exported == 100 and not summary.skipped

    pred_paths = {}
    for kind in ("seq", "span"):
        out_dir = tmp_path / f"run-{kind}"
        config_path = tmp_path / f"{kind}.json"
        config_path.write_text(
            json.dumps(
                {
                    "model_kind": kind,
                    "labels": ["Corp", "Loc"],
                    "train_path": str(corpus),
                    "val_path": str(corpus),
                    "provider": f"file:{emb_path}",
                    "add_specials": True,
                    "output_dir": str(out_dir),
                    "learning_rate": 1e-2,
                    "batch_size": 4,
                    "max_epochs": 5,
                    "patience": 5,
                    "seed": 9,
                }
            ),
            encoding="utf-8",
        )
        assert main(["train", "--config", str(config_path)]) == 0
        assert (out_dir / "checkpoint.json").is_file()

        pred_path = tmp_path / f"pred-{kind}.conll"
        code = main(
            [
                "predict",
                "--checkpoint",
                str(out_dir / "checkpoint.json"),
                "--input",
                str(corpus),
                "--output",
                str(pred_path),
            ]
        )
        assert code == 0
        pred_paths[kind] = pred_path

    labels = infer_label_set(corpus.read_text(encoding="utf-8"))
    span_pred = parse_conll(pred_paths["span"].read_text(encoding="utf-8"), labels)
    assert len(span_pred) == 100
    for sentence in span_pred:
        assert validate_bio(sentence.tags) == []
        spans = bio_to_spans(sentence.tags, repair=RepairPolicy.STRICT)
        for a, b in zip(spans, spans[1:]):
            assert a.end < b.begin
    _report("end-to-end smoke", "both heads trained on exported embeddings; span BIO output valid")
