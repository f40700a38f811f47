"""Command-line entry point: train, predict, evaluate, compare.

Every run is reproducible from its manifest: the manifest records the
effective config, the named sub-seeds, and sha256 digests of the exact
bytes of every input file.

Exit codes: 0 success, 1 usage or bad config, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import kernels
from .bio import RepairPolicy, bio_to_spans, build_tagspace, spans_to_bio
from .corpus import (
    LabelSet,
    infer_label_set,
    parse_conll,
    serialize_conll,
    splitter_from_spec,
)
from .embeddings import embed, materialize, provider_from_spec
from .errors import ConfigError, NerduoError, NumericError
from .evaluation import evaluate_spans, report_record, report_text
from .heads import config_digest, init_head, load_checkpoint, save_checkpoint
from .seq_model import build_seq_examples, seq_predict
from .span_model import build_span_examples, build_span_space, span_pipeline_predict
from .training import (
    SEQ,
    SPAN,
    TrainConfig,
    derive_seed,
    evaluate_examples,
    train,
)


class UsageError(NerduoError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_CONFIG_DEFAULTS = {
    "splitter": "rule:4",
    "add_specials": False,
    "learning_rate": 1e-5,
    "batch_size": 1,
    "max_epochs": 10,
    "patience": 3,
    "seed": 0,
    "adam_beta1": 0.9,
    "adam_beta2": 0.999,
    "adam_eps": 1e-8,
    "max_span_len": None,
    "repair": "orphan",
}
_CONFIG_REQUIRED = ("model_kind", "labels", "train_path", "val_path", "provider", "output_dir")

_REPAIR = {
    "orphan": RepairPolicy.ORPHAN_I_STARTS_ENTITY,
    "strict": RepairPolicy.STRICT,
}


@dataclass(frozen=True)
class RunConfig:
    """Effective flat config for one training run."""

    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            model_kind=self.model_kind,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
        )


def _effective_config(raw: dict, base_dir: Path, seed_override=None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a flat key-value map")
    unknown = set(raw) - set(_CONFIG_DEFAULTS) - set(_CONFIG_REQUIRED)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = [k for k in _CONFIG_REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    values = dict(_CONFIG_DEFAULTS)
    values.update(raw)
    if seed_override is not None:
        values["seed"] = seed_override
    if values["model_kind"] not in (SEQ, SPAN):
        raise ConfigError(f"model_kind must be '{SEQ}' or '{SPAN}'")
    if values["repair"] not in _REPAIR:
        raise ConfigError("repair must be 'orphan' or 'strict'")
    if not isinstance(values["labels"], list) or not values["labels"]:
        raise ConfigError("labels must be a non-empty list of entity type names")
    for key in ("train_path", "val_path", "output_dir"):
        values[key] = str((base_dir / values[key]).resolve())
    if values["provider"].startswith("file:"):
        path = values["provider"].split(":", 1)[1]
        values["provider"] = "file:" + str((base_dir / path).resolve())
    try:
        config = RunConfig(values=values)
        config.train_config()  # validates the numeric fields
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return config


def load_run_config(path, seed_override=None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return _effective_config(raw, Path(path).resolve().parent, seed_override)


def _sha256(path) -> dict:
    data = Path(path).read_bytes()
    return {"sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}


def _read_sentences(path, label_set: LabelSet):
    return parse_conll(Path(path).read_text(encoding="utf-8"), label_set)


def _prepare(config: RunConfig, sentences, provider, out_space):
    splitter = splitter_from_spec(config.splitter)
    triples = materialize(sentences, provider, splitter, config.add_specials)
    if config.model_kind == SEQ:
        return build_seq_examples(triples, out_space)
    return build_span_examples(triples, out_space, max_len=config.max_span_len)


def run_training(config: RunConfig):
    """Shared train pipeline; returns (result, out_space, provider, report)."""
    label_set = LabelSet(types=tuple(config.labels))
    out_space = build_tagspace(label_set) if config.model_kind == SEQ else build_span_space(label_set)
    provider = provider_from_spec(config.provider)
    train_sentences = _read_sentences(config.train_path, label_set)
    val_sentences = _read_sentences(config.val_path, label_set)
    train_set = _prepare(config, train_sentences, provider, out_space)
    val_set = _prepare(config, val_sentences, provider, out_space)
    dim = provider.dim if config.model_kind == SEQ else 2 * provider.dim
    head = init_head(out_space.tags if config.model_kind == SEQ else out_space.labels,
                     dim, derive_seed(config.seed, "init"))
    result = train(head, train_set, val_set, config.train_config(), out_space)
    report = evaluate_examples(
        val_set, result.head, config.train_config(), out_space, derive_seed(config.seed, "overlap")
    )
    return result, out_space, provider, report


def _write_train_artifacts(config: RunConfig, result, started: float) -> dict:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / "checkpoint.json"
    history_path = out_dir / "history.jsonl"
    manifest_path = out_dir / "manifest.json"

    save_checkpoint(checkpoint_path, result.head, config.model_kind, config.seed, config.values)
    with open(history_path, "w", encoding="utf-8") as fh:
        for record in result.history:
            fh.write(
                json.dumps(
                    {
                        "epoch": record.epoch,
                        "mean_loss": record.mean_loss,
                        "val_precision": record.val_precision,
                        "val_recall": record.val_recall,
                        "val_macro_f1": record.val_macro_f1,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    manifest = {
        "command": "train",
        "config": config.values,
        "config_hash": config_digest(config.values),
        "seeds": {
            "root": config.seed,
            "init": derive_seed(config.seed, "init"),
            "shuffle": derive_seed(config.seed, "shuffle"),
            "overlap": derive_seed(config.seed, "overlap"),
        },
        "inputs": {
            "train_path": _sha256(config.train_path),
            "val_path": _sha256(config.val_path),
        },
        "outputs": {
            "checkpoint": str(checkpoint_path),
            "history": str(history_path),
        },
        "kernel_backend": kernels.BACKEND,
        "timing": {"started_at": started, "wall_seconds": time.time() - started},
    }
    if config.provider.startswith("file:"):
        manifest["inputs"]["embeddings"] = _sha256(config.provider.split(":", 1)[1])
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def cmd_train(args) -> int:
    started = time.time()
    config = load_run_config(args.config, seed_override=args.seed_override)
    result, _, _, report = run_training(config)
    _write_train_artifacts(config, result, started)
    print(
        f"trained {config.model_kind} head: best epoch {result.best_epoch}, "
        f"val macro F1 {report.macro_f1:.4f}"
    )
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_predict(args) -> int:
    head, model_kind, snapshot = load_checkpoint(args.checkpoint)
    if not snapshot:
        raise ConfigError(f"checkpoint {args.checkpoint} carries no config snapshot")
    config = RunConfig(values=snapshot)
    label_set = LabelSet(types=tuple(config.labels))
    provider = provider_from_spec(args.provider or config.provider)
    splitter = splitter_from_spec(config.splitter)
    text = Path(args.input).read_text(encoding="utf-8")
    sentences = parse_conll(text, label_set)

    if model_kind == SEQ:
        out_space = build_tagspace(label_set)
        repair = _REPAIR[config.repair]
    else:
        out_space = build_span_space(label_set)
        overlap_seed = derive_seed(config.seed, "overlap")

    predictions = []
    for sentence in sentences:
        sub = provider.subtokenized(sentence, splitter, config.add_specials)
        emb = embed(provider, sub, sentence.id)
        if model_kind == SEQ:
            spans = seq_predict(head, emb, sub, out_space, repair=repair)
        else:
            spans = span_pipeline_predict(
                head, emb, sub, out_space, overlap_seed, max_len=config.max_span_len
            )
        predictions.append(spans_to_bio(spans, len(sentence)))
    Path(args.output).write_text(serialize_conll(sentences, predictions), encoding="utf-8")
    print(f"wrote predictions for {len(sentences)} sentences to {args.output}")
    return 0


def _parallel_or_die(gold_sentences, pred_sentences):
    if len(gold_sentences) != len(pred_sentences):
        raise NerduoError(
            f"gold has {len(gold_sentences)} sentences, predictions have {len(pred_sentences)}"
        )
    for g, p in zip(gold_sentences, pred_sentences):
        if g.words != p.words:
            raise NerduoError(f"token mismatch in sentence {g.id!r}")


def _spans_for_eval(sentences, repair: RepairPolicy):
    return [bio_to_spans(s.tags, repair=repair) for s in sentences]


def cmd_evaluate(args) -> int:
    gold_text = Path(args.gold).read_text(encoding="utf-8")
    pred_text = Path(args.pred).read_text(encoding="utf-8")
    label_set = LabelSet(
        types=tuple(sorted(set(infer_label_set(gold_text).types) | set(infer_label_set(pred_text).types)))
    )
    gold_sentences = parse_conll(gold_text, label_set)
    pred_sentences = parse_conll(pred_text, label_set)
    _parallel_or_die(gold_sentences, pred_sentences)
    # gold must be well-formed; predictions may need repair
    gold_spans = _spans_for_eval(gold_sentences, RepairPolicy.STRICT)
    pred_spans = _spans_for_eval(pred_sentences, RepairPolicy.ORPHAN_I_STARTS_ENTITY)
    report = evaluate_spans(gold_spans, pred_spans)
    print(report_text(report))
    if args.output:
        Path(args.output).write_text(
            json.dumps(report_record(report), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def cmd_compare(args) -> int:
    if len(args.config) != 2:
        raise UsageError("compare needs exactly two --config paths")
    config_a = load_run_config(args.config[0], seed_override=args.seed_override)
    config_b = load_run_config(args.config[1], seed_override=args.seed_override)
    for key in ("train_path", "val_path", "provider"):
        if config_a.values[key] != config_b.values[key]:
            raise ConfigError(f"both configs must reference the same {key}")

    reports = []
    for config in (config_a, config_b):
        result, _, _, report = run_training(config)
        _write_train_artifacts(config, result, time.time())
        reports.append(report)

    kinds = (config_a.model_kind, config_b.model_kind)
    print(f"model A: {kinds[0]}    model B: {kinds[1]}")
    classes = sorted(set(reports[0].per_class) | set(reports[1].per_class))
    width = max(len("class"), len("macro"), *(len(c) for c in classes))
    print(f"{'class':<{width}}  {'A:P':>7} {'A:R':>7} {'A:F1':>7}  {'B:P':>7} {'B:R':>7} {'B:F1':>7}  {'dF1':>7}")
    zero = None
    for name in classes:
        row = []
        f1s = []
        for report in reports:
            score = report.per_class.get(name)
            if score is None:
                row.extend(["      -"] * 3)
                f1s.append(0.0)
            else:
                row.extend([f"{score.precision:>7.4f}", f"{score.recall:>7.4f}", f"{score.f1:>7.4f}"])
                f1s.append(score.f1)
        print(f"{name:<{width}}  {row[0]} {row[1]} {row[2]}  {row[3]} {row[4]} {row[5]}  {f1s[1]-f1s[0]:>7.4f}")
    a, b = reports
    print(
        f"{'macro':<{width}}  {a.macro_precision:>7.4f} {a.macro_recall:>7.4f} {a.macro_f1:>7.4f}"
        f"  {b.macro_precision:>7.4f} {b.macro_recall:>7.4f} {b.macro_f1:>7.4f}"
        f"  {b.macro_f1 - a.macro_f1:>7.4f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nerduo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a head from a config file")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed-override", type=int, default=None)
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="tag a CoNLL file with a trained head")
    p_predict.add_argument("--checkpoint", required=True)
    p_predict.add_argument("--input", required=True)
    p_predict.add_argument("--output", required=True)
    p_predict.add_argument("--provider", default=None, help="override the checkpoint's provider spec")
    p_predict.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="entity-level macro F1 of predictions vs gold")
    p_eval.add_argument("--gold", required=True)
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--output", default=None, help="also write the report as JSON")
    p_eval.set_defaults(func=cmd_evaluate)

    p_compare = sub.add_parser("compare", help="train two configs and print paired scores")
    p_compare.add_argument("--config", action="append", required=True, help="give twice")
    p_compare.add_argument("--seed-override", type=int, default=None)
    p_compare.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (NerduoError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
