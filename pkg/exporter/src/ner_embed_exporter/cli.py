"""Command-line wrapper around the exporter."""

import argparse
import logging
import sys

from .export import ExportConfig, export


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ner-embed-export",
        description="Write last-hidden-layer subtoken embeddings for a CoNLL file.",
    )
    parser.add_argument("--model", required=True, help="model name or local path")
    parser.add_argument("--input", required=True, help="CoNLL input file")
    parser.add_argument("--output", required=True, help="interchange file to write")
    parser.add_argument(
        "--include-specials",
        action="store_true",
        help="prepend/append the encoder's sentence-boundary tokens",
    )
    parser.add_argument("--precision-note", default="float32 decimal text")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    config = ExportConfig(
        model=args.model,
        input_path=args.input,
        output_path=args.output,
        include_specials=args.include_specials,
        precision_note=args.precision_note,
    )
    try:
        summary = export(config)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"exported {summary.exported} sentence(s); skipped {len(summary.skipped)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
