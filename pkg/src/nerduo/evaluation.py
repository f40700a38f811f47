"""Entity-level exact-match scoring with per-class and macro P/R/F1.

A prediction counts as a true positive iff a gold entity in the same
sentence has the identical (begin, end, type) triple.  Macro averages
are unweighted means over the classes present in gold or predictions;
classes absent from both are excluded.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ClassScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[str, ClassScore]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    sentence_count: int


def match_entities(gold, pred) -> dict[str, list[int]]:
    """Per-class [tp, fp, fn] counts over parallel per-sentence span lists."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences but {len(pred)} predicted")
    counts: dict[str, list[int]] = {}

    def slot(etype):
        return counts.setdefault(etype, [0, 0, 0])

    for gold_spans, pred_spans in zip(gold, pred):
        remaining = {(s.begin, s.end, s.etype) for s in gold_spans}
        for span in pred_spans:
            triple = (span.begin, span.end, span.etype)
            if triple in remaining:
                remaining.discard(triple)
                slot(span.etype)[0] += 1
            else:
                slot(span.etype)[1] += 1
        for _, _, etype in remaining:
            slot(etype)[2] += 1
    return counts


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def macro_scores(counts, sentence_count: int = 0) -> EvalReport:
    """Per-class scores and their unweighted macro means."""
    if not counts:
        raise ValueError("no entity classes present in gold or predictions")
    per_class = {}
    for etype in sorted(counts):
        tp, fp, fn = counts[etype]
        precision, recall, f1 = _prf(tp, fp, fn)
        per_class[etype] = ClassScore(tp, fp, fn, precision, recall, f1)
    k = len(per_class)
    return EvalReport(
        per_class=per_class,
        macro_precision=sum(s.precision for s in per_class.values()) / k,
        macro_recall=sum(s.recall for s in per_class.values()) / k,
        macro_f1=sum(s.f1 for s in per_class.values()) / k,
        sentence_count=sentence_count,
    )


def evaluate_spans(gold, pred) -> EvalReport:
    """match_entities + macro_scores over parallel per-sentence span lists."""
    return macro_scores(match_entities(gold, pred), sentence_count=len(gold))


def report_text(report: EvalReport) -> str:
    """Deterministic table rendering, classes sorted by name, 4 decimals."""
    name_width = max(len("class"), len("macro"), *(len(n) for n in report.per_class))
    lines = [
        f"{'class':<{name_width}}  {'tp':>6} {'fp':>6} {'fn':>6}  {'precision':>9} {'recall':>9} {'f1':>9}"
    ]
    for name, s in report.per_class.items():
        lines.append(
            f"{name:<{name_width}}  {s.tp:>6} {s.fp:>6} {s.fn:>6}"
            f"  {s.precision:>9.4f} {s.recall:>9.4f} {s.f1:>9.4f}"
        )
    lines.append(
        f"{'macro':<{name_width}}  {'':>6} {'':>6} {'':>6}"
        f"  {report.macro_precision:>9.4f} {report.macro_recall:>9.4f} {report.macro_f1:>9.4f}"
    )
    lines.append(f"sentences: {report.sentence_count}")
    return "\n".join(lines)


def report_record(report: EvalReport) -> dict:
    """Machine-readable rendering of the same fields as report_text."""
    return {
        "per_class": {
            name: {
                "tp": s.tp,
                "fp": s.fp,
                "fn": s.fn,
                "precision": s.precision,
                "recall": s.recall,
                "f1": s.f1,
            }
            for name, s in report.per_class.items()
        },
        "macro_precision": report.macro_precision,
        "macro_recall": report.macro_recall,
        "macro_f1": report.macro_f1,
        "sentences": report.sentence_count,
    }
