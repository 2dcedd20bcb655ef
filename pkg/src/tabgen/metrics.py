"""Exact-match F1, syntactic error rate, embedding-similarity scores, corpus reports."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from tabgen.backends import EmbeddingBackend
from tabgen.table import (
    InvalidTable,
    Orientation,
    Table,
    normalize_text,
    to_tuples,
    validate,
)

PREDICTED_HEADERS = "predicted-headers"
GOLD_HEADERS = "gold-headers"


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def zeros(cls) -> "PRF":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_rates(cls, precision: float, recall: float) -> "PRF":
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        return cls(precision, recall, f1)

    @classmethod
    def from_counts(cls, overlap: int, pred_size: int, gold_size: int) -> "PRF":
        precision = overlap / pred_size if pred_size else 0.0
        recall = overlap / gold_size if gold_size else 0.0
        return cls.from_rates(precision, recall)


def exact_f1(predicted: Iterable, gold: Iterable) -> PRF:
    """Set-overlap precision/recall/F1; an empty side scores zero by convention."""
    pred_set = set(predicted)
    gold_set = set(gold)
    return PRF.from_counts(len(pred_set & gold_set), len(pred_set), len(gold_set))


def error_rate(outcomes: Sequence[object]) -> float:
    """Fraction of parse outcomes that failed: tables count as valid, exceptions as errored."""
    if not outcomes:
        raise ValueError("error_rate requires at least one outcome")
    errored = 0
    for outcome in outcomes:
        if isinstance(outcome, Table):
            continue
        if isinstance(outcome, Exception):
            errored += 1
        else:
            raise TypeError(f"outcome must be a Table or an exception, got {type(outcome).__name__}")
    return errored / len(outcomes)


def _clamp01(value: float) -> float:
    return min(1.0, max(0.0, value))


def semantic_score(
    candidate_tokens: Sequence[str],
    reference_tokens: Sequence[str],
    embedder: EmbeddingBackend,
) -> PRF:
    """Greedy max-cosine token matching over unit-normalized embeddings.

    Recall averages, over reference tokens, the best similarity to any
    candidate token; precision is the mirror image. Either side empty
    scores zero.
    """
    if not candidate_tokens or not reference_tokens:
        return PRF.zeros()

    cand = np.array(embedder.embed(list(candidate_tokens), mode="token").vectors, dtype=float)
    ref = np.array(embedder.embed(list(reference_tokens), mode="token").vectors, dtype=float)
    cand = cand / np.linalg.norm(cand, axis=1, keepdims=True)
    ref = ref / np.linalg.norm(ref, axis=1, keepdims=True)

    similarity = cand @ ref.T
    precision = _clamp01(float(similarity.max(axis=1).mean()))
    recall = _clamp01(float(similarity.max(axis=0).mean()))
    return PRF.from_rates(precision, recall)


@dataclass(frozen=True)
class SampleEval:
    sample_id: str
    errored: bool
    header: PRF
    cell: PRF
    row_header: PRF | None = None
    col_header: PRF | None = None
    semantic_header: PRF | None = None
    semantic_cell: PRF | None = None


def _header_sets(table: Table) -> tuple[set[str], set[str] | None, set[str] | None]:
    """(all headers, row headers, col headers); row/col axes only for matrix tables."""
    if table.orientation is Orientation.ATTRIBUTE_VALUE:
        return {normalize_text(h) for h, _ in table.rows}, None, None
    rows = {normalize_text(h) for h in table.row_headers}
    cols = {normalize_text(h) for h in table.col_headers}
    return rows | cols, rows, cols


def _mean_prf(values: Sequence[PRF]) -> PRF:
    return PRF(
        precision=sum(v.precision for v in values) / len(values),
        recall=sum(v.recall for v in values) / len(values),
        f1=sum(v.f1 for v in values) / len(values),
    )


def _header_tokens(table: Table) -> list[str]:
    headers, _, _ = _header_sets(table)
    return " ".join(sorted(headers)).split()


def _cell_tokens(table: Table) -> list[str]:
    parts = []
    for cell in sorted(to_tuples(table)):
        parts.extend(p for p in (cell.row_header, cell.col_header, cell.value) if p)
    return " ".join(parts).split()


def evaluate_sample(
    pred: Table,
    gold: Table,
    *,
    sample_id: str = "",
    embedder: EmbeddingBackend | None = None,
) -> SampleEval:
    """Score one prediction: per-axis header F1, cell-tuple F1, optional semantic PRF.

    For matrix tables the headline header score is the mean of the row-
    and column-axis scores; cell identity is the full normalized
    (row header, column header, value) tuple.
    """
    for table in (pred, gold):
        report = validate(table)
        if not report.valid:
            raise InvalidTable(report)

    pred_all, pred_rows, pred_cols = _header_sets(pred)
    gold_all, gold_rows, gold_cols = _header_sets(gold)

    if gold.orientation is Orientation.MATRIX and pred.orientation is Orientation.MATRIX:
        row_prf = exact_f1(pred_rows, gold_rows)
        col_prf = exact_f1(pred_cols, gold_cols)
        header_prf = _mean_prf([row_prf, col_prf])
    else:
        row_prf = None
        col_prf = None
        header_prf = exact_f1(pred_all, gold_all)

    cell_prf = exact_f1(to_tuples(pred), to_tuples(gold))

    semantic_header = None
    semantic_cell = None
    if embedder is not None:
        semantic_header = semantic_score(_header_tokens(pred), _header_tokens(gold), embedder)
        semantic_cell = semantic_score(_cell_tokens(pred), _cell_tokens(gold), embedder)

    return SampleEval(
        sample_id=sample_id,
        errored=False,
        header=header_prf,
        cell=cell_prf,
        row_header=row_prf,
        col_header=col_prf,
        semantic_header=semantic_header,
        semantic_cell=semantic_cell,
    )


def _errored_sample(sample_id: str, semantic: bool, matrix: bool) -> SampleEval:
    zeros = PRF.zeros()
    return SampleEval(
        sample_id=sample_id,
        errored=True,
        header=zeros,
        cell=zeros,
        row_header=zeros if matrix else None,
        col_header=zeros if matrix else None,
        semantic_header=zeros if semantic else None,
        semantic_cell=zeros if semantic else None,
    )


@dataclass(frozen=True)
class EvalReport:
    """Macro-averaged corpus metrics plus the per-sample breakdown."""

    mode: str
    sample_count: int
    error_rate: float
    per_sample: tuple[SampleEval, ...]
    header: PRF
    cell: PRF
    row_header: PRF | None = None
    col_header: PRF | None = None
    semantic_header: PRF | None = None
    semantic_cell: PRF | None = None

    def to_json(self) -> dict:
        def prf(value: PRF | None) -> dict | None:
            if value is None:
                return None
            return {
                "precision": round(value.precision, 6),
                "recall": round(value.recall, 6),
                "f1": round(value.f1, 6),
            }

        return {
            "mode": self.mode,
            "sample_count": self.sample_count,
            "error_rate": round(self.error_rate, 6),
            "header": prf(self.header),
            "row_header": prf(self.row_header),
            "col_header": prf(self.col_header),
            "cell": prf(self.cell),
            "semantic_header": prf(self.semantic_header),
            "semantic_cell": prf(self.semantic_cell),
            "samples": [
                {
                    "id": s.sample_id,
                    "errored": s.errored,
                    "header": prf(s.header),
                    "row_header": prf(s.row_header),
                    "col_header": prf(s.col_header),
                    "cell": prf(s.cell),
                    "semantic_header": prf(s.semantic_header),
                    "semantic_cell": prf(s.semantic_cell),
                }
                for s in self.per_sample
            ],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False, indent=2)

    def to_text(self) -> str:
        lines = [
            f"samples: {self.sample_count}   mode: {self.mode}   error rate: {self.error_rate:.4f}",
            f"{'metric':<18}{'precision':>10}{'recall':>10}{'f1':>10}",
        ]

        def row(name: str, value: PRF | None) -> None:
            if value is not None:
                lines.append(
                    f"{name:<18}{value.precision:>10.4f}{value.recall:>10.4f}{value.f1:>10.4f}"
                )

        row("header", self.header)
        row("row header", self.row_header)
        row("col header", self.col_header)
        row("cell", self.cell)
        row("semantic header", self.semantic_header)
        row("semantic cell", self.semantic_cell)
        return "\n".join(lines)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["id", "header_p", "header_r", "header_f1", "cell_p", "cell_r", "cell_f1", "errored"]
        )
        for s in self.per_sample:
            writer.writerow(
                [
                    s.sample_id,
                    f"{s.header.precision:.6f}",
                    f"{s.header.recall:.6f}",
                    f"{s.header.f1:.6f}",
                    f"{s.cell.precision:.6f}",
                    f"{s.cell.recall:.6f}",
                    f"{s.cell.f1:.6f}",
                    int(s.errored),
                ]
            )
        return buffer.getvalue()


def evaluate_corpus(
    pairs: Sequence[tuple[Table | None, Table]],
    mode: str = PREDICTED_HEADERS,
    *,
    ids: Sequence[str] | None = None,
    embedder: EmbeddingBackend | None = None,
) -> EvalReport:
    """Macro-average sample metrics; a None prediction is an errored sample scoring zero.

    `mode` records how the predictions were produced (stage one output
    versus gold-header seeding) so ablation reports stay labeled.
    """
    if not pairs:
        raise ValueError("evaluate_corpus requires at least one (pred, gold) pair")
    if mode not in (PREDICTED_HEADERS, GOLD_HEADERS):
        raise ValueError(f"unknown mode {mode!r}")
    if ids is None:
        ids = [str(i) for i in range(len(pairs))]
    if len(ids) != len(pairs):
        raise ValueError(f"got {len(ids)} ids for {len(pairs)} sample pairs")

    samples = []
    for sample_id, (pred, gold) in zip(ids, pairs):
        if pred is None:
            samples.append(
                _errored_sample(
                    sample_id,
                    semantic=embedder is not None,
                    matrix=gold.orientation is Orientation.MATRIX,
                )
            )
        else:
            samples.append(evaluate_sample(pred, gold, sample_id=sample_id, embedder=embedder))

    def mean_optional(extract) -> PRF | None:
        values = [extract(s) for s in samples]
        values = [v for v in values if v is not None]
        return _mean_prf(values) if values else None

    return EvalReport(
        mode=mode,
        sample_count=len(samples),
        error_rate=sum(s.errored for s in samples) / len(samples),
        per_sample=tuple(samples),
        header=_mean_prf([s.header for s in samples]),
        cell=_mean_prf([s.cell for s in samples]),
        row_header=mean_optional(lambda s: s.row_header),
        col_header=mean_optional(lambda s: s.col_header),
        semantic_header=mean_optional(lambda s: s.semantic_header),
        semantic_cell=mean_optional(lambda s: s.semantic_cell),
    )
