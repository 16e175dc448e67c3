"""Retrieval scoring: mAP, nDCG, Retrieval@k, MCQ accuracy, random baselines.

Conventions, fixed here and recorded in every report:
 * the canonical similarity/relevance orientation is text queries x audio
   items; direction A2T evaluates on the transpose,
 * ties in similarity break by stable item order, deterministically,
 * mAP binarizes relevance as rel > 0 by default (tau=None); a numeric tau
   means rel >= tau,
 * queries with no relevant item are skipped, not scored 0, and the skip
   count is reported.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .builder import MCQItem
from .embeddings import SimilarityMatrix
from .errors import DegenerateInputError, IntegrityError
from .relevance import RelevanceMatrix


class Direction(str, Enum):
    T2A = "t2a"
    A2T = "a2t"


def dense_relevance(rel: RelevanceMatrix, query_ids, item_ids) -> np.ndarray:
    """Relevance grades aligned to the given axes; absent pairs are 0."""
    missing_q = set(query_ids) - set(rel.query_ids)
    missing_i = set(item_ids) - set(rel.item_ids)
    if missing_q or missing_i:
        raise IntegrityError(
            f"similarity ids missing from relevance matrix: "
            f"queries {sorted(missing_q)[:3]}, items {sorted(missing_i)[:3]}"
        )
    out = np.zeros((len(query_ids), len(item_ids)))
    i_index = {i: k for k, i in enumerate(item_ids)}
    q_index = {q: k for k, q in enumerate(query_ids)}
    for (q, i), v in rel.entries.items():
        qi = q_index.get(q)
        ii = i_index.get(i)
        if qi is not None and ii is not None:
            out[qi, ii] = v
    return out


def _oriented(sim: SimilarityMatrix, rel: RelevanceMatrix, direction: Direction):
    if direction == Direction.A2T:
        sim = sim.transposed()
        rel = rel.transposed()
    return sim.scores, dense_relevance(rel, sim.query_ids, sim.item_ids)


def _binarize(grades: np.ndarray, tau: float | None) -> np.ndarray:
    if tau is None:
        return grades > 0.0
    return grades >= tau


def _rank_order(scores_row: np.ndarray) -> np.ndarray:
    # stable argsort of negated scores keeps item order among ties
    return np.argsort(-scores_row, kind="stable")


def average_precisions(
    sim: SimilarityMatrix,
    rel: RelevanceMatrix,
    direction: Direction = Direction.T2A,
    tau: float | None = None,
) -> tuple[np.ndarray, int]:
    """Per-query AP (fractions in [0, 1]) and the count of skipped queries."""
    scores, grades = _oriented(sim, rel, direction)
    n_items = scores.shape[1]
    ranks = np.arange(1, n_items + 1)
    aps = []
    skipped = 0
    for q in range(scores.shape[0]):
        relevant = _binarize(grades[q], tau)
        if not relevant.any():
            skipped += 1
            continue
        order = _rank_order(scores[q])
        rel_sorted = relevant[order]
        cum_hits = np.cumsum(rel_sorted)
        aps.append(float((cum_hits[rel_sorted] / ranks[rel_sorted]).mean()))
    return np.asarray(aps), skipped


def mean_average_precision(
    sim: SimilarityMatrix,
    rel: RelevanceMatrix,
    direction: Direction = Direction.T2A,
    tau: float | None = None,
) -> float:
    """mAP as a percentage; raises if every query was skipped."""
    aps, skipped = average_precisions(sim, rel, direction, tau)
    if aps.size == 0:
        raise DegenerateInputError(
            f"no query has a relevant item (skipped all {skipped}); mAP undefined"
        )
    return float(aps.mean() * 100.0)


def ndcg_scores(
    sim: SimilarityMatrix,
    rel: RelevanceMatrix,
    direction: Direction = Direction.T2A,
) -> tuple[np.ndarray, int]:
    """Per-query nDCG (fractions) over the full ranking with graded relevance."""
    scores, grades = _oriented(sim, rel, direction)
    n_items = scores.shape[1]
    discounts = 1.0 / np.log2(np.arange(2, n_items + 2))
    values = []
    skipped = 0
    for q in range(scores.shape[0]):
        row = grades[q]
        if not (row > 0).any():
            skipped += 1
            continue
        order = _rank_order(scores[q])
        dcg = float((row[order] * discounts).sum())
        ideal = float((np.sort(row)[::-1] * discounts).sum())
        values.append(dcg / ideal)
    return np.asarray(values), skipped


def ndcg(
    sim: SimilarityMatrix,
    rel: RelevanceMatrix,
    direction: Direction = Direction.T2A,
) -> float:
    values, skipped = ndcg_scores(sim, rel, direction)
    if values.size == 0:
        raise DegenerateInputError(
            f"no query has a relevant item (skipped all {skipped}); nDCG undefined"
        )
    return float(values.mean() * 100.0)


def retrieval_at_k(
    sim: SimilarityMatrix,
    rel: RelevanceMatrix,
    k: int,
    direction: Direction = Direction.T2A,
    tau: float | None = None,
) -> float:
    """Percentage of queries with at least one relevant item in the top k."""
    if k < 1:
        raise DegenerateInputError(f"k must be >= 1, got {k}")
    scores, grades = _oriented(sim, rel, direction)
    hits = []
    for q in range(scores.shape[0]):
        relevant = _binarize(grades[q], tau)
        if not relevant.any():
            continue
        order = _rank_order(scores[q])
        hits.append(bool(relevant[order[:k]].any()))
    if not hits:
        raise DegenerateInputError("no query has a relevant item; Retrieval@k undefined")
    return float(np.mean(hits) * 100.0)


@dataclass
class MetricReport:
    """mAP/nDCG percentages per direction plus the conventions that produced them."""

    map_a2t: float
    map_t2a: float
    map_avg: float
    ndcg_a2t: float
    ndcg_t2a: float
    ndcg_avg: float
    r_at_k: float | None = None
    r_at_k_a2t: float | None = None
    r_at_k_t2a: float | None = None
    k: int | None = None
    n_queries_t2a: int = 0
    n_queries_a2t: int = 0
    n_skipped_t2a: int = 0
    n_skipped_a2t: int = 0
    tau: float | None = None

    def __post_init__(self):
        for name in ("map_a2t", "map_t2a", "map_avg", "ndcg_a2t", "ndcg_t2a", "ndcg_avg"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise IntegrityError(f"{name} = {v} outside [0, 100]")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["tau"] = self.tau if self.tau is not None else ">0"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def evaluate_retrieval(
    sim: SimilarityMatrix,
    rel: RelevanceMatrix,
    tau: float | None = None,
    k: int | None = None,
) -> MetricReport:
    """Score both directions and average them into one report."""
    map_parts = {}
    ndcg_parts = {}
    counts = {}
    for direction in (Direction.T2A, Direction.A2T):
        aps, ap_skip = average_precisions(sim, rel, direction, tau)
        nd, nd_skip = ndcg_scores(sim, rel, direction)
        if aps.size == 0 or nd.size == 0:
            raise DegenerateInputError(f"direction {direction.value}: every query skipped")
        map_parts[direction] = float(aps.mean() * 100.0)
        ndcg_parts[direction] = float(nd.mean() * 100.0)
        counts[direction] = (int(aps.size), int(ap_skip))
    report = MetricReport(
        map_a2t=map_parts[Direction.A2T],
        map_t2a=map_parts[Direction.T2A],
        map_avg=(map_parts[Direction.A2T] + map_parts[Direction.T2A]) / 2.0,
        ndcg_a2t=ndcg_parts[Direction.A2T],
        ndcg_t2a=ndcg_parts[Direction.T2A],
        ndcg_avg=(ndcg_parts[Direction.A2T] + ndcg_parts[Direction.T2A]) / 2.0,
        n_queries_t2a=counts[Direction.T2A][0],
        n_queries_a2t=counts[Direction.A2T][0],
        n_skipped_t2a=counts[Direction.T2A][1],
        n_skipped_a2t=counts[Direction.A2T][1],
        tau=tau,
    )
    if k is not None:
        report.k = k
        report.r_at_k_t2a = retrieval_at_k(sim, rel, k, Direction.T2A, tau)
        report.r_at_k_a2t = retrieval_at_k(sim, rel, k, Direction.A2T, tau)
        report.r_at_k = (report.r_at_k_t2a + report.r_at_k_a2t) / 2.0
    return report


def render_table(report: MetricReport, name: str = "benchmark") -> str:
    """Aligned text table with A->T / T->A / AVG columns for mAP and nDCG."""
    width = max(20, len(name) + 2)
    header1 = f"{'':<{width}}{'mAP(%)':^24}{'nDCG(%)':^24}"
    header2 = f"{'':<{width}}" + "".join(f"{h:>8}" for h in ("A->T", "T->A", "AVG")) * 2
    row = f"{name:<{width}}" + "".join(
        f"{v:>8.1f}"
        for v in (
            report.map_a2t,
            report.map_t2a,
            report.map_avg,
            report.ndcg_a2t,
            report.ndcg_t2a,
            report.ndcg_avg,
        )
    )
    lines = [header1, header2, row]
    if report.r_at_k is not None:
        lines.append(
            f"{'':<{width}}R@{report.k}: A->T {report.r_at_k_a2t:.1f}  "
            f"T->A {report.r_at_k_t2a:.1f}  AVG {report.r_at_k:.1f}"
        )
    tau_txt = "> 0" if report.tau is None else f">= {report.tau}"
    lines.append(
        f"{'':<{width}}queries: T->A {report.n_queries_t2a} (skipped {report.n_skipped_t2a}), "
        f"A->T {report.n_queries_a2t} (skipped {report.n_skipped_a2t}); relevant if rel {tau_txt}"
    )
    return "\n".join(lines)


@dataclass
class McqReport:
    """Retrieval@1 accuracy over 5-way items, split by intra/inter task."""

    accuracy_intra: float | None
    accuracy_inter: float | None
    accuracy_overall: float
    n_intra: int
    n_inter: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _mcq_score_rows(items: list[MCQItem], sim: SimilarityMatrix) -> np.ndarray:
    q_index = {q: k for k, q in enumerate(sim.query_ids)}
    i_index = {i: k for k, i in enumerate(sim.item_ids)}
    n_cand = len(items[0].candidates)
    rows = np.empty((len(items), n_cand))
    for r, item in enumerate(items):
        if item.query_text_id not in q_index:
            raise IntegrityError(f"mcq query {item.query_text_id!r} has no similarity scores")
        if len(item.candidates) != n_cand:
            raise IntegrityError("mcq items disagree on candidate count")
        for c, cand in enumerate(item.candidates):
            if cand not in i_index:
                raise IntegrityError(f"mcq candidate {cand!r} has no similarity scores")
            rows[r, c] = sim.scores[q_index[item.query_text_id], i_index[cand]]
    return rows


def _accuracy_from_rows(items: list[MCQItem], rows: np.ndarray) -> McqReport:
    # np.argmax takes the first maximum: the stable tie-break by candidate order
    predictions = np.argmax(rows, axis=1)
    answers = np.array([item.answer_index for item in items])
    correct = predictions == answers
    kinds = np.array([str(item.kind.value) for item in items])
    per_kind: dict[str, float | None] = {}
    counts: dict[str, int] = {}
    for kind in ("intra", "inter"):
        mask = kinds == kind
        counts[kind] = int(mask.sum())
        per_kind[kind] = float(correct[mask].mean() * 100.0) if mask.any() else None
    return McqReport(
        accuracy_intra=per_kind["intra"],
        accuracy_inter=per_kind["inter"],
        accuracy_overall=float(correct.mean() * 100.0),
        n_intra=counts["intra"],
        n_inter=counts["inter"],
    )


def evaluate_mcq(items: list[MCQItem], sim: SimilarityMatrix) -> McqReport:
    """Accuracy of argmax-over-candidates, reported separately per task kind."""
    if not items:
        raise DegenerateInputError("no MCQ items to evaluate")
    return _accuracy_from_rows(items, _mcq_score_rows(items, sim))


@dataclass
class RandomBaseline:
    mean: MetricReport
    stderr: dict[str, float]
    n_seeds: int


@dataclass
class RandomMcqBaseline:
    mean: McqReport
    stderr: dict[str, float]
    n_seeds: int


_REPORT_FIELDS = ("map_a2t", "map_t2a", "map_avg", "ndcg_a2t", "ndcg_t2a", "ndcg_avg")


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def random_retrieval_baseline(
    rel: RelevanceMatrix,
    n_seeds: int,
    seed: int = 0,
    tau: float | None = None,
) -> RandomBaseline:
    """Metrics of uniformly random score matrices, mean and standard error over seeds."""
    if n_seeds < 1:
        raise DegenerateInputError(f"n_seeds must be >= 1, got {n_seeds}")
    shape = (len(rel.query_ids), len(rel.item_ids))
    per_seed: dict[str, list[float]] = {f: [] for f in _REPORT_FIELDS}
    last = None
    for s in range(n_seeds):
        rng = np.random.default_rng((seed, s))
        sim = SimilarityMatrix(
            query_ids=rel.query_ids, item_ids=rel.item_ids, scores=rng.random(shape)
        )
        report = evaluate_retrieval(sim, rel, tau=tau)
        last = report
        for f in _REPORT_FIELDS:
            per_seed[f].append(getattr(report, f))
    mean = MetricReport(
        **{f: float(np.mean(per_seed[f])) for f in _REPORT_FIELDS},
        n_queries_t2a=last.n_queries_t2a,
        n_queries_a2t=last.n_queries_a2t,
        n_skipped_t2a=last.n_skipped_t2a,
        n_skipped_a2t=last.n_skipped_a2t,
        tau=tau,
    )
    stderr = {f: _stderr(np.asarray(per_seed[f])) for f in _REPORT_FIELDS}
    return RandomBaseline(mean=mean, stderr=stderr, n_seeds=n_seeds)


def random_mcq_baseline(
    items: list[MCQItem], n_seeds: int, seed: int = 0
) -> RandomMcqBaseline:
    """Accuracy of uniformly random candidate scores over seeds."""
    if n_seeds < 1:
        raise DegenerateInputError(f"n_seeds must be >= 1, got {n_seeds}")
    if not items:
        raise DegenerateInputError("no MCQ items")
    n_cand = len(items[0].candidates)
    fields = ("accuracy_intra", "accuracy_inter", "accuracy_overall")
    per_seed: dict[str, list[float]] = {f: [] for f in fields}
    last = None
    for s in range(n_seeds):
        rng = np.random.default_rng((seed, s))
        rows = rng.random((len(items), n_cand))
        report = _accuracy_from_rows(items, rows)
        last = report
        for f in fields:
            value = getattr(report, f)
            if value is not None:
                per_seed[f].append(value)
    mean = McqReport(
        accuracy_intra=float(np.mean(per_seed["accuracy_intra"])) if per_seed["accuracy_intra"] else None,
        accuracy_inter=float(np.mean(per_seed["accuracy_inter"])) if per_seed["accuracy_inter"] else None,
        accuracy_overall=float(np.mean(per_seed["accuracy_overall"])),
        n_intra=last.n_intra,
        n_inter=last.n_inter,
    )
    stderr = {f: _stderr(np.asarray(per_seed[f])) for f in fields if per_seed[f]}
    return RandomMcqBaseline(mean=mean, stderr=stderr, n_seeds=n_seeds)


def random_baseline(target, n_seeds: int, seed: int = 0, tau: float | None = None):
    """Dispatch to the retrieval or MCQ random baseline by target type."""
    if isinstance(target, RelevanceMatrix):
        return random_retrieval_baseline(target, n_seeds, seed=seed, tau=tau)
    return random_mcq_baseline(list(target), n_seeds, seed=seed)
