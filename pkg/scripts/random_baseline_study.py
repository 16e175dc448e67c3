#!/usr/bin/env python3
"""Monte Carlo check of the closed-form chance expectations the metrics
are tested against.

Random rankings have known expected values: average precision with r
relevant items among n, nDCG under a uniformly random permutation, and
1/n_candidates accuracy for multiple choice. This script draws random
score matrices, scores them with the package's own metric functions, and
prints the simulated means next to the closed forms, including a
class-structured corpus where the text-to-audio and audio-to-text
directions diverge sharply because queries per class are unbalanced.
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from audiobench import (
    Direction,
    MatrixKind,
    MCQItem,
    RelevanceMatrix,
    SimilarityMatrix,
    mean_average_precision,
    ndcg,
)
from audiobench.builder import McqKind
from audiobench.metrics import random_mcq_baseline, random_retrieval_baseline


def harmonic(n: int) -> float:
    return sum(1.0 / k for k in range(1, n + 1))


def expected_ap(n: int, r: int) -> float:
    """Expected average precision (fraction) of a random ranking with r of n relevant."""
    h = harmonic(n)
    value = h / n
    if r > 1:
        value += (r - 1) * (n - h) / (n * (n - 1))
    return value


def expected_ndcg(grades: np.ndarray) -> float:
    """Expected nDCG (fraction) of a random permutation of these grades."""
    n = len(grades)
    discounts = 1.0 / np.log2(np.arange(2, n + 2))
    avg_discount = float(discounts.mean())
    idcg = float((np.sort(grades)[::-1] * discounts).sum())
    return float(grades.sum()) * avg_discount / idcg


def binary_relevance(n_queries: int, n_items: int, r: int) -> RelevanceMatrix:
    """Every query relevant to the same r items; queries are iid trials."""
    qids = tuple(f"q{i}" for i in range(n_queries))
    iids = tuple(f"i{j}" for j in range(n_items))
    entries = {(q, iids[j]): 1.0 for q in qids for j in range(r)}
    return RelevanceMatrix(qids, iids, entries, MatrixKind.CLASS_EQUALITY)


def simulate(rel, metric, n_draws: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of a metric over random score matrices."""
    shape = (len(rel.query_ids), len(rel.item_ids))
    values = []
    for d in range(n_draws):
        rng = np.random.default_rng((seed, d))
        sim = SimilarityMatrix(rel.query_ids, rel.item_ids, rng.random(shape))
        values.append(metric(sim))
    arr = np.asarray(values)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))


def study_ap(args) -> None:
    print("\n-- average precision: r relevant among n, text-to-audio --")
    print(f"{'n':>5} {'r':>3} {'analytic':>9} {'simulated':>18} {'|diff|/SE':>10}")
    for n, r in [(5, 1), (10, 1), (10, 3), (25, 5), (50, 1), (50, 10)]:
        rel = binary_relevance(args.queries, n, r)
        got, se = simulate(
            rel,
            lambda sim: mean_average_precision(sim, rel, Direction.T2A),
            args.draws,
            args.seed,
        )
        want = expected_ap(n, r) * 100.0
        print(
            f"{n:>5} {r:>3} {want:>9.3f} {got:>10.3f} +- {se:.3f} {abs(got - want) / se:>10.2f}"
        )


def study_ndcg(args) -> None:
    print("\n-- nDCG: graded relevance, full ranking, text-to-audio --")
    print(f"{'n':>5} {'grades':>22} {'analytic':>9} {'simulated':>18} {'|diff|/SE':>10}")
    cases = [
        (8, [1.0]),
        (12, [1.0, 0.5]),
        (20, [1.0, 0.5, 0.5, 0.25]),
        (40, [1.0, 1.0, 0.5, 0.25, 0.25]),
    ]
    for n, grade_values in cases:
        qids = tuple(f"q{i}" for i in range(args.queries))
        iids = tuple(f"i{j}" for j in range(n))
        entries = {
            (q, iids[j]): g for q in qids for j, g in enumerate(grade_values)
        }
        rel = RelevanceMatrix(qids, iids, entries, MatrixKind.CAPTION_OVERLAP)
        row = np.zeros(n)
        row[: len(grade_values)] = grade_values
        want = expected_ndcg(row) * 100.0
        got, se = simulate(
            rel, lambda sim: ndcg(sim, rel, Direction.T2A), args.draws, args.seed + 1
        )
        label = ",".join(str(g) for g in grade_values)
        print(
            f"{n:>5} {label:>22} {want:>9.3f} {got:>10.3f} +- {se:.3f} {abs(got - want) / se:>10.2f}"
        )


def study_class_corpus(args) -> None:
    print("\n-- class-structured corpus: direction asymmetry --")
    n_items, n_classes = 1000, 44
    rng = np.random.default_rng(args.seed + 2)
    weights = rng.dirichlet(np.full(n_classes, 2.0))
    class_of = [k % n_classes for k in range(n_classes)] + list(
        rng.choice(n_classes, size=n_items - n_classes, p=weights)
    )
    counts = np.bincount(class_of, minlength=n_classes)
    qids = tuple(f"t{k}" for k in range(n_classes))
    iids = tuple(f"a{j}" for j in range(n_items))
    entries = {
        (qids[class_of[j]], iids[j]): 1.0 for j in range(n_items)
    }
    rel = RelevanceMatrix(qids, iids, entries, MatrixKind.CLASS_EQUALITY)

    want_t2a = 100.0 * float(
        np.mean([expected_ap(n_items, int(c)) for c in counts])
    )
    want_a2t = 100.0 * expected_ap(n_classes, 1)
    base = random_retrieval_baseline(rel, n_seeds=args.class_seeds, seed=args.seed + 3)
    print(f"{n_classes} class texts x {n_items} clips, class sizes via Dirichlet(2.0)")
    print(
        f"  mAP t2a: analytic {want_t2a:7.3f}   simulated {base.mean.map_t2a:7.3f} +- {base.stderr['map_t2a']:.3f}"
    )
    print(
        f"  mAP a2t: analytic {want_a2t:7.3f}   simulated {base.mean.map_a2t:7.3f} +- {base.stderr['map_a2t']:.3f}"
    )
    print(
        "  one caption per class makes audio-to-text much easier at random than"
        " text-to-audio, purely from the query/item count asymmetry."
    )


def study_mcq(args) -> None:
    print("\n-- multiple choice: five candidates, expected accuracy 20 --")
    items = [
        MCQItem(
            query_text_id=f"q{i}",
            candidates=tuple(f"c{i}_{j}" for j in range(5)),
            answer_index=i % 5,
            kind=McqKind.INTRA if i % 2 == 0 else McqKind.INTER,
        )
        for i in range(args.mcq_items)
    ]
    base = random_mcq_baseline(items, n_seeds=args.class_seeds, seed=args.seed + 4)
    print(
        f"  {args.mcq_items} items: simulated {base.mean.accuracy_overall:6.3f}"
        f" +- {base.stderr['accuracy_overall']:.3f} (analytic 20.000)"
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--queries", type=int, default=200, help="trial queries per matrix")
    parser.add_argument("--draws", type=int, default=40, help="score matrices per case")
    parser.add_argument("--class-seeds", type=int, default=30)
    parser.add_argument("--mcq-items", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(
        f"{args.queries} queries x {args.draws} draws per case"
        f" = {args.queries * args.draws} samples per estimate"
    )
    study_ap(args)
    study_ndcg(args)
    study_class_corpus(args)
    study_mcq(args)
    print("\nall simulated means should sit within a few standard errors of the closed forms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
