"""Full nine-context experiment: repetitions, parallel execution, summaries.

Work is split into small tasks (one context-repetition, or one shared-draw
chunk) whose integer tallies are reduced in a fixed order, so the result is
bit-identical for any worker count.  Worker count defaults to the
LGWAVE_WORKERS environment variable, falling back to the CPU count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .harness import (
    MODE_INDEPENDENT,
    MODE_SHARED,
    STANDARD_CONTEXT_TABLE,
    T1T2T3_MM,
    T1T2T3_MP,
    T1T2T3_PM,
    T1T2T3_PP,
    T1T3_MINUS,
    T1T3_PLUS,
    T2T3_MINUS,
    T2T3_PLUS,
    ContextCounts,
    ExperimentPlan,
    counterfactual_chunks,
    record_counts,
    run_context,
)
from .stats import (
    MINUS,
    PLUS,
    EfficiencyAccumulator,
    EfficiencyReport,
    marginal_12,
    marginal_lg,
    pmf2_from_counts,
    pmf3_from_counts,
    k_statistic,
    w_statistic,
    w_decomposition,
)


class InvariantViolation(RuntimeError):
    """An internal consistency check failed on simulated data."""


def default_workers() -> int:
    env = os.environ.get("LGWAVE_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class RepResult:
    """Statistics of one repetition of the full experiment."""

    rep: int
    counts: list[ContextCounts]
    K: float
    W: float
    C12: float
    C23: float
    C13: float
    K_marginal: float
    W_marginal: float
    efficiency: EfficiencyReport
    w_decomposition: dict[str, float]


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    reps: list[RepResult]
    summary: dict[str, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = _summarize(self.reps)


def _mean_std(values: list[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {"mean": float(arr.mean()), "std": std}


def _summarize(reps: list[RepResult]) -> dict[str, dict[str, float]]:
    summary = {
        name: _mean_std([getattr(r, name) for r in reps])
        for name in ("K", "W", "C12", "C23", "C13", "K_marginal", "W_marginal")
    }
    for name in ("eta_t3", "eta_t1t3", "eta_t2t3", "eta_t1t2t3"):
        summary[name] = _mean_std([getattr(r.efficiency, name) for r in reps])
    for bits, _, _ in STANDARD_CONTEXT_TABLE:
        key = "delta_" + "".join(map(str, bits))
        summary[key] = _mean_std([r.efficiency.delta[bits] for r in reps])
    return summary


def _check_counts(c: ContextCounts) -> None:
    if not (c.n_plus + c.n_minus + c.n_double <= c.n_herald <= c.n_total):
        raise InvariantViolation(f"count ordering violated: {c}")


def _rep_stats(
    rep: int,
    counts: list[ContextCounts],
    eff: EfficiencyReport,
    shared_counts: list[ContextCounts],
) -> RepResult:
    for c in counts:
        _check_counts(c)
    p13 = pmf2_from_counts(counts[T1T3_PLUS], counts[T1T3_MINUS])
    p23 = pmf2_from_counts(counts[T2T3_PLUS], counts[T2T3_MINUS])
    p3 = pmf3_from_counts(
        {
            (PLUS, PLUS): counts[T1T2T3_PP],
            (PLUS, MINUS): counts[T1T2T3_PM],
            (MINUS, PLUS): counts[T1T2T3_MP],
            (MINUS, MINUS): counts[T1T2T3_MM],
        }
    )
    p12 = marginal_12(p3)
    k_marg, w_marg = marginal_lg(p12, p3)
    if k_marg > 1.0 + 1e-12 or w_marg > 1e-12:
        raise InvariantViolation(
            f"marginal-form bounds broken: K_marginal={k_marg}, W_marginal={w_marg}"
        )
    from .stats import correlation

    return RepResult(
        rep=rep,
        counts=counts,
        K=k_statistic(p12, p23, p13),
        W=w_statistic(p13, p23, p12),
        C12=correlation(p12),
        C23=correlation(p23),
        C13=correlation(p13),
        K_marginal=k_marg,
        W_marginal=w_marg,
        efficiency=eff,
        w_decomposition=w_decomposition(shared_counts, eff),
    )


def _shared_chunk_task(plan: ExperimentPlan, rep: int, chunk: int):
    acc = EfficiencyAccumulator()
    parts = None
    for rec in counterfactual_chunks(plan, rep, range(chunk, chunk + 1)):
        acc.update(rec)
        parts = record_counts(rec)
    return acc, parts


def run_experiment(plan: ExperimentPlan, workers: int | None = None) -> ExperimentResult:
    """Run all repetitions of the nine-context experiment.

    In independent-draws mode the PMF statistics come from per-context
    streams and a shared-draw pass supplies the counterfactual efficiency
    report; in shared-draws mode the shared pass supplies both.
    """
    if workers is None:
        workers = default_workers()
    contexts = plan.contexts
    independent = plan.mode == MODE_INDEPENDENT

    ctx_tasks = []
    if independent:
        ctx_tasks = [(rep, j) for rep in range(plan.reps) for j in range(len(contexts))]
    shared_tasks = [
        (rep, c) for rep in range(plan.reps) for c in range(plan.n_chunks())
    ]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        ctx_futs = {
            (rep, j): pool.submit(run_context, plan, contexts[j], rep)
            for rep, j in ctx_tasks
        }
        shared_futs = {
            (rep, c): pool.submit(_shared_chunk_task, plan, rep, c)
            for rep, c in shared_tasks
        }
        ctx_counts = {key: fut.result() for key, fut in ctx_futs.items()}
        shared_parts = {key: fut.result() for key, fut in shared_futs.items()}

    reps: list[RepResult] = []
    for rep in range(plan.reps):
        acc = EfficiencyAccumulator()
        shared_counts = [ContextCounts() for _ in contexts]
        for c in range(plan.n_chunks()):
            part_acc, part_counts = shared_parts[(rep, c)]
            acc.merge(part_acc)
            if part_counts is not None:
                for tot, part in zip(shared_counts, part_counts):
                    tot.add(part)
        if independent:
            counts = [ctx_counts[(rep, j)] for j in range(len(contexts))]
        else:
            counts = shared_counts
        reps.append(_rep_stats(rep, counts, acc.report(), shared_counts))
    return ExperimentResult(plan=plan, reps=reps)


def run_kw_only(plan: ExperimentPlan, workers: int | None = None):
    """Lightweight driver for parameter sweeps: per-rep K and W only.

    Skips the shared-draw counterfactual pass entirely.
    """
    if workers is None:
        workers = default_workers()
    contexts = plan.contexts
    if plan.mode == MODE_SHARED:
        raise ValueError("sweeps use independent-draws mode")
    tasks = [(rep, j) for rep in range(plan.reps) for j in range(len(contexts))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = {
            (rep, j): pool.submit(run_context, plan, contexts[j], rep)
            for rep, j in tasks
        }
        ctx_counts = {key: fut.result() for key, fut in futs.items()}
    ks, ws = [], []
    for rep in range(plan.reps):
        counts = [ctx_counts[(rep, j)] for j in range(len(contexts))]
        p13 = pmf2_from_counts(counts[T1T3_PLUS], counts[T1T3_MINUS])
        p23 = pmf2_from_counts(counts[T2T3_PLUS], counts[T2T3_MINUS])
        p3 = pmf3_from_counts(
            {
                (PLUS, PLUS): counts[T1T2T3_PP],
                (PLUS, MINUS): counts[T1T2T3_PM],
                (MINUS, PLUS): counts[T1T2T3_MP],
                (MINUS, MINUS): counts[T1T2T3_MM],
            }
        )
        p12 = marginal_12(p3)
        ks.append(k_statistic(p12, p23, p13))
        ws.append(w_statistic(p13, p23, p12))
    return _mean_std(ks), _mean_std(ws)
