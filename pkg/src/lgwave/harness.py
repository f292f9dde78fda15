"""Experiment driver: contexts, random-stream layout, tallying.

Stream layout (reproducible across machines and worker counts): realizations
are processed in fixed chunks of CHUNK; chunk c of repetition `rep` for the
context with packed bits `k` uses the Philox generator seeded by
SeedSequence([seed, k, rep, c]).  In shared-draw mode every context sees the
same hidden states, obtained with the reserved stream key SHARED_STREAM_KEY.
Counts are plain integers accumulated chunk by chunk, so any parallel
schedule that reduces them in a fixed order reproduces the serial result
exactly.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from .optics import (
    Context,
    HiddenState,
    OpticalParams,
    SourceParams,
    detect,
    sample_hidden,
    source_output,
    stage1,
    stage2,
    stage3,
)

CHUNK = 1 << 16

# Context bits occupy stream keys 0..15; shared-draw streams get their own key.
SHARED_STREAM_KEY = 16

MODE_INDEPENDENT = "independent-draws"
MODE_SHARED = "shared-draws"

# The nine standard measurement contexts with their (q1, q2) labels.
# None means the corresponding time is not interrogated in that context.
STANDARD_CONTEXT_TABLE: tuple[tuple[tuple[int, int, int, int], int | None, int | None], ...] = (
    ((1, 1, 1, 1), None, None),   # open
    ((1, 0, 1, 1), +1, None),     # t1,t3
    ((0, 1, 1, 1), -1, None),
    ((1, 1, 1, 0), None, +1),     # t2,t3
    ((1, 1, 0, 1), None, -1),
    ((1, 0, 1, 0), +1, +1),       # t1,t2,t3
    ((1, 0, 0, 1), +1, -1),
    ((0, 1, 1, 0), -1, +1),
    ((0, 1, 0, 1), -1, -1),
)

OPEN = 0
T1T3_PLUS, T1T3_MINUS = 1, 2
T2T3_PLUS, T2T3_MINUS = 3, 4
T1T2T3_PP, T1T2T3_PM, T1T2T3_MP, T1T2T3_MM = 5, 6, 7, 8


def standard_contexts(optics: OpticalParams) -> list[Context]:
    return [Context(b=bits, optics=optics) for bits, _, _ in STANDARD_CONTEXT_TABLE]


@dataclass
class DetectionTriple:
    """Threshold events at the herald detector D1 and the two exits D2, D3."""

    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


@dataclass
class ContextCounts:
    """Tallies for one context: heralds, exclusive coincidences, doubles."""

    n_herald: int = 0
    n_plus: int = 0
    n_minus: int = 0
    n_double: int = 0
    n_total: int = 0

    def add(self, other: "ContextCounts") -> None:
        self.n_herald += other.n_herald
        self.n_plus += other.n_plus
        self.n_minus += other.n_minus
        self.n_double += other.n_double
        self.n_total += other.n_total


@dataclass
class CounterfactualRecord:
    """Per-realization detection bits for one chunk under all nine contexts.

    d1 has shape (n,); d2 and d3 have shape (n, 9), one column per standard
    context.  d1 is shared: the heralding beam never touches the blockers.
    """

    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything needed to reproduce a full nine-context experiment."""

    source: SourceParams
    optics: OpticalParams = field(default_factory=OpticalParams)
    gamma: float = 2.0
    samples: int = 1 << 20
    reps: int = 30
    mode: str = MODE_INDEPENDENT
    seed: int = 0

    def __post_init__(self):
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.mode not in (MODE_INDEPENDENT, MODE_SHARED):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def contexts(self) -> list[Context]:
        return standard_contexts(self.optics)

    def n_chunks(self) -> int:
        return (self.samples + CHUNK - 1) // CHUNK

    def chunk_size(self, chunk_index: int) -> int:
        start = chunk_index * CHUNK
        return min(CHUNK, self.samples - start)

    def chunk_rng(self, stream_key: int, rep_index: int, chunk_index: int) -> np.random.Generator:
        ss = np.random.SeedSequence([self.seed, stream_key, rep_index, chunk_index])
        return np.random.Generator(np.random.Philox(ss))


def evaluate_context(
    h: HiddenState, src: SourceParams, ctx: Context, gamma: float
) -> DetectionTriple:
    """Full pipeline source -> three stages -> threshold detection.

    The heralding beam a1 is untouched by the interferometer, so d1 depends
    only on the source draw.  Works on single states or batches.
    """
    a1, a2, a3 = source_output(h, src)
    a2, a3 = stage1(a2, a3, h, ctx)
    a2, a3 = stage2(a2, a3, h, ctx)
    a2, a3 = stage3(a2, a3, ctx)
    return DetectionTriple(
        d1=detect(a1, gamma), d2=detect(a2, gamma), d3=detect(a3, gamma)
    )


def _tally(d1: np.ndarray, d2: np.ndarray, d3: np.ndarray, n: int) -> ContextCounts:
    coincident = d1 & d2
    double = coincident & d3
    return ContextCounts(
        n_herald=int(d1.sum()),
        n_plus=int((coincident & ~d3).sum()),
        n_minus=int((d1 & ~d2 & d3).sum()),
        n_double=int(double.sum()),
        n_total=n,
    )


def run_context(plan: ExperimentPlan, ctx: Context, rep_index: int) -> ContextCounts:
    """Tally one context over plan.samples realizations of one repetition."""
    key = SHARED_STREAM_KEY if plan.mode == MODE_SHARED else ctx.bits_int
    total = ContextCounts()
    for c in range(plan.n_chunks()):
        n = plan.chunk_size(c)
        h = sample_hidden(plan.chunk_rng(key, rep_index, c), n)
        t = evaluate_context(h, plan.source, ctx, plan.gamma)
        total.add(_tally(t.d1, t.d2, t.d3, n))
    return total


def counterfactual_chunks(
    plan: ExperimentPlan, rep_index: int, chunk_indices: range | None = None
) -> Iterator[CounterfactualRecord]:
    """Stream shared-draw records: one hidden state per realization, all nine
    contexts evaluated on it.  Chunks arrive in index order."""
    contexts = plan.contexts
    if chunk_indices is None:
        chunk_indices = range(plan.n_chunks())
    for c in chunk_indices:
        n = plan.chunk_size(c)
        h = sample_hidden(plan.chunk_rng(SHARED_STREAM_KEY, rep_index, c), n)
        d2 = np.empty((n, len(contexts)), dtype=bool)
        d3 = np.empty((n, len(contexts)), dtype=bool)
        d1 = None
        for j, ctx in enumerate(contexts):
            t = evaluate_context(h, plan.source, ctx, plan.gamma)
            if d1 is None:
                d1 = t.d1
            d2[:, j] = t.d2
            d3[:, j] = t.d3
        yield CounterfactualRecord(d1=d1, d2=d2, d3=d3)


def record_counts(rec: CounterfactualRecord) -> list[ContextCounts]:
    """Per-context tallies of a shared-draw record chunk."""
    n = rec.d1.shape[0]
    return [
        _tally(rec.d1, rec.d2[:, j], rec.d3[:, j], n)
        for j in range(rec.d2.shape[1])
    ]


def run_counterfactual(
    plan: ExperimentPlan, rep_index: int
) -> tuple[list[CounterfactualRecord], list[ContextCounts]]:
    """Materialize the full shared-draw record of one repetition together
    with its per-context counts.  Memory is ~19 bits per realization; prefer
    counterfactual_chunks for streaming aggregation at large sample counts."""
    records: list[CounterfactualRecord] = []
    totals = [ContextCounts() for _ in STANDARD_CONTEXT_TABLE]
    for rec in counterfactual_chunks(plan, rep_index):
        records.append(rec)
        for tot, part in zip(totals, record_counts(rec)):
            tot.add(part)
    return records, totals
