"""Counts -> PMFs, correlations, K and W statistics, efficiencies.

Outcomes are labeled +1 / -1.  PMF cells are exact ratios of integer counts,
so normalization holds to machine precision.  The marginal-form statistics
(K_marginal, W_marginal) are mathematical identities bounded by 1 and 0
respectively for *any* joint PMF; the directly measured K and W carry no
such bound, which is the whole point of the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .harness import (
    OPEN,
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
    CounterfactualRecord,
)

PLUS, MINUS = +1, -1
OUTCOMES = (PLUS, MINUS)


class ZeroCoincidences(ValueError):
    """All coincidence counts are zero (threshold too high or too few samples)."""


class InconsistentInputs(ValueError):
    """A PMF that must be a marginal of another does not match it."""


class NoHeralds(ValueError):
    """No herald detections; efficiencies are undefined."""


@dataclass
class Pmf2:
    """PMF over (q_i, q_j) in {+,-}^2."""

    p: dict[tuple[int, int], float]

    def __getitem__(self, key: tuple[int, int]) -> float:
        return self.p[key]


@dataclass
class Pmf3:
    """PMF over (q1, q2, q3) in {+,-}^3."""

    p: dict[tuple[int, int, int], float]

    def __getitem__(self, key: tuple[int, int, int]) -> float:
        return self.p[key]


def pmf2_from_counts(counts_plus_ctx: ContextCounts, counts_minus_ctx: ContextCounts) -> Pmf2:
    """Four-cell PMF from the two contexts measuring q_i = + and q_i = -.

    Cell (q, +) takes the n_plus of context q, cell (q, -) its n_minus;
    normalization is over the grand total of the four exclusive counts.
    """
    cells = {
        (PLUS, PLUS): counts_plus_ctx.n_plus,
        (PLUS, MINUS): counts_plus_ctx.n_minus,
        (MINUS, PLUS): counts_minus_ctx.n_plus,
        (MINUS, MINUS): counts_minus_ctx.n_minus,
    }
    total = sum(cells.values())
    if total == 0:
        raise ZeroCoincidences("all four coincidence counts are zero")
    return Pmf2({k: v / total for k, v in cells.items()})


def pmf3_from_counts(counts: dict[tuple[int, int], ContextCounts]) -> Pmf3:
    """Eight-cell PMF from the four two-blocker contexts keyed by (q1, q2)."""
    cells: dict[tuple[int, int, int], int] = {}
    for (q1, q2), c in counts.items():
        cells[(q1, q2, PLUS)] = c.n_plus
        cells[(q1, q2, MINUS)] = c.n_minus
    total = sum(cells.values())
    if total == 0:
        raise ZeroCoincidences("all eight coincidence counts are zero")
    return Pmf3({k: v / total for k, v in cells.items()})


def marginal_12(p: Pmf3) -> Pmf2:
    return Pmf2(
        {
            (q1, q2): sum(p[(q1, q2, q3)] for q3 in OUTCOMES)
            for q1, q2 in product(OUTCOMES, OUTCOMES)
        }
    )


def marginal_13(p: Pmf3) -> Pmf2:
    return Pmf2(
        {
            (q1, q3): sum(p[(q1, q2, q3)] for q2 in OUTCOMES)
            for q1, q3 in product(OUTCOMES, OUTCOMES)
        }
    )


def marginal_23(p: Pmf3) -> Pmf2:
    return Pmf2(
        {
            (q2, q3): sum(p[(q1, q2, q3)] for q1 in OUTCOMES)
            for q2, q3 in product(OUTCOMES, OUTCOMES)
        }
    )


def correlation(p: Pmf2) -> float:
    """C = P(+,+) + P(-,-) - P(+,-) - P(-,+), in [-1, 1]."""
    return sum(qi * qj * pij for (qi, qj), pij in p.p.items())


def k_statistic(p12: Pmf2, p23: Pmf2, p13: Pmf2) -> float:
    """K = C_{t1,t2} + C_{t2,t3} - C_{t1,t3}."""
    return correlation(p12) + correlation(p23) - correlation(p13)


def w_statistic(p13: Pmf2, p23: Pmf2, p12: Pmf2) -> float:
    """W = P_{t1,t3}(-,+) - P_{t2,t3}(-,+) - P_{t1,t2}(-,+)."""
    return p13[(MINUS, PLUS)] - p23[(MINUS, PLUS)] - p12[(MINUS, PLUS)]


def marginal_lg(p12: Pmf2, p3: Pmf3, atol: float = 1e-9) -> tuple[float, float]:
    """Marginal-form statistics (K_marginal, W_marginal).

    Both are computed entirely from the joint three-time PMF, so they obey
    K_marginal <= 1 and W_marginal <= 0 identically.  p12 must equal the
    (q1, q2) marginal of p3; it is passed separately only to make the
    consistency requirement explicit.
    """
    m12 = marginal_12(p3)
    if any(abs(p12[k] - m12[k]) > atol for k in m12.p):
        raise InconsistentInputs("p12 is not the (q1,q2) marginal of the joint PMF")
    m13 = marginal_13(p3)
    m23 = marginal_23(p3)
    k_marg = correlation(p12) + correlation(m23) - correlation(m13)
    w_marg = m13[(MINUS, PLUS)] - m23[(MINUS, PLUS)] - p12[(MINUS, PLUS)]
    return k_marg, w_marg


@dataclass
class EfficiencyReport:
    """Context-dependent detection efficiencies from a shared-draw record.

    Direct efficiencies use counterfactual set unions over contexts; bounds
    are the experimentally accessible sums of normalized coincidence counts.
    delta maps context bits to the double-detection probability.
    """

    n_herald: int
    eta_t3: float
    eta_t1t3: float
    eta_t2t3: float
    eta_t1t2t3: float
    bound_t1t3: float
    bound_t2t3: float
    bound_t1t2t3: float
    delta: dict[tuple[int, int, int, int], float]
    sym_diff: dict[str, int]


@dataclass
class EfficiencyAccumulator:
    """Streaming aggregation of shared-draw record chunks.

    Addition of the integer tallies is associative and commutative, so
    chunks may be processed in any order (and combined across workers).
    """

    n_herald: int = 0
    n_lambda: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=np.int64))
    n_coinc: np.ndarray = field(default_factory=lambda: np.zeros(9, dtype=np.int64))
    n_double: np.ndarray = field(default_factory=lambda: np.zeros(9, dtype=np.int64))
    n_sym_diff: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.int64))

    def update(self, rec: CounterfactualRecord) -> None:
        d1, d2, d3 = rec.d1, rec.d2, rec.d3
        valid = d1[:, None] & (d2 ^ d3)  # E+(b) | E-(b) per context
        double = d1[:, None] & d2 & d3
        lam_t3 = valid[:, OPEN]
        lam_13 = valid[:, T1T3_PLUS] | valid[:, T1T3_MINUS]
        lam_23 = valid[:, T2T3_PLUS] | valid[:, T2T3_MINUS]
        lam_123 = (
            valid[:, T1T2T3_PP]
            | valid[:, T1T2T3_PM]
            | valid[:, T1T2T3_MP]
            | valid[:, T1T2T3_MM]
        )
        self.n_herald += int(d1.sum())
        self.n_lambda += [int(x.sum()) for x in (lam_t3, lam_13, lam_23, lam_123)]
        self.n_coinc += valid.sum(axis=0)
        self.n_double += double.sum(axis=0)
        self.n_sym_diff += [
            int((lam_13 ^ lam_23).sum()),
            int((lam_13 ^ lam_123).sum()),
            int((lam_23 ^ lam_123).sum()),
        ]

    def merge(self, other: "EfficiencyAccumulator") -> None:
        self.n_herald += other.n_herald
        self.n_lambda += other.n_lambda
        self.n_coinc += other.n_coinc
        self.n_double += other.n_double
        self.n_sym_diff += other.n_sym_diff

    def report(self) -> EfficiencyReport:
        if self.n_herald == 0:
            raise NoHeralds("no herald detections in the shared-draw record")
        nh = self.n_herald
        bound = lambda idx: float(self.n_coinc[list(idx)].sum()) / nh
        return EfficiencyReport(
            n_herald=nh,
            eta_t3=self.n_lambda[0] / nh,
            eta_t1t3=self.n_lambda[1] / nh,
            eta_t2t3=self.n_lambda[2] / nh,
            eta_t1t2t3=self.n_lambda[3] / nh,
            bound_t1t3=bound((T1T3_PLUS, T1T3_MINUS)),
            bound_t2t3=bound((T2T3_PLUS, T2T3_MINUS)),
            bound_t1t2t3=bound((T1T2T3_PP, T1T2T3_PM, T1T2T3_MP, T1T2T3_MM)),
            delta={
                STANDARD_CONTEXT_TABLE[j][0]: float(self.n_double[j]) / nh
                for j in range(9)
            },
            sym_diff={
                "t1t3_vs_t2t3": int(self.n_sym_diff[0]),
                "t1t3_vs_t1t2t3": int(self.n_sym_diff[1]),
                "t2t3_vs_t1t2t3": int(self.n_sym_diff[2]),
            },
        )


def efficiencies(records) -> EfficiencyReport:
    """EfficiencyReport from an iterable of shared-draw record chunks."""
    acc = EfficiencyAccumulator()
    for rec in records:
        acc.update(rec)
    return acc.report()


def w_decomposition(
    counts: list[ContextCounts], eff: EfficiencyReport
) -> dict[str, float]:
    """Side-by-side view of the directly measured W and its marginal form.

    Each direct term is exhibited as mu[E|D1] / eta for its context group;
    the marginal terms divide by the common two-blocker efficiency instead.
    No new estimator: the direct W here equals w_statistic on the same counts.
    """
    nh = eff.n_herald
    if nh == 0:
        raise NoHeralds("no herald detections")
    p13_mp = (counts[T1T3_MINUS].n_plus / nh) / eff.eta_t1t3
    p23_mp = (counts[T2T3_MINUS].n_plus / nh) / eff.eta_t2t3
    p12_mp = (
        (counts[T1T2T3_MP].n_plus + counts[T1T2T3_MP].n_minus) / nh
    ) / eff.eta_t1t2t3
    p13_mp_marg = (
        (counts[T1T2T3_MP].n_plus + counts[T1T2T3_MM].n_plus) / nh
    ) / eff.eta_t1t2t3
    p23_mp_marg = (
        (counts[T1T2T3_PM].n_plus + counts[T1T2T3_MM].n_plus) / nh
    ) / eff.eta_t1t2t3
    return {
        "p13_mp_direct": p13_mp,
        "p23_mp_direct": p23_mp,
        "p12_mp": p12_mp,
        "w_direct": p13_mp - p23_mp - p12_mp,
        "p13_mp_marginal": p13_mp_marg,
        "p23_mp_marginal": p23_mp_marg,
        "w_marginal": p13_mp_marg - p23_mp_marg - p12_mp,
    }
