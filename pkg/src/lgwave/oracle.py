"""Closed-form quantum predictions for cross-checking the Monte Carlo.

The unblocked network is a product of 2x2 beam-splitter matrices; inserted
blockers project out one arm.  The two amplitudes below are the transfer
coefficients from the source beam to the two final exits, written out
term by term with the blocker bits attached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .harness import (
    STANDARD_CONTEXT_TABLE,
    T1T2T3_MM,
    T1T2T3_MP,
    T1T2T3_PM,
    T1T2T3_PP,
    T1T3_MINUS,
    T1T3_PLUS,
    T2T3_MINUS,
    T2T3_PLUS,
    standard_contexts,
)
from .optics import Context, OpticalParams
from .stats import MINUS, PLUS, Pmf2, Pmf3, k_statistic, marginal_12, w_statistic


@dataclass(frozen=True)
class AmplitudePair:
    """Amplitudes for a coincidence at the upper (+) and lower (-) exit."""

    alpha_plus: complex
    alpha_minus: complex

    @property
    def weights(self) -> tuple[float, float]:
        return abs(self.alpha_plus) ** 2, abs(self.alpha_minus) ** 2


def amplitudes(ctx: Context) -> AmplitudePair:
    """Evaluate the four-term amplitude formulas for a blocker configuration."""
    b1, b2, b3, b4 = ctx.b
    o = ctx.optics
    t1, t2, t3 = o.t1, o.t2, o.t3
    r1, r2, r3 = 1.0 - t1, 1.0 - t2, 1.0 - t3
    e1 = np.exp(1j * o.theta1)
    e2 = np.exp(1j * o.theta2)
    alpha_plus = (
        b2 * b3 * e2 * np.sqrt(r1 * r2 * t3)
        - b1 * b3 * e1 * e2 * np.sqrt(t1 * t2 * t3)
        + b2 * b4 * np.sqrt(r1 * t2 * r3)
        + b1 * b4 * e1 * np.sqrt(t1 * r2 * r3)
    )
    alpha_minus = (
        b2 * b3 * e2 * np.sqrt(r1 * r2 * r3)
        - b1 * b3 * e1 * e2 * np.sqrt(t1 * t2 * r3)
        - b2 * b4 * np.sqrt(r1 * t2 * t3)
        - b1 * b4 * e1 * np.sqrt(t1 * r2 * t3)
    )
    return AmplitudePair(complex(alpha_plus), complex(alpha_minus))


def type_weight_sums(optics: OpticalParams) -> dict[str, float]:
    """Sum of |alpha+|^2 + |alpha-|^2 over each experiment type's contexts.

    For the standard context groups this is exactly 1 for any parameters,
    which is what justifies normalizing counts per type.
    """
    ctxs = standard_contexts(optics)
    w = [sum(amplitudes(c).weights) for c in ctxs]
    return {
        "t1t3": w[T1T3_PLUS] + w[T1T3_MINUS],
        "t2t3": w[T2T3_PLUS] + w[T2T3_MINUS],
        "t1t2t3": w[T1T2T3_PP] + w[T1T2T3_PM] + w[T1T2T3_MP] + w[T1T2T3_MM],
    }


def predicted_pmfs(optics: OpticalParams) -> tuple[Pmf2, Pmf2, Pmf3]:
    """Quantum PMFs (P_{t1,t3}, P_{t2,t3}, P_{t1,t2,t3}).

    Cell (context, q3=+) gets |alpha+|^2 and (context, q3=-) gets |alpha-|^2,
    normalized per experiment type (the per-context sums are T1, R1, etc.;
    only the type-level sum is unity).
    """
    ctxs = standard_contexts(optics)
    w = [amplitudes(c).weights for c in ctxs]

    def cells2(idx_plus: int, idx_minus: int) -> Pmf2:
        total = sum(w[idx_plus]) + sum(w[idx_minus])
        return Pmf2(
            {
                (PLUS, PLUS): w[idx_plus][0] / total,
                (PLUS, MINUS): w[idx_plus][1] / total,
                (MINUS, PLUS): w[idx_minus][0] / total,
                (MINUS, MINUS): w[idx_minus][1] / total,
            }
        )

    p13 = cells2(T1T3_PLUS, T1T3_MINUS)
    p23 = cells2(T2T3_PLUS, T2T3_MINUS)

    idx3 = {
        (PLUS, PLUS): T1T2T3_PP,
        (PLUS, MINUS): T1T2T3_PM,
        (MINUS, PLUS): T1T2T3_MP,
        (MINUS, MINUS): T1T2T3_MM,
    }
    total3 = sum(sum(w[j]) for j in idx3.values())
    p3 = Pmf3(
        {
            (q1, q2, q3): w[j][0 if q3 == PLUS else 1] / total3
            for (q1, q2), j in idx3.items()
            for q3 in (PLUS, MINUS)
        }
    )
    return p13, p23, p3


def predicted_stats(optics: OpticalParams) -> dict[str, float]:
    """Quantum K, W and pair correlations from the closed-form amplitudes."""
    from .stats import correlation

    p13, p23, p3 = predicted_pmfs(optics)
    p12 = marginal_12(p3)
    return {
        "C12": correlation(p12),
        "C23": correlation(p23),
        "C13": correlation(p13),
        "K": k_statistic(p12, p23, p13),
        "W": w_statistic(p13, p23, p12),
    }


def context_labels() -> list[dict]:
    """The nine standard blocker configurations with their (q1, q2) labels."""
    rows = []
    for bits, q1, q2 in STANDARD_CONTEXT_TABLE:
        rows.append(
            {
                "b": bits,
                "q1": {None: ".", PLUS: "+", MINUS: "-"}[q1],
                "q2": {None: ".", PLUS: "+", MINUS: "-"}[q2],
            }
        )
    return rows
