"""Independent oracles used across the test suite.

Everything here recomputes expected values from first principles (the
reference result table baked into the fixture, closed-form sums,
brute-force scans) so tests never depend on the code paths they check.
"""

from __future__ import annotations

from dataclasses import dataclass

T_VERIFY_S = 0.5
PRICE_PER_MTOK = {"llama70b": 0.9, "qwen32b": 0.59}


@dataclass(frozen=True)
class ResultRow:
    """One reference recommended-configuration row."""

    target: str
    device: str
    objective: str
    model: str
    quant: str
    k: int
    goodput: float
    cost_ktok: float
    energy: float | None


# Recommended configurations per (target, device, objective); energy is None
# on the device without power instrumentation.
RESULT_ROWS = [
    ResultRow("llama70b", "rpi4b", "goodput", "llama-3.2-1b-inst", "Q4_K_M", 2, 2.44, 1334, None),
    ResultRow("llama70b", "rpi4b", "cost", "llama-3.1-8b-inst", "Q4_K_M", 2, 0.77, 1401, None),
    ResultRow("llama70b", "rpi5", "goodput", "llama-3.2-1b-inst", "Q4_K_M", 6, 4.50, 763, 0.84),
    ResultRow("llama70b", "rpi5", "cost", "llama-3.1-8b-inst", "Q4_K_M", 2, 1.55, 1401, 3.75),
    ResultRow("llama70b", "rpi5", "energy", "llama-3.2-1b-inst", "Q4_K_M", 2, 3.76, 1334, 0.48),
    ResultRow("llama70b", "jetson", "goodput", "llama-3.2-1b-inst", "Q4_K_M", 8, 7.65, 623, 0.85),
    ResultRow("llama70b", "jetson", "cost", "llama-3.1-8b-inst", "Q4_K_M", 2, 4.35, 1401, 1.74),
    ResultRow("llama70b", "jetson", "energy", "llama-3.2-1b-inst", "Q4_K_M", 2, 4.60, 1334, 0.39),
    ResultRow("qwen32b", "rpi4b", "goodput", "qwen3-0.6b", "Q4_K_M", 2, 2.81, 1801, None),
    ResultRow("qwen32b", "rpi4b", "cost", "qwen3-8b", "Q4_K_M", 2, 0.74, 2048, None),
    ResultRow("qwen32b", "rpi5", "goodput", "qwen3-0.6b", "Q4_K_M", 7, 3.86, 828, 0.90),
    ResultRow("qwen32b", "rpi5", "cost", "qwen3-8b", "Q4_K_M", 2, 1.49, 2048, 3.86),
    ResultRow("qwen32b", "rpi5", "energy", "qwen3-0.6b", "Q4_K_M", 2, 3.48, 1801, 0.41),
    ResultRow("qwen32b", "jetson", "goodput", "qwen3-0.6b", "Q4_K_M", 10, 6.21, 633, 0.93),
    ResultRow("qwen32b", "jetson", "cost", "qwen3-8b", "Q4_K_M", 2, 4.14, 2048, 1.88),
    ResultRow("qwen32b", "jetson", "energy", "qwen3-0.6b", "Q4_K_M", 2, 4.08, 1801, 0.33),
]

# The two cells with no power data; the energy objective must be infeasible.
INFEASIBLE_ENERGY_CELLS = [("llama70b", "rpi4b"), ("qwen32b", "rpi4b")]


def invert_row(row: ResultRow) -> tuple[float, float, float | None]:
    """Recover (alpha, v_d, power) from a reported (G, eta, E, K) row.

    Inverts the three metric definitions algebraically: alpha from cost
    efficiency, drafting speed from goodput, power from energy.
    """
    price_per_token = PRICE_PER_MTOK[row.target] * 1e-6
    alpha = row.cost_ktok * 1000.0 * price_per_token - 1.0 / row.k
    accepted = row.k * alpha + 1.0
    v_d = row.k / (accepted / row.goodput - T_VERIFY_S)
    power = row.energy * accepted * v_d / row.k if row.energy is not None else None
    return alpha, v_d, power


def prefix_mean(beta: float, k: int) -> float:
    """E[accepted draft tokens] when acceptance stops at the first rejection."""
    return sum(beta**i for i in range(1, k + 1))


def brute_force_front(points: list[tuple[float, float]]) -> set[int]:
    """Indexes of non-dominated points by exhaustive pairwise comparison."""
    front = set()
    for i, (g_i, e_i) in enumerate(points):
        dominated = False
        for j, (g_j, e_j) in enumerate(points):
            if j == i:
                continue
            if g_j >= g_i and e_j <= e_i and (g_j > g_i or e_j < e_i):
                dominated = True
                break
        if not dominated:
            front.add(i)
    return front
