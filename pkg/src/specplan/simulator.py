"""Token-level Monte Carlo simulation of speculative decoding rounds.

Serves as an independent check on the analytical round model: a round draws
``k`` uniform variates, the accepted draft prefix is the maximal run of
variates below the acceptance probability (acceptance stops at the first
rejection; the remaining variates are still consumed so every round uses a
fixed variate count), and one bonus token is always produced.

Reproducibility contract
------------------------
The generator is philox4x64 (``numpy.random.Philox``), which emits 4
uint64 words (4 doubles) per 128-bit counter block. Round ``i`` owns the
counter window ``[i * bpr, (i + 1) * bpr)`` where ``bpr = ceil(k / 4)``
blocks, and reads its ``k`` variates from the start of that window; the
padding words are discarded. Sub-streams are therefore a pure function of
(seed, round index), so serial runs, chunked runs, and sharded runs over
any partition of the round range produce bit-identical aggregates. The
generator identity is recorded in every result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, UndefinedCostError
from .metrics import MetricsTriple
from .render import format_number, tsv_lines

GENERATOR_ID = "philox4x64-block-per-round"

ACCEPT_MODEL_BETA = "per-token-beta"
ACCEPT_MODEL_TABULATED = "tabulated-alpha (approximate)"

_WORDS_PER_BLOCK = 4  # philox4x64 outputs per counter increment
_DEFAULT_CHUNK = 65536


@dataclass(frozen=True)
class SimParams:
    """Inputs of one simulated session.

    ``accept_prob`` is the per-position acceptance probability. Under
    ``per-token-beta`` the session converges exactly to the analytical
    model evaluated at the matching geometric acceptance rate. A tabulated
    acceptance rate may also be supplied via :meth:`with_tabulated_alpha`,
    but treating it as an i.i.d. per-position probability is approximate
    (the expected prefix length is not ``k * alpha`` in general), so such
    sessions are labeled accordingly.
    """

    k: int
    accept_prob: float
    v_d_tok_s: float
    t_verify_s: float
    n_rounds: int
    seed: int
    power_w: float | None = None
    price_per_mtok: float | None = None
    accept_model: str = ACCEPT_MODEL_BETA

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.accept_prob <= 1.0:
            raise DomainError(f"accept_prob must be within [0, 1], got {self.accept_prob}")
        if self.v_d_tok_s <= 0:
            raise DomainError(f"v_d_tok_s must be > 0, got {self.v_d_tok_s}")
        if self.t_verify_s <= 0:
            raise DomainError(f"t_verify_s must be > 0, got {self.t_verify_s}")
        if self.n_rounds < 1:
            raise DomainError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.power_w is not None and self.power_w <= 0:
            raise DomainError(f"power_w must be > 0, got {self.power_w}")
        if self.price_per_mtok is not None and self.price_per_mtok == 0:
            raise UndefinedCostError("undefined cost efficiency: verifier price is zero")
        if self.price_per_mtok is not None and self.price_per_mtok < 0:
            raise DomainError(f"price_per_mtok must be >= 0, got {self.price_per_mtok}")
        if self.accept_model not in (ACCEPT_MODEL_BETA, ACCEPT_MODEL_TABULATED):
            raise DomainError(f"unknown accept_model '{self.accept_model}'")

    def with_tabulated_alpha(self, alpha: float) -> "SimParams":
        """Copy with acceptance driven by a tabulated rate (approximate)."""
        return replace(self, accept_prob=alpha, accept_model=ACCEPT_MODEL_TABULATED)

    @property
    def round_time_s(self) -> float:
        return self.k / self.v_d_tok_s + self.t_verify_s

    @property
    def round_energy_j(self) -> float | None:
        if self.power_w is None:
            return None
        return self.power_w * self.k / self.v_d_tok_s

    @property
    def round_cost_dollars(self) -> float | None:
        if self.price_per_mtok is None:
            return None
        return self.k * self.price_per_mtok * 1e-6


@dataclass(frozen=True)
class RoundOutcome:
    accepted_draft: int
    total_accepted: int
    round_time_s: float
    round_energy_j: float | None
    round_cost_dollars: float | None


@dataclass(frozen=True)
class RoundTotals:
    """Exact integer aggregates of a contiguous block of rounds.

    Integer sums are associative, so merging shard totals in any grouping
    reproduces the serial result bit-for-bit.
    """

    n_rounds: int
    accepted_sum: int
    accepted_sq_sum: int

    def merge(self, other: "RoundTotals") -> "RoundTotals":
        return RoundTotals(
            self.n_rounds + other.n_rounds,
            self.accepted_sum + other.accepted_sum,
            self.accepted_sq_sum + other.accepted_sq_sum,
        )


@dataclass(frozen=True)
class EmpiricalMetrics:
    """Session aggregates; every field is an exact function of the outcomes."""

    n_rounds: int
    seed: int
    mean_accepted_draft: float
    se_accepted_draft: float
    goodput_tok_s: float
    cost_eff_tok_per_dollar: float | None
    energy_j_per_tok: float | None
    accept_model: str
    generator: str = GENERATOR_ID


def blocks_per_round(k: int) -> int:
    return (k + _WORDS_PER_BLOCK - 1) // _WORDS_PER_BLOCK


def round_rng(seed: int, round_index: int, k: int) -> np.random.Generator:
    """Generator positioned at the start of one round's private counter window."""
    if round_index < 0:
        raise DomainError(f"round_index must be >= 0, got {round_index}")
    counter = round_index * blocks_per_round(k)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def simulate_round(rng: np.random.Generator, params: SimParams) -> RoundOutcome:
    """Run one round on a generator positioned at the round's window start."""
    draws = rng.random(params.k)
    rejected = draws >= params.accept_prob
    accepted = int(np.argmax(rejected)) if bool(rejected.any()) else params.k
    return RoundOutcome(
        accepted_draft=accepted,
        total_accepted=accepted + 1,
        round_time_s=params.round_time_s,
        round_energy_j=params.round_energy_j,
        round_cost_dollars=params.round_cost_dollars,
    )


def _accepted_counts(params: SimParams, start: int, stop: int) -> np.ndarray:
    """Accepted-draft counts for rounds [start, stop), vectorized."""
    bpr = blocks_per_round(params.k)
    rng = np.random.Generator(np.random.Philox(key=params.seed, counter=start * bpr))
    n = stop - start
    draws = rng.random((n, bpr * _WORDS_PER_BLOCK))[:, : params.k]
    rejected = draws >= params.accept_prob
    any_rejected = rejected.any(axis=1)
    return np.where(any_rejected, rejected.argmax(axis=1), params.k).astype(np.int64)


def simulate_rounds(
    params: SimParams, start: int, stop: int, chunk: int = _DEFAULT_CHUNK
) -> RoundTotals:
    """Exact totals for rounds [start, stop); chunking never changes them."""
    if not 0 <= start <= stop:
        raise DomainError(f"invalid round range [{start}, {stop})")
    totals = RoundTotals(0, 0, 0)
    position = start
    while position < stop:
        upper = min(position + chunk, stop)
        counts = _accepted_counts(params, position, upper)
        totals = totals.merge(
            RoundTotals(
                n_rounds=upper - position,
                accepted_sum=int(counts.sum()),
                accepted_sq_sum=int((counts * counts).sum()),
            )
        )
        position = upper
    return totals


def metrics_from_totals(params: SimParams, totals: RoundTotals) -> EmpiricalMetrics:
    """Reduce exact round totals to empirical session metrics."""
    n = totals.n_rounds
    mean = totals.accepted_sum / n
    if n > 1:
        variance = (totals.accepted_sq_sum - totals.accepted_sum**2 / n) / (n - 1)
        se = math.sqrt(max(variance, 0.0) / n)
    else:
        se = 0.0
    total_accepted = totals.accepted_sum + n  # one bonus token per round
    goodput = total_accepted / (n * params.round_time_s)
    cost = None
    if params.round_cost_dollars is not None:
        cost = total_accepted / (n * params.round_cost_dollars)
    energy = None
    if params.round_energy_j is not None:
        energy = n * params.round_energy_j / total_accepted
    return EmpiricalMetrics(
        n_rounds=n,
        seed=params.seed,
        mean_accepted_draft=mean,
        se_accepted_draft=se,
        goodput_tok_s=goodput,
        cost_eff_tok_per_dollar=cost,
        energy_j_per_tok=energy,
        accept_model=params.accept_model,
    )


def simulate_session(params: SimParams) -> EmpiricalMetrics:
    """Run the full session; bit-reproducible for fixed (seed, params)."""
    return metrics_from_totals(params, simulate_rounds(params, 0, params.n_rounds))


@dataclass(frozen=True)
class MetricDelta:
    metric: str
    empirical: float
    analytical: float
    rel_error: float
    exceeds_tolerance: bool


def compare_to_analytical(
    empirical: EmpiricalMetrics, analytical: MetricsTriple, tolerance: float
) -> tuple[MetricDelta, ...]:
    """Relative error per metric, flagging any beyond ``tolerance``.

    Both sides must expose the same metric set; a cost or energy value
    present on only one side is a parameter mismatch.
    """
    pairs = [("goodput_tok_s", empirical.goodput_tok_s, analytical.goodput_tok_s)]
    for name, emp, ana in (
        ("cost_eff_tok_per_dollar", empirical.cost_eff_tok_per_dollar,
         analytical.cost_eff_tok_per_dollar),
        ("energy_j_per_tok", empirical.energy_j_per_tok, analytical.energy_j_per_tok),
    ):
        if (emp is None) != (ana is None):
            raise DomainError(f"mismatched parameters: {name} present on only one side")
        if emp is not None:
            pairs.append((name, emp, ana))
    deltas = []
    for name, emp, ana in pairs:
        if ana == 0:
            rel = 0.0 if emp == 0 else math.inf
        else:
            rel = abs(emp - ana) / abs(ana)
        deltas.append(MetricDelta(name, emp, ana, rel, rel > tolerance))
    return tuple(deltas)


def deltas_to_tsv(deltas: tuple[MetricDelta, ...], n_rounds: int, seed: int) -> str:
    """Render comparison deltas as TSV."""
    rows = [["metric", "empirical", "analytical", "rel_error", "n_rounds", "seed"]]
    for delta in deltas:
        rows.append(
            [
                delta.metric,
                format_number(delta.empirical, 12),
                format_number(delta.analytical, 12),
                format_number(delta.rel_error, 6),
                str(n_rounds),
                str(seed),
            ]
        )
    return tsv_lines(rows)
