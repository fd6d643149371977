"""Analytical round model: goodput, verification cost efficiency, energy.

One speculative round drafts ``k`` tokens locally at ``v_d`` tokens/s, ships
them to the verifier (per-round latency ``t_verify_s``), and yields
``k * alpha + 1`` accepted tokens in expectation: the accepted prefix plus
the single token every verification produces. The verifier bills exactly
``k`` tokens per round at ``price_per_mtok * 1e-6`` dollars each, and only
local drafting time draws device power.
"""

from __future__ import annotations

from dataclasses import dataclass

from .acceptance import alpha_tabulated
from .errors import DomainError, NoPowerDataError, UndefinedCostError
from .profiles import ProfileStore, lookup_variant


@dataclass(frozen=True)
class ConfigTriple:
    """One evaluable configuration: draft variant, length, device, target."""

    model_id: str
    quant_id: str
    k: int
    device_id: str
    target_id: str


@dataclass(frozen=True)
class MetricsTriple:
    goodput_tok_s: float
    cost_eff_tok_per_dollar: float | None
    energy_j_per_tok: float | None

    @property
    def has_energy(self) -> bool:
        return self.energy_j_per_tok is not None


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must be within [0, 1], got {alpha}")


def _check_k(k: int) -> None:
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")


def goodput(v_d_tok_s: float, alpha: float, k: int, t_verify_s: float) -> float:
    """Accepted tokens per second: (k*alpha + 1) / (k/v_d + t_verify)."""
    _check_k(k)
    _check_alpha(alpha)
    if v_d_tok_s <= 0:
        raise DomainError(f"v_d_tok_s must be > 0, got {v_d_tok_s}")
    if t_verify_s <= 0:
        raise DomainError(f"t_verify_s must be > 0, got {t_verify_s}")
    return (k * alpha + 1.0) / (k / v_d_tok_s + t_verify_s)


def cost_efficiency(alpha: float, k: int, price_per_mtok: float) -> float:
    """Accepted tokens per verifier dollar: (alpha + 1/k) / unit price.

    Independent of device speed, power, and verification latency; a zero
    price is rejected rather than reported as infinite efficiency.
    """
    _check_k(k)
    _check_alpha(alpha)
    if price_per_mtok == 0:
        raise UndefinedCostError("undefined cost efficiency: verifier price is zero")
    if price_per_mtok < 0:
        raise DomainError(f"price_per_mtok must be >= 0, got {price_per_mtok}")
    return (alpha + 1.0 / k) / (price_per_mtok * 1e-6)


def energy_per_token(power_w: float | None, v_d_tok_s: float, alpha: float, k: int) -> float:
    """Drafting joules per accepted token: power * (k/v_d) / (k*alpha + 1)."""
    if power_w is None:
        raise NoPowerDataError("no power data")
    _check_k(k)
    _check_alpha(alpha)
    if power_w <= 0:
        raise DomainError(f"power_w must be > 0, got {power_w}")
    if v_d_tok_s <= 0:
        raise DomainError(f"v_d_tok_s must be > 0, got {v_d_tok_s}")
    return power_w * (k / v_d_tok_s) / (k * alpha + 1.0)


def evaluate_config(store: ProfileStore, triple: ConfigTriple) -> MetricsTriple:
    """Evaluate all three metrics for one configuration against a store.

    Acceptance comes from the tabulated curve for (model, quant, target);
    energy is absent exactly when the variant carries no power reading.
    """
    _check_k(triple.k)
    variant = lookup_variant(store, triple.model_id, triple.quant_id, triple.device_id)
    verifier = store.verifier(triple.target_id)
    curve = store.acceptance_curve(triple.model_id, triple.quant_id, triple.target_id)
    alpha = alpha_tabulated(curve, triple.k)
    energy = (
        energy_per_token(variant.power_w, variant.v_d_tok_s, alpha, triple.k)
        if variant.power_w is not None
        else None
    )
    return MetricsTriple(
        goodput_tok_s=goodput(variant.v_d_tok_s, alpha, triple.k, verifier.t_verify_s),
        cost_eff_tok_per_dollar=cost_efficiency(alpha, triple.k, verifier.price_per_mtok),
        energy_j_per_tok=energy,
    )


def analytical_triple(
    alpha: float,
    k: int,
    v_d_tok_s: float,
    t_verify_s: float,
    price_per_mtok: float | None = None,
    power_w: float | None = None,
) -> MetricsTriple:
    """Evaluate the round model from bare parameters instead of a store."""
    cost = cost_efficiency(alpha, k, price_per_mtok) if price_per_mtok is not None else None
    return MetricsTriple(
        goodput_tok_s=goodput(v_d_tok_s, alpha, k, t_verify_s),
        cost_eff_tok_per_dollar=cost,
        energy_j_per_tok=(
            energy_per_token(power_w, v_d_tok_s, alpha, k) if power_w is not None else None
        ),
    )
