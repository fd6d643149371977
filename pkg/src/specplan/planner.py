"""Joint configuration search: enumeration, selection, Pareto fronts, reports.

Enumeration walks every (draft variant on device) x (speculative length)
combination that has an acceptance curve for the target, in a fixed
canonical order (model_id, quant_id, k ascending). Selection compares plain
float metric values exactly and breaks ties deterministically: smaller k,
then lexicographic model_id, then quant_id. Results are therefore
independent of evaluation order, so the grid may be evaluated in parallel
and merged back into canonical order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, InfeasibleObjectiveError
from .metrics import ConfigTriple, MetricsTriple, evaluate_config
from .profiles import ProfileStore
from .render import align_columns, format_number, tsv_lines

DEFAULT_K_RANGE = (2, 10)

NO_POWER_NOTE = "no power data"
NO_CONFIG_NOTE = "no configurations"


class Objective(enum.Enum):
    MAX_GOODPUT = "goodput"
    MIN_COST_PER_TOKEN = "cost"
    MIN_ENERGY_PER_TOKEN = "energy"


OBJECTIVE_ORDER = (
    Objective.MAX_GOODPUT,
    Objective.MIN_COST_PER_TOKEN,
    Objective.MIN_ENERGY_PER_TOKEN,
)


@dataclass(frozen=True)
class EvaluatedConfig:
    triple: ConfigTriple
    metrics: MetricsTriple


@dataclass(frozen=True)
class Recommendation:
    objective: Objective
    winner: EvaluatedConfig
    ranked: tuple[EvaluatedConfig, ...]
    skipped_no_power: int = 0


@dataclass(frozen=True)
class ParetoPoint:
    """A configuration projected onto the (goodput, energy) plane."""

    goodput_tok_s: float
    energy_j_per_tok: float
    config: EvaluatedConfig | None = None

    @classmethod
    def from_config(cls, config: EvaluatedConfig) -> "ParetoPoint":
        if config.metrics.energy_j_per_tok is None:
            raise DomainError("pareto point requires energy; variant has no power data")
        return cls(config.metrics.goodput_tok_s, config.metrics.energy_j_per_tok, config)


def enumerate_configs(
    store: ProfileStore,
    target_id: str,
    device_id: str,
    k_range: tuple[int, int] = DEFAULT_K_RANGE,
) -> list[EvaluatedConfig]:
    """Evaluate every feasible configuration on one (target, device) pair.

    A variant is feasible when an acceptance curve exists for its
    (model, quant) against the target; an empty result is not an error.
    """
    k_lo, k_hi = k_range
    if k_lo < 1 or k_hi < k_lo:
        raise DomainError(f"invalid k range [{k_lo}, {k_hi}]")
    store.verifier(target_id)
    store.device(device_id)
    results: list[EvaluatedConfig] = []
    for variant in store.variants_on_device(device_id):
        if not store.has_acceptance_curve(variant.model_id, variant.quant_id, target_id):
            continue
        for k in range(k_lo, k_hi + 1):
            triple = ConfigTriple(variant.model_id, variant.quant_id, k, device_id, target_id)
            results.append(EvaluatedConfig(triple, evaluate_config(store, triple)))
    return results


def _tie_break(config: EvaluatedConfig) -> tuple[int, str, str]:
    triple = config.triple
    return (triple.k, triple.model_id, triple.quant_id)


def _rank_key(config: EvaluatedConfig, objective: Objective):
    metrics = config.metrics
    if objective is Objective.MAX_GOODPUT:
        return (-metrics.goodput_tok_s, *_tie_break(config))
    if objective is Objective.MIN_COST_PER_TOKEN:
        return (-metrics.cost_eff_tok_per_dollar, *_tie_break(config))
    return (metrics.energy_j_per_tok, *_tie_break(config))


def select_best(configs: list[EvaluatedConfig], objective: Objective) -> Recommendation:
    """Pick the objective-optimal configuration from an evaluated list.

    Candidates without energy are skipped (with a count) for the energy
    objective; if none remain the objective is infeasible.
    """
    if not configs:
        raise DomainError("select_best requires a non-empty config list")
    skipped = 0
    candidates = configs
    if objective is Objective.MIN_ENERGY_PER_TOKEN:
        candidates = [c for c in configs if c.metrics.energy_j_per_tok is not None]
        skipped = len(configs) - len(candidates)
        if not candidates:
            raise InfeasibleObjectiveError("objective infeasible: no power data")
    ranked = tuple(sorted(candidates, key=lambda c: _rank_key(c, objective)))
    return Recommendation(objective, ranked[0], ranked, skipped)


def pareto_front(points: list[ParetoPoint]) -> list[ParetoPoint]:
    """Return exactly the points not dominated in (higher goodput, lower energy).

    A dominator has goodput >= and energy <= with at least one strict;
    duplicate metric pairs are all retained. Output is sorted by ascending
    goodput. Runs in O(n log n) via a sweep over goodput groups.
    """
    for point in points:
        if point.energy_j_per_tok is None or not math.isfinite(point.energy_j_per_tok):
            raise DomainError("pareto points require finite energy")
        if not math.isfinite(point.goodput_tok_s):
            raise DomainError("pareto points require finite goodput")

    order = sorted(
        range(len(points)),
        key=lambda i: (-points[i].goodput_tok_s, points[i].energy_j_per_tok),
    )
    survivors: list[int] = []
    best_energy_before = math.inf  # min energy among strictly faster points
    i = 0
    while i < len(order):
        j = i
        goodput_value = points[order[i]].goodput_tok_s
        while j < len(order) and points[order[j]].goodput_tok_s == goodput_value:
            j += 1
        group = order[i:j]
        group_min = min(points[idx].energy_j_per_tok for idx in group)
        # Dominated by a faster point iff its energy is not strictly better
        # than all of them; dominated within the group iff beaten on energy.
        if group_min < best_energy_before:
            survivors.extend(
                idx for idx in group if points[idx].energy_j_per_tok == group_min
            )
        best_energy_before = min(best_energy_before, group_min)
        i = j

    def output_key(idx: int):
        point = points[idx]
        if point.config is None:
            return (point.goodput_tok_s, point.energy_j_per_tok, "", "", 0, "")
        triple = point.config.triple
        return (
            point.goodput_tok_s,
            point.energy_j_per_tok,
            triple.model_id,
            triple.quant_id,
            triple.k,
            triple.device_id,
        )

    return [points[idx] for idx in sorted(survivors, key=output_key)]


def iso_power_samples(
    power_w: float, g_range: tuple[float, float], n: int
) -> list[tuple[float, float]]:
    """Sample the constant-power locus energy = power / goodput.

    This is the (goodput, energy) curve of a device that draws ``power_w``
    for its entire round; every achievable point of such a device satisfies
    energy * goodput <= power_w, so the curve is an upper envelope.
    """
    g_lo, g_hi = g_range
    if power_w <= 0:
        raise DomainError(f"power_w must be > 0, got {power_w}")
    if g_lo <= 0 or g_hi < g_lo:
        raise DomainError(f"invalid goodput range [{g_lo}, {g_hi}]")
    if n < 2:
        raise DomainError(f"need at least 2 samples, got {n}")
    step = (g_hi - g_lo) / (n - 1)
    samples = []
    for i in range(n):
        g = g_lo + i * step
        samples.append((g, power_w / g))
    return samples


@dataclass(frozen=True)
class ReportCell:
    target_id: str
    device_id: str
    objective: Objective
    winner: EvaluatedConfig | None
    note: str = ""


@dataclass(frozen=True)
class Report:
    """Per-(target, device, objective) winners with all three metric values."""

    cells: tuple[ReportCell, ...]
    k_range: tuple[int, int]

    TSV_COLUMNS = (
        "target",
        "device",
        "objective",
        "model_id",
        "quant_id",
        "k",
        "goodput_tok_s",
        "cost_eff_ktok_per_dollar",
        "energy_j_per_tok",
    )

    def _rows(self, missing: str) -> list[list[str]]:
        rows = []
        for cell in self.cells:
            base = [cell.target_id, cell.device_id, cell.objective.value]
            if cell.winner is None:
                rows.append(base + [cell.note or missing] + [missing] * 5)
                continue
            triple, metrics = cell.winner.triple, cell.winner.metrics
            energy = (
                missing
                if metrics.energy_j_per_tok is None
                else format_number(metrics.energy_j_per_tok, 6)
            )
            rows.append(
                base
                + [
                    triple.model_id,
                    triple.quant_id,
                    str(triple.k),
                    format_number(metrics.goodput_tok_s, 6),
                    format_number(metrics.cost_eff_tok_per_dollar / 1e3, 6),
                    energy,
                ]
            )
        return rows

    def to_text(self) -> str:
        header = [list(self.TSV_COLUMNS)]
        return align_columns(header + self._rows(missing="-"))

    def to_tsv(self) -> str:
        return tsv_lines([list(self.TSV_COLUMNS)] + self._rows(missing=""))


def build_report(
    store: ProfileStore,
    targets: list[str] | None = None,
    devices: list[str] | None = None,
    k_range: tuple[int, int] = DEFAULT_K_RANGE,
) -> Report:
    """Select per-objective winners for each (target, device) pair.

    Infeasible energy cells are marked rather than raised; row order is
    deterministic (target, device, objective) so re-runs are byte-identical.
    """
    target_ids = list(targets) if targets is not None else list(store.target_ids)
    device_ids = list(devices) if devices is not None else list(store.device_ids)
    if not target_ids or not device_ids:
        raise DomainError("report requires at least one target and one device")
    cells: list[ReportCell] = []
    for target_id in target_ids:
        for device_id in device_ids:
            configs = enumerate_configs(store, target_id, device_id, k_range)
            for objective in OBJECTIVE_ORDER:
                if not configs:
                    cells.append(ReportCell(target_id, device_id, objective, None, NO_CONFIG_NOTE))
                    continue
                try:
                    recommendation = select_best(configs, objective)
                except InfeasibleObjectiveError:
                    cells.append(ReportCell(target_id, device_id, objective, None, NO_POWER_NOTE))
                else:
                    cells.append(
                        ReportCell(target_id, device_id, objective, recommendation.winner)
                    )
    return Report(tuple(cells), k_range)
