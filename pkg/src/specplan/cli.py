"""Command-line interface.

Data goes to stdout, diagnostics to stderr, so outputs pipe cleanly into
plotting tools. Exit codes: 0 success, 1 infeasible objective or validation
failure, 2 usage error (including unknown ids and out-of-domain values),
3 I/O or parse error. Identical invocations over identical inputs produce
byte-identical stdout.
"""

from __future__ import annotations

import argparse
import os
import sys

from .acceptance import GeometricCurve, alpha_geometric
from .errors import (
    DomainError,
    DuplicateKeyError,
    InfeasibleObjectiveError,
    IntegrityError,
    MalformedRowError,
    MissingInputError,
    NotFoundError,
    SpecPlanError,
)
from .metrics import ConfigTriple, analytical_triple, evaluate_config
from .planner import (
    DEFAULT_K_RANGE,
    Objective,
    ParetoPoint,
    build_report,
    enumerate_configs,
    iso_power_samples,
    pareto_front,
    select_best,
)
from .profiles import load_profiles, parse_profile_dir, validate
from .render import align_columns, format_number, tsv_lines
from .simulator import SimParams, compare_to_analytical, deltas_to_tsv, simulate_session

PROFILE_DIR_ENV = "SPECPLAN_PROFILE_DIR"
DEFAULT_T_VERIFY_S = 0.5

_SWEEP_COLUMNS = (
    "target",
    "device",
    "model_id",
    "quant_id",
    "k",
    "goodput_tok_s",
    "cost_eff_tok_per_dollar",
    "energy_j_per_tok",
)

_PARETO_COLUMNS = (
    "series",
    "model_id",
    "quant_id",
    "device_id",
    "k",
    "goodput_tok_s",
    "energy_j_per_tok",
)


def _err(message: str) -> None:
    print(f"specplan: {message}", file=sys.stderr)


def _profile_dir(args: argparse.Namespace) -> str:
    if args.dir:
        return args.dir
    from_env = os.environ.get(PROFILE_DIR_ENV)
    if from_env:
        return from_env
    raise DomainError(
        f"no profile directory given and {PROFILE_DIR_ENV} is not set"
    )


def _parse_k_range(args: argparse.Namespace) -> tuple[int, int]:
    return (args.k_min, args.k_max)


def _comma_list(text: str) -> list[str]:
    items = [item for item in text.split(",") if item]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _comma_floats(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers") from None


def _cmd_validate(args: argparse.Namespace) -> int:
    store = parse_profile_dir(_profile_dir(args))
    violations = validate(store)
    for violation in violations:
        print(str(violation))
    return 1 if violations else 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    store = load_profiles(_profile_dir(args))
    triple = ConfigTriple(args.model, args.quant, args.k, args.device, args.target)
    metrics = evaluate_config(store, triple)
    energy = "" if metrics.energy_j_per_tok is None else format_number(metrics.energy_j_per_tok)
    if args.format == "tsv":
        rows = [
            list(_SWEEP_COLUMNS),
            [
                args.target,
                args.device,
                args.model,
                args.quant,
                str(args.k),
                format_number(metrics.goodput_tok_s),
                format_number(metrics.cost_eff_tok_per_dollar),
                energy,
            ],
        ]
        sys.stdout.write(tsv_lines(rows))
    else:
        print(f"goodput_tok_s = {format_number(metrics.goodput_tok_s)}")
        print(f"cost_eff_tok_per_dollar = {format_number(metrics.cost_eff_tok_per_dollar)}")
        print(f"energy_j_per_tok = {energy or '-'}")
    return 0


def _sweep_rows(configs) -> list[list[str]]:
    rows = []
    for config in configs:
        triple, metrics = config.triple, config.metrics
        energy = (
            "" if metrics.energy_j_per_tok is None else format_number(metrics.energy_j_per_tok)
        )
        rows.append(
            [
                triple.target_id,
                triple.device_id,
                triple.model_id,
                triple.quant_id,
                str(triple.k),
                format_number(metrics.goodput_tok_s),
                format_number(metrics.cost_eff_tok_per_dollar),
                energy,
            ]
        )
    return rows


def _cmd_sweep(args: argparse.Namespace) -> int:
    store = load_profiles(_profile_dir(args))
    configs = enumerate_configs(store, args.target, args.device, _parse_k_range(args))
    rows = [list(_SWEEP_COLUMNS)] + _sweep_rows(configs)
    if args.format == "text":
        sys.stdout.write(align_columns(rows))
    else:
        sys.stdout.write(tsv_lines(rows))
    return 0


def _cmd_select(args: argparse.Namespace) -> int:
    store = load_profiles(_profile_dir(args))
    configs = enumerate_configs(store, args.target, args.device, _parse_k_range(args))
    if not configs:
        _err(f"no configurations for target '{args.target}' on device '{args.device}'")
        return 1
    recommendation = select_best(configs, Objective(args.objective))
    if recommendation.skipped_no_power:
        _err(f"skipped {recommendation.skipped_no_power} configurations without power data")
    shown = recommendation.ranked if args.ranked else (recommendation.winner,)
    if args.format == "tsv":
        sys.stdout.write(tsv_lines([list(_SWEEP_COLUMNS)] + _sweep_rows(shown)))
        return 0
    for config in shown:
        triple, metrics = config.triple, config.metrics
        energy = (
            "-" if metrics.energy_j_per_tok is None else f"{metrics.energy_j_per_tok:.2f}"
        )
        print(
            f"{triple.model_id} {triple.quant_id} k={triple.k} "
            f"G={metrics.goodput_tok_s:.2f} "
            f"eta_ktok_per_usd={format_number(metrics.cost_eff_tok_per_dollar / 1e3, 6)} "
            f"E={energy}"
        )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    store = load_profiles(_profile_dir(args))
    report = build_report(store, args.targets, args.devices, _parse_k_range(args))
    sys.stdout.write(report.to_tsv() if args.format == "tsv" else report.to_text())
    return 0


def _cmd_pareto(args: argparse.Namespace) -> int:
    store = load_profiles(_profile_dir(args))
    configs = []
    for device_id in args.devices:
        configs.extend(enumerate_configs(store, args.target, device_id, _parse_k_range(args)))
    points = [
        ParetoPoint.from_config(c) for c in configs if c.metrics.energy_j_per_tok is not None
    ]
    skipped = len(configs) - len(points)
    if skipped:
        _err(f"skipped {skipped} configurations without power data")
    if not points:
        _err("objective infeasible: no power data")
        return 1
    front = {id(point.config) for point in pareto_front(points)}
    rows = [list(_PARETO_COLUMNS)]
    for point in points:
        triple = point.config.triple
        rows.append(
            [
                "pareto" if id(point.config) in front else "dominated",
                triple.model_id,
                triple.quant_id,
                triple.device_id,
                str(triple.k),
                format_number(point.goodput_tok_s),
                format_number(point.energy_j_per_tok),
            ]
        )
    if args.iso_power:
        g_lo = min(point.goodput_tok_s for point in points)
        g_hi = max(point.goodput_tok_s for point in points)
        for power in args.iso_power:
            for g, e in iso_power_samples(power, (g_lo, g_hi), args.iso_samples):
                rows.append(
                    [
                        f"iso-{format_number(power, 6)}w",
                        "",
                        "",
                        "",
                        "",
                        format_number(g),
                        format_number(e),
                    ]
                )
    if args.format == "text":
        sys.stdout.write(align_columns(rows))
    else:
        sys.stdout.write(tsv_lines(rows))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = SimParams(
        k=args.k,
        accept_prob=args.beta,
        v_d_tok_s=args.v_d,
        t_verify_s=args.t_verify,
        n_rounds=args.rounds,
        seed=args.seed,
        power_w=args.power,
        price_per_mtok=args.price,
    )
    empirical = simulate_session(params)
    if args.compare:
        curve = GeometricCurve(args.beta)
        analytical = analytical_triple(
            alpha=alpha_geometric(curve, args.k),
            k=args.k,
            v_d_tok_s=args.v_d,
            t_verify_s=args.t_verify,
            price_per_mtok=args.price,
            power_w=args.power,
        )
        deltas = compare_to_analytical(empirical, analytical, tolerance=args.tolerance)
        sys.stdout.write(deltas_to_tsv(deltas, empirical.n_rounds, empirical.seed))
        for delta in deltas:
            if delta.exceeds_tolerance:
                _err(
                    f"{delta.metric} deviates {delta.rel_error:.3%} "
                    f"(> {args.tolerance:.3%} tolerance)"
                )
        return 0
    print(f"n_rounds = {empirical.n_rounds}")
    print(f"seed = {empirical.seed}")
    print(f"generator = {empirical.generator}")
    print(f"accept_model = {empirical.accept_model}")
    print(f"mean_accepted_draft = {format_number(empirical.mean_accepted_draft, 12)}")
    print(f"se_accepted_draft = {format_number(empirical.se_accepted_draft, 6)}")
    print(f"goodput_tok_s = {format_number(empirical.goodput_tok_s, 12)}")
    if empirical.cost_eff_tok_per_dollar is not None:
        print(
            f"cost_eff_tok_per_dollar = {format_number(empirical.cost_eff_tok_per_dollar, 12)}"
        )
    if empirical.energy_j_per_tok is not None:
        print(f"energy_j_per_tok = {format_number(empirical.energy_j_per_tok, 12)}")
    return 0


def _add_profile_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "dir",
        nargs="?",
        default=None,
        help=f"profile directory (default: ${PROFILE_DIR_ENV})",
    )


def _add_k_range(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k-min", type=int, default=DEFAULT_K_RANGE[0])
    parser.add_argument("--k-max", type=int, default=DEFAULT_K_RANGE[1])


def _add_format(parser: argparse.ArgumentParser, default: str = "text") -> None:
    parser.add_argument("--format", choices=("text", "tsv"), default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specplan",
        description=(
            "Plan speculative-serving configurations from measured device, "
            "draft-variant, and verifier profiles."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a profile directory against all invariants")
    _add_profile_arg(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("evaluate", help="evaluate one configuration")
    _add_profile_arg(p)
    p.add_argument("--target", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--quant", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="evaluate the whole configuration grid")
    _add_profile_arg(p)
    p.add_argument("--target", required=True)
    p.add_argument("--device", required=True)
    _add_k_range(p)
    _add_format(p, default="tsv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("select", help="pick the best configuration for an objective")
    _add_profile_arg(p)
    p.add_argument("--target", required=True)
    p.add_argument("--device", required=True)
    p.add_argument(
        "--objective", required=True, choices=[objective.value for objective in Objective]
    )
    p.add_argument("--ranked", action="store_true", help="print the full ranking")
    _add_k_range(p)
    _add_format(p)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("report", help="per-objective winners for every target/device")
    _add_profile_arg(p)
    p.add_argument("--targets", type=_comma_list, default=None)
    p.add_argument("--devices", type=_comma_list, default=None)
    _add_k_range(p)
    _add_format(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("pareto", help="speed-energy Pareto front and iso-power curves")
    _add_profile_arg(p)
    p.add_argument("--target", required=True)
    p.add_argument("--devices", type=_comma_list, required=True)
    p.add_argument("--iso-power", type=_comma_floats, default=None, help="watt levels, comma-separated")
    p.add_argument("--iso-samples", type=int, default=50)
    _add_k_range(p)
    _add_format(p, default="tsv")
    p.set_defaults(func=_cmd_pareto)

    p = sub.add_parser("simulate", help="Monte Carlo session over speculative rounds")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta", type=float, required=True, help="per-token acceptance probability")
    p.add_argument("--v-d", type=float, required=True, help="drafting speed, tokens/s")
    p.add_argument("--t-verify", type=float, default=DEFAULT_T_VERIFY_S)
    p.add_argument("--power", type=float, default=None, help="drafting power draw, watts")
    p.add_argument("--price", type=float, default=None, help="verifier price, $ per 1M tokens")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--compare", action="store_true", help="compare against the analytical model")
    p.add_argument("--tolerance", type=float, default=0.01)
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (MissingInputError, MalformedRowError) as exc:
        _err(str(exc))
        return 3
    except OSError as exc:
        _err(str(exc))
        return 3
    except (IntegrityError, DuplicateKeyError, InfeasibleObjectiveError) as exc:
        _err(str(exc))
        return 1
    except (NotFoundError, DomainError) as exc:
        _err(str(exc))
        return 2
    except ValueError as exc:
        _err(str(exc))
        return 2
    except SpecPlanError as exc:  # any remaining package error is a data problem
        _err(str(exc))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
