"""Command-line front end: synth, fit, plan, simulate, sweep, compare.

Every command resolves its inputs, writes delimited outputs (plus JSON with
--json and PNG figures with --figures), and emits a run manifest with
sha256 digests so reruns can be checked byte-for-byte. Errors go to stderr
with a nonzero exit status; data goes to files and stdout only.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .demand import (
    DemandModelError,
    RlsState,
    fit_batch,
    load_model,
    load_observations,
    rls_update,
    save_model,
    to_model,
)
from .planner import (
    GridConfig,
    PlannerError,
    dp_plan,
    greedy_plan,
    plan_to_dict,
    value_function,
    write_plan_csv,
    write_value_table_csv,
)
from .qp import QpError
from .scenario import (
    ScenarioError,
    load_params,
    load_scenario,
    save_series,
    synth_scenario,
)
from .simulate import (
    TrueMarket,
    compare_policies,
    report_to_dict,
    run_closed_loop,
    sweep,
    write_report_csv,
    write_sweep_csv,
)

_ERRORS = (ScenarioError, DemandModelError, PlannerError, QpError, ValueError, OSError)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_manifest(prefix: Path, command: str, inputs: dict, parameters: dict, outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "inputs": {k: str(Path(v).resolve()) for k, v in inputs.items() if v is not None},
        "parameters": parameters,
        "outputs": {p.name: _sha256(p) for p in sorted(outputs)},
    }
    path = prefix.parent / f"{prefix.name}_manifest.json"
    _write_json(manifest, path)
    return path


def _prefix(raw: str) -> Path:
    prefix = Path(raw)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    return prefix


def _resolve_params(args, scenario=None):
    params = load_params(args.params)
    if getattr(args, "terminal_salvage", None) is not None:
        import dataclasses

        if args.terminal_salvage == "mean":
            if scenario is None:
                raise ScenarioError("--terminal-salvage mean needs a scenario")
            value = float(np.mean(scenario.wholesale_prices))
        else:
            value = float(args.terminal_salvage)
        params = dataclasses.replace(params, terminal_salvage=value)
    return params


def _initial_storage(args, params) -> float:
    if args.initial_storage is None:
        return params.capacity / 2.0
    return float(args.initial_storage)


def _values_list(raw: str) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ScenarioError(f"bad --values list {raw!r}") from exc


def _add_scenario_args(sub, with_model=True):
    sub.add_argument("--prices", required=True, help="wholesale price CSV (hour,value)")
    sub.add_argument("--renewable", required=True, help="renewable CSV (hour,value)")
    sub.add_argument("--params", required=True, help="economic parameter file")
    if with_model:
        sub.add_argument("--model", required=True, help="elasticity model JSON")
    sub.add_argument("--initial-storage", default=None, help="MWh at hour 1 (default capacity/2)")
    sub.add_argument("--terminal-salvage", default=None,
                     help="override terminal salvage; a number or 'mean' for the mean wholesale price")
    sub.add_argument("--figures", default=None, help="directory for rendered PNG figures")
    sub.add_argument("--json", action="store_true", help="also write the structured JSON document")


def _cmd_synth(args) -> int:
    scenario = synth_scenario(args.seed, args.horizons, args.profile)
    prefix = _prefix(args.out)
    p_path = prefix.parent / f"{prefix.name}_prices.csv"
    r_path = prefix.parent / f"{prefix.name}_renewable.csv"
    save_series(scenario.wholesale_prices, p_path)
    save_series(scenario.renewable, r_path)
    outputs = [p_path, r_path]
    if args.figures:
        from .figures import plot_scenario

        outputs.append(plot_scenario(scenario, Path(args.figures) / f"{prefix.name}_scenario.png"))
    _write_manifest(prefix, "synth", {}, {
        "seed": args.seed, "horizons": args.horizons, "profile": args.profile,
    }, outputs)
    print(f"wrote {p_path} and {r_path}")
    return 0


def _cmd_fit(args) -> int:
    history = load_observations(args.observations, args.stations)
    if not history:
        raise DemandModelError("observation file holds no horizons")
    prefix = _prefix(args.out)
    l = args.stations
    errors = np.zeros((len(history), l))
    if args.batch:
        weights = np.array([fit_batch(history, j, ridge=args.ridge) for j in range(l)])
        state = RlsState(weights, np.stack([np.eye(l + 1)] * l), 1.0)
        for k, obs in enumerate(history):
            reg = np.concatenate(([1.0], obs.prices))
            errors[k] = obs.demands - weights @ reg
    else:
        state = RlsState.initialize(l, forgetting=args.forgetting, h0_scale=args.h0_scale)
        for k, obs in enumerate(history):
            reg = np.concatenate(([1.0], obs.prices))
            errors[k] = obs.demands - state.weights @ reg
            for j in range(l):
                rls_update(state, j, reg, float(obs.demands[j]))
    model, clamped = to_model(state)
    m_path = prefix.parent / f"{prefix.name}_model.json"
    save_model(model, m_path)
    e_path = prefix.parent / f"{prefix.name}_errors.csv"
    with e_path.open("w") as fh:
        fh.write("horizon," + ",".join(f"err_{j}" for j in range(1, l + 1)) + "\n")
        for k in range(len(history)):
            fh.write(f"{k + 1}," + ",".join(repr(float(e)) for e in errors[k]) + "\n")
    _write_manifest(prefix, "fit", {"observations": args.observations}, {
        "stations": l, "forgetting": args.forgetting, "batch": bool(args.batch),
        "ridge": args.ridge, "h0_scale": args.h0_scale, "clamped": clamped,
    }, [m_path, e_path])
    print(f"wrote {m_path} ({'clamped' if clamped else 'no clamps'})")
    return 0


def _cmd_plan(args) -> int:
    model = load_model(args.model)
    scenario = load_scenario(args.prices, args.renewable, load_params(args.params))
    params = _resolve_params(args, scenario)
    store = _initial_storage(args, params)
    prefix = _prefix(args.out)
    outputs = []
    if args.policy == "dp":
        plan = dp_plan(scenario, model, params, store, GridConfig(args.grid))
        if args.value_table:
            table = value_function(scenario, model, params, GridConfig(args.grid))
            v_path = prefix.parent / f"{prefix.name}_values.csv"
            write_value_table_csv(table, v_path)
            outputs.append(v_path)
    else:
        plan = greedy_plan(scenario, model, params, store)
    c_path = prefix.parent / f"{prefix.name}_plan.csv"
    write_plan_csv(plan, scenario, c_path)
    outputs.append(c_path)
    if args.json:
        j_path = prefix.parent / f"{prefix.name}_plan.json"
        _write_json(plan_to_dict(plan, scenario), j_path)
        outputs.append(j_path)
    if args.figures:
        from .figures import plot_plan

        outputs.append(plot_plan(plan, scenario, Path(args.figures) / f"{prefix.name}_plan.png"))
    total_sat = float(sum(b.satisfaction for b in plan.breakdowns))
    _write_manifest(prefix, "plan", {
        "prices": args.prices, "renewable": args.renewable,
        "params": args.params, "model": args.model,
    }, {
        "policy": args.policy, "grid": args.grid, "initial_storage": store,
        "terminal_salvage": params.terminal_salvage,
    }, outputs)
    print(
        f"total_utility={plan.total_utility!r} total_profit={plan.total_profit!r} "
        f"total_satisfaction={total_sat!r}"
    )
    return 0


def _true_market(args, fallback_model) -> TrueMarket:
    true_model = load_model(args.true_model) if args.true_model else fallback_model
    return TrueMarket(true_model, args.noise_std, args.seed)


def _cmd_simulate(args) -> int:
    model = load_model(args.model)
    scenario = load_scenario(args.prices, args.renewable, load_params(args.params))
    params = _resolve_params(args, scenario)
    store = _initial_storage(args, params)
    market = _true_market(args, model)
    report = run_closed_loop(
        scenario, market, model, params,
        policy=args.policy, grid=GridConfig(args.grid), initial_storage=store,
        forgetting=args.forgetting, h0_scale=args.h0_scale, open_loop=args.open_loop,
    )
    prefix = _prefix(args.out)
    c_path = prefix.parent / f"{prefix.name}_report.csv"
    write_report_csv(report, scenario, c_path)
    outputs = [c_path]
    if args.json:
        j_path = prefix.parent / f"{prefix.name}_report.json"
        _write_json(report_to_dict(report, scenario), j_path)
        outputs.append(j_path)
    if args.figures:
        from .figures import plot_report

        outputs.append(plot_report(report, scenario, Path(args.figures) / f"{prefix.name}_report.png"))
    _write_manifest(prefix, "simulate", {
        "prices": args.prices, "renewable": args.renewable, "params": args.params,
        "model": args.model, "true_model": args.true_model,
    }, {
        "policy": args.policy, "grid": args.grid, "seed": args.seed,
        "noise_std": args.noise_std, "initial_storage": store,
        "forgetting": args.forgetting, "h0_scale": args.h0_scale,
        "open_loop": bool(args.open_loop),
    }, outputs)
    print(
        f"total_utility={report.total_utility!r} total_profit={report.total_profit!r} "
        f"caps={len(report.cap_events)} spills={len(report.spill_events)}"
    )
    return 0


def _cmd_sweep(args) -> int:
    model = load_model(args.model)
    scenario = load_scenario(args.prices, args.renewable, load_params(args.params))
    params = _resolve_params(args, scenario)
    store = _initial_storage(args, params)
    market = _true_market(args, model) if args.mode == "closed_loop" else None
    result = sweep(
        scenario, model, params, args.param, _values_list(args.values),
        mode=args.mode, policy=args.policy, grid=GridConfig(args.grid),
        true_market=market, initial_storage=store, keep_runs=bool(args.figures),
    )
    prefix = _prefix(args.out)
    s_path = prefix.parent / f"{prefix.name}_sweep.csv"
    write_sweep_csv(result, s_path)
    outputs = [s_path]
    if args.figures:
        from .figures import plot_sweep, plot_sweep_prices, plot_sweep_purchases

        fig_dir = Path(args.figures)
        outputs.append(plot_sweep(result, fig_dir / f"{prefix.name}_tradeoff.png"))
        outputs.append(plot_sweep_purchases(result, scenario, fig_dir / f"{prefix.name}_purchases.png"))
        outputs.append(plot_sweep_prices(result, scenario, fig_dir / f"{prefix.name}_prices.png"))
    _write_manifest(prefix, "sweep", {
        "prices": args.prices, "renewable": args.renewable, "params": args.params,
        "model": args.model, "true_model": args.true_model,
    }, {
        "param": args.param, "values": _values_list(args.values), "mode": args.mode,
        "policy": args.policy, "grid": args.grid, "seed": args.seed,
        "noise_std": args.noise_std, "initial_storage": store,
    }, outputs)
    print(f"wrote {s_path} ({len(result.rows)} rows)")
    return 0


def _cmd_compare(args) -> int:
    model = load_model(args.model)
    scenario = load_scenario(args.prices, args.renewable, load_params(args.params))
    params = _resolve_params(args, scenario)
    store = _initial_storage(args, params)
    market = _true_market(args, model)
    cmp = compare_policies(
        scenario, market, model, params,
        grid=GridConfig(args.grid), initial_storage=store,
        forgetting=args.forgetting, h0_scale=args.h0_scale,
    )
    prefix = _prefix(args.out)
    outputs = []
    for rep in cmp.reports:
        path = prefix.parent / f"{prefix.name}_{rep.policy}.csv"
        write_report_csv(rep, scenario, path)
        outputs.append(path)
    summary = {
        "policies": list(cmp.policies),
        "profits": [rep.total_profit for rep in cmp.reports],
        "total_utilities": [rep.total_utility for rep in cmp.reports],
        "profit_increase_percent": cmp.profit_increase_percent,
        "absolute_difference": cmp.absolute_difference,
        "degenerate_base": cmp.degenerate_base,
    }
    j_path = prefix.parent / f"{prefix.name}_compare.json"
    _write_json(summary, j_path)
    outputs.append(j_path)
    if args.figures:
        from .figures import plot_comparison

        outputs.append(plot_comparison(cmp, scenario, Path(args.figures) / f"{prefix.name}_compare.png"))
    _write_manifest(prefix, "compare", {
        "prices": args.prices, "renewable": args.renewable, "params": args.params,
        "model": args.model, "true_model": args.true_model,
    }, {
        "grid": args.grid, "seed": args.seed, "noise_std": args.noise_std,
        "initial_storage": store, "forgetting": args.forgetting,
        "h0_scale": args.h0_scale,
    }, outputs)
    if cmp.profit_increase_percent is None:
        print(f"profit_difference={cmp.absolute_difference!r} (base profit ~ 0, flagged)")
    else:
        print(f"profit_increase_percent={cmp.profit_increase_percent!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chargeopt",
        description="Dynamic pricing and energy management for EV charging networks",
    )
    parser.add_argument("--version", action="version", version=f"chargeopt {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="write a synthetic scenario to CSV files")
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--horizons", type=int, default=24)
    synth.add_argument("--profile", choices=["flat", "diurnal"], default="diurnal")
    synth.add_argument("--figures", default=None)
    synth.add_argument("--out", required=True, help="output prefix")
    synth.set_defaults(func=_cmd_synth)

    fit = subs.add_parser("fit", help="estimate the elasticity model from observations")
    fit.add_argument("--observations", required=True)
    fit.add_argument("--stations", type=int, required=True)
    fit.add_argument("--forgetting", type=float, default=1.0)
    fit.add_argument("--batch", action="store_true", help="batch least squares instead of RLS")
    fit.add_argument("--ridge", type=float, default=0.0)
    fit.add_argument("--h0-scale", type=float, default=1e8, dest="h0_scale",
                     help="initial gain scale for RLS (large = weak prior)")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=_cmd_fit)

    plan = subs.add_parser("plan", help="compute a day-ahead schedule")
    _add_scenario_args(plan)
    plan.add_argument("--policy", choices=["greedy", "dp"], default="dp")
    plan.add_argument("--grid", type=int, default=201, help="storage grid points for dp")
    plan.add_argument("--value-table", action="store_true", help="also export the dp value table")
    plan.add_argument("--out", required=True)
    plan.set_defaults(func=_cmd_plan)

    sim = subs.add_parser("simulate", help="closed-loop run against a true market")
    _add_scenario_args(sim)
    sim.add_argument("--true-model", default=None, help="ground-truth model JSON (default: --model)")
    sim.add_argument("--noise-std", type=float, default=0.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--policy", choices=["greedy", "dp"], default="greedy")
    sim.add_argument("--grid", type=int, default=51)
    sim.add_argument("--forgetting", type=float, default=0.98)
    sim.add_argument("--h0-scale", type=float, default=1.0, dest="h0_scale",
                     help="initial RLS gain scale; small values trust the starting model")
    sim.add_argument("--open-loop", action="store_true", help="execute the hour-1 dp plan without re-planning")
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    swp = subs.add_parser("sweep", help="rerun planning or simulation across parameter values")
    _add_scenario_args(swp)
    swp.add_argument("--param", choices=["beta", "eta"], required=True)
    swp.add_argument("--values", required=True, help="comma-separated values")
    swp.add_argument("--mode", choices=["plan", "closed_loop"], default="plan")
    swp.add_argument("--policy", choices=["greedy", "dp"], default="dp")
    swp.add_argument("--grid", type=int, default=201)
    swp.add_argument("--true-model", default=None)
    swp.add_argument("--noise-std", type=float, default=0.0)
    swp.add_argument("--seed", type=int, default=0)
    swp.add_argument("--out", required=True)
    swp.set_defaults(func=_cmd_sweep)

    cmp = subs.add_parser("compare", help="greedy vs dp on identical seeds")
    _add_scenario_args(cmp)
    cmp.add_argument("--true-model", default=None)
    cmp.add_argument("--noise-std", type=float, default=0.0)
    cmp.add_argument("--seed", type=int, default=0)
    cmp.add_argument("--grid", type=int, default=51)
    cmp.add_argument("--forgetting", type=float, default=0.98)
    cmp.add_argument("--h0-scale", type=float, default=1.0, dest="h0_scale",
                     help="initial RLS gain scale; small values trust the starting model")
    cmp.add_argument("--out", required=True)
    cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"chargeopt {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
