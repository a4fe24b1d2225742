"""Closed-loop execution: post prices, realize noisy demand, re-estimate, repeat.

Each hour the provider plans with its current demand estimate (greedy stage
solve, or a receding-horizon DP over the remaining hours), posts prices and
buys energy, observes noisy demand drawn from the hidden true model, updates
storage and the recursive estimator, and moves on. Parameter sweeps and the
greedy/DP comparison wrap this loop (or pure planning) per value.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .demand import ElasticityModel, RlsState, predict_demand, rls_update, to_model
from .planner import (
    GridConfig,
    Plan,
    _snap_decision,
    _solve_stage,
    _StageGeometry,
    dp_plan,
    greedy_plan,
)
from .scenario import EconomicParams, MarketScenario
from .utility import Decision, UtilityBreakdown, grid_stress, revenue, satisfaction_raw


@dataclass(frozen=True)
class TrueMarket:
    """Hidden demand process: ground-truth elasticities plus Gaussian noise."""

    true_model: ElasticityModel
    noise_std: float
    seed: int

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


@dataclass(frozen=True, eq=False)
class SimReport:
    """Realized closed-loop outcome of one policy."""

    policy: str
    seed: int
    decisions: tuple[Decision, ...]
    realized_demands: np.ndarray
    prediction_errors: np.ndarray
    storage_trajectory: np.ndarray
    breakdowns: tuple[UtilityBreakdown, ...]
    total_utility: float
    total_profit: float
    total_satisfaction: float
    purchase_variance: float
    price_variance: np.ndarray
    mean_price_variance: float
    rls_weights: np.ndarray
    cap_events: tuple[tuple[int, float], ...]
    spill_events: tuple[tuple[int, float], ...]

    @property
    def purchases(self) -> np.ndarray:
        return np.array([d.purchase for d in self.decisions])


@dataclass(frozen=True)
class SweepRow:
    value: float
    total_profit: float
    total_satisfaction: float
    purchase_variance: float
    mean_price_variance: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    parameter: str
    rows: tuple[SweepRow, ...]
    runs: tuple | None = None


@dataclass(frozen=True, eq=False)
class PolicyComparison:
    reports: tuple[SimReport, SimReport]
    policies: tuple[str, str]
    profit_increase_percent: float | None
    absolute_difference: float
    degenerate_base: bool


def run_closed_loop(
    scenario: MarketScenario,
    true_market: TrueMarket,
    initial_model: ElasticityModel,
    params: EconomicParams,
    policy: str = "greedy",
    grid: GridConfig = GridConfig(),
    initial_storage: float | None = None,
    forgetting: float = 0.98,
    h0_scale: float = 1.0,
    open_loop: bool = False,
) -> SimReport:
    """Run one seeded closed-loop day.

    Realized demand is the true-model prediction plus truncated Gaussian
    noise, scaled down proportionally across stations whenever it would
    drive storage negative (every such event is recorded). Demand shortfall
    that would overfill the store spills; spills are recorded too.
    """
    if policy not in ("greedy", "dp"):
        raise ValueError(f"unknown policy {policy!r}")
    n = scenario.n_horizons
    l = initial_model.n_stations
    if true_market.true_model.n_stations != l:
        raise ValueError("true model and initial model disagree on station count")
    store = params.capacity / 2.0 if initial_storage is None else float(initial_storage)
    if not 0.0 <= store <= params.capacity:
        raise ValueError(f"initial storage {store} outside [0, {params.capacity}]")

    rng = np.random.default_rng(true_market.seed)
    state = RlsState.from_model(initial_model, forgetting=forgetting, h0_scale=h0_scale)
    weights_log = np.zeros((n + 1, l, l + 1))
    weights_log[0] = state.weights

    open_loop_plan: Plan | None = None
    decisions: list[Decision] = []
    realized = np.zeros((l, n))
    pred_errors = np.zeros((l, n))
    storage = np.zeros(n + 1)
    storage[0] = store
    breakdowns: list[UtilityBreakdown] = []
    cap_events: list[tuple[int, float]] = []
    spill_events: list[tuple[int, float]] = []

    for k in range(1, n + 1):
        est_model, _ = to_model(state)
        c_k = float(scenario.wholesale_prices[k - 1])
        u_k = float(scenario.renewable[k - 1])
        if policy == "greedy":
            geom = _StageGeometry(est_model, params)
            x, _, _ = _solve_stage(geom, k, c_k, u_k, store, cuts=None)
            dec = _snap_decision(geom, x)
        elif open_loop:
            if open_loop_plan is None:
                open_loop_plan = dp_plan(scenario, est_model, params, store, grid)
            dec = open_loop_plan.decisions[k - 1]
        else:
            remaining = scenario.slice_from(k)
            sub = dp_plan(remaining, est_model, params, min(max(store, 0.0), params.capacity), grid)
            dec = sub.decisions[0]

        noise = rng.normal(0.0, true_market.noise_std, l)
        demand = np.maximum(predict_demand(true_market.true_model, dec.prices) + noise, 0.0)
        supply = store + u_k + dec.purchase
        total = float(demand.sum())
        if total > supply + 1e-12:
            scale = max(supply, 0.0) / total
            demand = demand * scale
            total = float(demand.sum())
            cap_events.append((k, float(scale)))
        leftover = supply - total
        if leftover < 0.0:
            leftover = 0.0
        if leftover > params.capacity:
            spill_events.append((k, float(leftover - params.capacity)))
            leftover = params.capacity

        rev = revenue(dec.prices, demand, c_k, dec.purchase)
        sat = satisfaction_raw(total, params)
        stress = grid_stress(dec.purchase, params)
        hold = params.eta * leftover
        breakdowns.append(UtilityBreakdown(rev, sat, stress, hold, rev + sat - stress - hold))

        regressor = np.concatenate(([1.0], dec.prices))
        # estimator innovation per station (raw weights, before the update)
        pred_errors[:, k - 1] = demand - state.weights @ regressor
        for j in range(l):
            rls_update(state, j, regressor, float(demand[j]))
        weights_log[k] = state.weights

        decisions.append(dec)
        realized[:, k - 1] = demand
        store = leftover
        storage[k] = store

    purchases = np.array([d.purchase for d in decisions])
    prices = np.array([d.prices for d in decisions]).T  # (L, N)
    price_var = prices.var(axis=1)
    total_utility = float(
        sum(b.total for b in breakdowns) + params.terminal_salvage * storage[n]
    )
    return SimReport(
        policy=policy,
        seed=true_market.seed,
        decisions=tuple(decisions),
        realized_demands=realized,
        prediction_errors=pred_errors,
        storage_trajectory=storage,
        breakdowns=tuple(breakdowns),
        total_utility=total_utility,
        total_profit=float(sum(b.revenue for b in breakdowns)),
        total_satisfaction=float(sum(b.satisfaction for b in breakdowns)),
        purchase_variance=float(purchases.var()),
        price_variance=price_var,
        mean_price_variance=float(price_var.mean()),
        rls_weights=weights_log,
        cap_events=tuple(cap_events),
        spill_events=tuple(spill_events),
    )


def _plan_metrics(plan: Plan) -> tuple[float, float, float, float]:
    purchases = plan.purchases
    price_var = plan.price_matrix.var(axis=1)
    return (
        plan.total_profit,
        float(sum(b.satisfaction for b in plan.breakdowns)),
        float(purchases.var()),
        float(price_var.mean()),
    )


def sweep(
    scenario: MarketScenario,
    model: ElasticityModel,
    params: EconomicParams,
    parameter: str,
    values,
    mode: str = "plan",
    policy: str = "dp",
    grid: GridConfig = GridConfig(),
    true_market: TrueMarket | None = None,
    initial_storage: float | None = None,
    keep_runs: bool = False,
) -> SweepResult:
    """One planning or closed-loop run per parameter value, shared seed.

    `parameter` is "beta" or "eta"; `mode` selects pure planning against
    `model` or the full closed loop against `true_market`.
    """
    if parameter not in ("beta", "eta"):
        raise ValueError(f"sweep parameter must be 'beta' or 'eta', got {parameter!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    if mode not in ("plan", "closed_loop"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    if mode == "closed_loop" and true_market is None:
        raise ValueError("closed_loop sweep requires a true market")
    if policy not in ("greedy", "dp"):
        raise ValueError(f"unknown policy {policy!r}")
    store = params.capacity / 2.0 if initial_storage is None else float(initial_storage)
    rows = []
    runs = []
    for v in values:
        p = dataclasses.replace(params, **{parameter: float(v)})
        if mode == "plan":
            if policy == "dp":
                plan = dp_plan(scenario, model, p, store, grid)
            else:
                plan = greedy_plan(scenario, model, p, store)
            profit, sat, pvar, prvar = _plan_metrics(plan)
            runs.append(plan)
        else:
            report = run_closed_loop(
                scenario, true_market, model, p, policy=policy, grid=grid, initial_storage=store
            )
            profit, sat, pvar, prvar = (
                report.total_profit,
                report.total_satisfaction,
                report.purchase_variance,
                report.mean_price_variance,
            )
            runs.append(report)
        rows.append(SweepRow(float(v), profit, sat, pvar, prvar))
    return SweepResult(parameter, tuple(rows), tuple(runs) if keep_runs else None)


def compare_policies(
    scenario: MarketScenario,
    true_market: TrueMarket,
    initial_model: ElasticityModel,
    params: EconomicParams,
    grid: GridConfig = GridConfig(),
    initial_storage: float | None = None,
    policies: tuple[str, str] = ("greedy", "dp"),
    forgetting: float = 0.98,
    h0_scale: float = 1.0,
) -> PolicyComparison:
    """Paired closed-loop runs on identical seeds plus the profit gain.

    The percentage is 100 * (profit_b - profit_a) / |profit_a|; when the
    base profit is within 1e-9 of zero only the absolute difference is
    reported and the result is flagged.
    """
    reports = tuple(
        run_closed_loop(
            scenario, true_market, initial_model, params,
            policy=pol, grid=grid, initial_storage=initial_storage,
            forgetting=forgetting, h0_scale=h0_scale,
        )
        for pol in policies
    )
    base = reports[0].total_profit
    diff = reports[1].total_profit - base
    degenerate = abs(base) <= 1e-9
    percent = None if degenerate else 100.0 * diff / abs(base)
    return PolicyComparison(reports, policies, percent, float(diff), degenerate)


def report_to_dict(report: SimReport, scenario: MarketScenario) -> dict:
    l = report.realized_demands.shape[0]
    records = []
    for k in range(scenario.n_horizons):
        dec = report.decisions[k]
        bd = report.breakdowns[k]
        records.append(
            {
                "hour": k + 1,
                "wholesale_price": float(scenario.wholesale_prices[k]),
                "renewable": float(scenario.renewable[k]),
                "prices": [float(p) for p in dec.prices],
                "purchase": float(dec.purchase),
                "realized_demand": [float(d) for d in report.realized_demands[:, k]],
                "storage_start": float(report.storage_trajectory[k]),
                "revenue": bd.revenue,
                "satisfaction": bd.satisfaction,
                "grid_stress": bd.grid_stress,
                "storage_cost": bd.storage_cost,
                "total": bd.total,
            }
        )
    return {
        "policy": report.policy,
        "seed": report.seed,
        "n_stations": l,
        "horizons": records,
        "storage_end": float(report.storage_trajectory[-1]),
        "total_utility": report.total_utility,
        "total_profit": report.total_profit,
        "total_satisfaction": report.total_satisfaction,
        "purchase_variance": report.purchase_variance,
        "price_variance": [float(v) for v in report.price_variance],
        "mean_price_variance": report.mean_price_variance,
        "cap_events": [[h, s] for h, s in report.cap_events],
        "spill_events": [[h, s] for h, s in report.spill_events],
        "rls_weights": [[[float(w) for w in row] for row in snap] for snap in report.rls_weights],
    }


def write_report_csv(report: SimReport, scenario: MarketScenario, path) -> None:
    """Flat per-horizon table: hour, c, u, prices, o, demands, I, R, G, Q, W, total."""
    l = report.realized_demands.shape[0]
    header = (
        ["hour", "wholesale_price", "renewable"]
        + [f"p_{j}" for j in range(1, l + 1)]
        + ["purchase"]
        + [f"d_{j}" for j in range(1, l + 1)]
        + ["storage_start", "revenue", "satisfaction", "grid_stress", "storage_cost", "total"]
    )
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(scenario.n_horizons):
            dec = report.decisions[k]
            bd = report.breakdowns[k]
            writer.writerow(
                [k + 1, repr(float(scenario.wholesale_prices[k])), repr(float(scenario.renewable[k]))]
                + [repr(float(p)) for p in dec.prices]
                + [repr(float(dec.purchase))]
                + [repr(float(d)) for d in report.realized_demands[:, k]]
                + [
                    repr(float(report.storage_trajectory[k])),
                    repr(bd.revenue),
                    repr(bd.satisfaction),
                    repr(bd.grid_stress),
                    repr(bd.storage_cost),
                    repr(bd.total),
                ]
            )


def write_sweep_csv(result: SweepResult, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [result.parameter, "total_profit", "total_satisfaction", "purchase_variance", "mean_price_variance"]
        )
        for row in result.rows:
            writer.writerow(
                [
                    repr(row.value),
                    repr(row.total_profit),
                    repr(row.total_satisfaction),
                    repr(row.purchase_variance),
                    repr(row.mean_price_variance),
                ]
            )


def report_json(report: SimReport, scenario: MarketScenario) -> str:
    return json.dumps(report_to_dict(report, scenario), indent=2, sort_keys=True) + "\n"
