"""Figure rendering for plans, simulations, sweeps and comparisons.

Everything here writes PNG files next to the delimited outputs; the core
library never imports matplotlib. Figures are rendered headless (Agg).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .planner import Plan, ValueTable
from .scenario import MarketScenario
from .simulate import PolicyComparison, SimReport, SweepResult


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_scenario(scenario: MarketScenario, path) -> Path:
    """Wholesale price and renewable forecast over the day."""
    hours = np.arange(1, scenario.n_horizons + 1)
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    ax1.plot(hours, scenario.wholesale_prices, marker="o", color="tab:blue")
    ax1.set_ylabel("wholesale price ($/MWh)")
    ax2.bar(hours, scenario.renewable, color="tab:orange")
    ax2.set_ylabel("renewable (MWh)")
    ax2.set_xlabel("hour")
    fig.suptitle("Market scenario")
    return _save(fig, path)


def _overview(hours, prices_lxn, purchases, storage, wholesale, title):
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 7))
    for j in range(prices_lxn.shape[0]):
        axes[0].plot(hours, prices_lxn[j], label=f"station {j + 1}")
    axes[0].set_ylabel("charging price ($/MWh)")
    if prices_lxn.shape[0] <= 6:
        axes[0].legend(fontsize=8)
    axes[1].bar(hours, purchases, color="tab:green", label="purchase")
    ax1b = axes[1].twinx()
    ax1b.plot(hours, wholesale, color="tab:blue", linestyle="--", label="wholesale")
    axes[1].set_ylabel("purchase (MWh)")
    ax1b.set_ylabel("wholesale ($/MWh)")
    axes[2].step(np.arange(len(storage)), storage, where="post", color="tab:red")
    axes[2].set_ylabel("storage (MWh)")
    axes[2].set_xlabel("hour")
    fig.suptitle(title)
    return fig


def plot_plan(plan: Plan, scenario: MarketScenario, path) -> Path:
    """Prices, purchases vs wholesale, and storage trajectory of a plan."""
    hours = np.arange(1, scenario.n_horizons + 1)
    fig = _overview(
        hours, plan.price_matrix, plan.purchases, plan.storage_trajectory,
        scenario.wholesale_prices, "Planned schedule",
    )
    return _save(fig, path)


def plot_report(report: SimReport, scenario: MarketScenario, path) -> Path:
    hours = np.arange(1, scenario.n_horizons + 1)
    prices = np.array([d.prices for d in report.decisions]).T
    fig = _overview(
        hours, prices, report.purchases, report.storage_trajectory,
        scenario.wholesale_prices, f"Realized run ({report.policy}, seed {report.seed})",
    )
    return _save(fig, path)


def plot_value_table(table: ValueTable, path, stages=None) -> Path:
    fig, ax = plt.subplots(figsize=(7, 5))
    rows = stages or range(1, table.values.shape[0] + 1, max(1, table.values.shape[0] // 6))
    for stage in rows:
        ax.plot(table.storage_grid, table.values[stage - 1], label=f"stage {stage}")
    ax.set_xlabel("storage (MWh)")
    ax.set_ylabel("value-to-go ($)")
    ax.legend(fontsize=8)
    fig.suptitle("Value function over storage")
    return _save(fig, path)


def plot_sweep(result: SweepResult, path) -> Path:
    """Profit and satisfaction against the swept parameter (tradeoff view)."""
    vals = [r.value for r in result.rows]
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(vals, [r.total_profit for r in result.rows], marker="o", color="tab:blue", label="total profit")
    ax.set_xlabel(result.parameter)
    ax.set_ylabel("total profit ($)", color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(vals, [r.total_satisfaction for r in result.rows], marker="s", color="tab:red", label="total satisfaction")
    ax2.set_ylabel("total satisfaction", color="tab:red")
    fig.suptitle(f"Profit vs satisfaction across {result.parameter}")
    return _save(fig, path)


def plot_sweep_purchases(result: SweepResult, scenario: MarketScenario, path) -> Path:
    """Purchase series per swept value with the wholesale curve underneath."""
    if result.runs is None:
        raise ValueError("sweep was run without keep_runs; no series to plot")
    hours = np.arange(1, scenario.n_horizons + 1)
    n = len(result.runs)
    fig, axes = plt.subplots(n + 1, 1, sharex=True, figsize=(8, 2.1 * (n + 1)))
    for ax, row, run in zip(axes[:-1], result.rows, result.runs):
        ax.bar(hours, run.purchases, color="tab:green")
        ax.set_ylabel(f"{result.parameter}={row.value:g}\no (MWh)", fontsize=8)
    axes[-1].plot(hours, scenario.wholesale_prices, color="tab:blue", marker=".")
    axes[-1].set_ylabel("wholesale\n($/MWh)", fontsize=8)
    axes[-1].set_xlabel("hour")
    fig.suptitle("Electricity purchase by parameter value")
    return _save(fig, path)


def plot_sweep_prices(result: SweepResult, scenario: MarketScenario, path, stations=(1, 2, 3)) -> Path:
    """Charging-price series for selected stations at each swept value."""
    if result.runs is None:
        raise ValueError("sweep was run without keep_runs; no series to plot")
    hours = np.arange(1, scenario.n_horizons + 1)
    fig, ax = plt.subplots(figsize=(8, 5))
    styles = ["-", "--", ":", "-."]
    for (row, run), style in zip(zip(result.rows, result.runs), styles):
        prices = run.price_matrix if isinstance(run, Plan) else np.array([d.prices for d in run.decisions]).T
        for j in stations:
            if j <= prices.shape[0]:
                ax.plot(hours, prices[j - 1], style, label=f"station {j}, {result.parameter}={row.value:g}")
    ax.set_xlabel("hour")
    ax.set_ylabel("charging price ($/MWh)")
    ax.legend(fontsize=7)
    fig.suptitle("Charging prices by parameter value")
    return _save(fig, path)


def plot_comparison(cmp: PolicyComparison, scenario: MarketScenario, path) -> Path:
    hours = np.arange(1, scenario.n_horizons + 1)
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    for rep in cmp.reports:
        ax1.plot(hours, np.cumsum([b.revenue for b in rep.breakdowns]), label=rep.policy)
        ax2.plot(hours, rep.storage_trajectory[1:], label=rep.policy)
    ax1.set_ylabel("cumulative profit ($)")
    ax1.legend()
    ax2.set_ylabel("storage (MWh)")
    ax2.set_xlabel("hour")
    if cmp.profit_increase_percent is not None:
        fig.suptitle(f"Policy comparison (profit increase {cmp.profit_increase_percent:.2f}%)")
    else:
        fig.suptitle(f"Policy comparison (profit difference {cmp.absolute_difference:.2f}$)")
    return _save(fig, path)
