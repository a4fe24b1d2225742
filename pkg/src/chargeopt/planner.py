"""Day-ahead schedules: greedy per-horizon policy, storage-grid DP, brute-force oracle.

The DP discretizes the storage state on a uniform grid and carries the
value-to-go as a piecewise-linear function of the leftover. Each stage
problem stays a quadratic program: when the continuation is concave its
linear pieces enter as epigraph cuts on one extra variable (a single QP per
grid point); otherwise one QP is solved per linear piece with the piece
interval added as constraints, and the best piece wins.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .demand import ElasticityModel, predict_demand
from .qp import LinearConstraintSet, QpInfeasibleError, maximize_quadratic
from .scenario import EconomicParams, MarketScenario
from .utility import (
    Decision,
    QuadForm,
    StageContext,
    UtilityBreakdown,
    check_feasible,
    demand_aggregates,
    quad_form,
    stage_utility,
)

_ATOL = 1e-6


class PlannerError(RuntimeError):
    """Planning failed; `stage` is the 1-based horizon when applicable."""

    def __init__(self, message: str, stage: int | None = None):
        super().__init__(message if stage is None else f"stage {stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class GridConfig:
    """Storage-state discretization for the DP."""

    n_points: int = 201
    interpolation: str = "linear"

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("grid needs at least 2 points")
        if self.interpolation != "linear":
            raise ValueError(f"unsupported interpolation {self.interpolation!r}")


@dataclass(frozen=True, eq=False)
class Plan:
    """A full-day schedule with its predicted consequences."""

    decisions: tuple[Decision, ...]
    predicted_demands: np.ndarray
    storage_trajectory: np.ndarray
    breakdowns: tuple[UtilityBreakdown, ...]
    total_utility: float
    total_profit: float
    solver_statuses: tuple[str, ...] = ()

    @property
    def purchases(self) -> np.ndarray:
        return np.array([d.purchase for d in self.decisions])

    @property
    def price_matrix(self) -> np.ndarray:
        """(L, N) posted prices."""
        return np.array([d.prices for d in self.decisions]).T


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Backward value estimates on the storage grid, stages 1..N+1."""

    storage_grid: np.ndarray
    values: np.ndarray
    decisions: np.ndarray

    def value_at(self, stage: int, storage: float) -> float:
        """Linear interpolation of stage `stage` (1-based) at `storage`."""
        if not 1 <= stage <= self.values.shape[0]:
            raise ValueError(f"stage {stage} outside table")
        return float(np.interp(storage, self.storage_grid, self.values[stage - 1]))


def price_caps(model: ElasticityModel) -> np.ndarray:
    """Upper price bounds that contain every point with nonnegative demand.

    With a strictly diagonally dominant elasticity matrix the bound
    max(intercepts) / min(|diag| - off-row-sum) is valid for every station;
    otherwise each station's cap is found by LP (or a large fallback when
    the nonnegative-demand set is unbounded).
    """
    a = model.elasticity
    l = model.n_stations
    diag = -np.diag(a)
    off = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    slack = diag - off
    if (slack > 1e-9).all():
        cap = float(model.intercepts.max(initial=0.0)) / float(slack.min()) + 1.0
        return np.full(l, max(cap, 1.0))
    caps = np.empty(l)
    big = 1e6
    for j in range(l):
        c = np.zeros(l)
        c[j] = -1.0
        res = linprog(c, A_ub=-a, b_ub=model.intercepts, bounds=[(0, big)] * l, method="highs")
        caps[j] = (res.x[j] + 1.0) if res.status == 0 else big
    return caps


@dataclass(frozen=True, eq=False)
class _Cuts:
    """Linear pieces of the continuation value over the leftover state."""

    edges: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray
    t_lo: float
    t_hi: float
    concave: bool

    def min_line(self, y: float) -> float:
        return float(np.min(self.slopes * y + self.intercepts))


def _make_cuts(grid: np.ndarray, values: np.ndarray) -> _Cuts:
    slopes = np.diff(values) / np.diff(grid)
    intercepts = values[:-1] - slopes * grid[:-1]
    at_lo = slopes * grid[0] + intercepts
    at_hi = slopes * grid[-1] + intercepts
    t_lo = float(min(at_lo.min(), at_hi.min())) - 1.0
    t_hi = float(max(at_lo.max(), at_hi.max())) + 1.0
    scale = max(1.0, float(np.abs(slopes).max(initial=0.0)))
    concave = bool(np.all(np.diff(slopes) <= 1e-7 * scale))
    return _Cuts(grid.copy(), slopes, intercepts, t_lo, t_hi, concave)


def _merge_pieces(cuts: _Cuts) -> list[tuple[float, float, float, float]]:
    """Collapse consecutive collinear pieces to (y_lo, y_hi, slope, intercept)."""
    pieces = []
    for i, (a, b) in enumerate(zip(cuts.slopes, cuts.intercepts)):
        lo, hi = float(cuts.edges[i]), float(cuts.edges[i + 1])
        if pieces:
            pa = pieces[-1]
            if abs(a - pa[2]) <= 1e-10 * max(1.0, abs(a), abs(pa[2])):
                pieces[-1] = (pa[0], hi, pa[2], pa[3])
                continue
        pieces.append((lo, hi, float(a), float(b)))
    return pieces


class _StageGeometry:
    """Model-dependent pieces of every stage problem (constraint rows, caps)."""

    def __init__(self, model: ElasticityModel, params: EconomicParams):
        self.model = model
        self.params = params
        self.l = model.n_stations
        self.gamma0_sum, self.row_sums = demand_aggregates(model)
        self.caps = price_caps(model)
        # leftover = ell0 + ell . (P, o), ell0 = I + u - sum(intercepts)
        self.ell = np.append(-self.row_sums, 1.0)
        l = self.l
        rows_a = []
        rows_b = []
        for j in range(l):
            a = np.zeros(l + 1)
            a[:l] = -model.elasticity[j]
            rows_a.append(a)
            rows_b.append(float(model.intercepts[j]))  # demand_j >= 0
        a = np.zeros(l + 1)
        a[:l] = self.row_sums
        rows_a.append(a)
        rows_b.append(params.capacity - self.gamma0_sum)  # phi <= capacity
        self.base_rows_a = np.array(rows_a)
        self.base_rows_b = np.array(rows_b)
        self.lower = np.zeros(l + 1)
        self.upper = np.append(self.caps, params.o_max)

    def ell0(self, storage: float, renewable: float) -> float:
        return storage + renewable - self.gamma0_sum

    def storage_rows(self, ell0: float) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.vstack([-self.ell, self.ell]),
            np.array([ell0, self.params.capacity - ell0]),
        )

    def feasible_start(self, ell0: float) -> np.ndarray | None:
        """Deterministic analytic feasible (P, o), or None if not found."""
        model, params = self.model, self.params
        l = self.l
        tau_floor = 0.0
        if self.gamma0_sum > params.capacity > 0:
            tau_floor = min(1.0, 1.0 - params.capacity / self.gamma0_sum + 1e-9)
        try:
            p_zero_demand = np.linalg.solve(-model.elasticity, model.intercepts)
        except np.linalg.LinAlgError:
            p_zero_demand = None
        if p_zero_demand is not None and ((p_zero_demand < 0).any() or (p_zero_demand > self.caps).any()):
            p_zero_demand = None
        taus = [tau_floor, (tau_floor + 1.0) / 2.0, 1.0] if p_zero_demand is not None else []
        if tau_floor == 0.0:
            taus = [0.0] + taus
        for tau in taus:
            prices = tau * p_zero_demand if (tau > 0.0 and p_zero_demand is not None) else np.zeros(l)
            phi = (1.0 - tau) * self.gamma0_sum if tau > 0.0 else self.gamma0_sum
            if phi > params.capacity + 1e-9:
                continue
            w0 = ell0 - self.row_sums @ prices
            o_lo = max(0.0, -w0)
            o_hi = min(params.o_max, params.capacity - w0)
            if o_lo <= o_hi + 1e-12:
                o = min(max(params.o_ref, o_lo), o_hi)
                return np.append(prices, o)
        return None


def _solve_stage(
    geom: _StageGeometry,
    horizon: int,
    wholesale: float,
    renewable: float,
    storage: float,
    cuts: _Cuts | None,
    warm: np.ndarray | None = None,
    method: str = "auto",
) -> tuple[np.ndarray, float, str]:
    """One horizon's decision problem; returns ((P, o), value, status).

    `value` includes the continuation estimate when cuts are given.
    """
    params = geom.params
    l = geom.l
    ctx = StageContext(horizon, wholesale, renewable, max(storage, 0.0))
    base = quad_form(geom.model, ctx, wholesale, params, 0.0)
    ell0 = geom.ell0(max(storage, 0.0), renewable)
    s_rows_a, s_rows_b = geom.storage_rows(ell0)

    if cuts is None:
        cons = LinearConstraintSet(
            np.vstack([geom.base_rows_a, s_rows_a]),
            np.concatenate([geom.base_rows_b, s_rows_b]),
            geom.lower,
            geom.upper,
        )
        x0 = _stage_start(geom, ell0, cons, warm)
        try:
            sol = maximize_quadratic(base, cons, tol=_ATOL, initial=x0)
        except QpInfeasibleError as exc:
            raise PlannerError(str(exc), stage=horizon) from exc
        return sol.x, sol.value, sol.status

    if method not in ("auto", "cuts", "per_piece"):
        raise ValueError(f"unknown stage-solve method {method!r}")
    use_cuts = cuts.concave if method == "auto" else (method == "cuts")
    if not use_cuts:
        return _solve_stage_per_piece(geom, base, ell0, s_rows_a, s_rows_b, cuts, horizon, warm)

    n_cuts = cuts.slopes.shape[0]
    q_ext = np.zeros((l + 2, l + 2))
    q_ext[: l + 1, : l + 1] = base.Q
    b_ext = np.append(base.B, 1.0)
    form = QuadForm(q_ext, b_ext, base.r)

    pad = np.zeros((geom.base_rows_a.shape[0] + 2, 1))
    fixed_a = np.hstack([np.vstack([geom.base_rows_a, s_rows_a]), pad])
    fixed_b = np.concatenate([geom.base_rows_b, s_rows_b])
    cut_a = np.column_stack(
        [np.outer(cuts.slopes, geom.row_sums), -cuts.slopes, np.ones(n_cuts)]
    )
    cut_b = cuts.slopes * ell0 + cuts.intercepts
    cons = LinearConstraintSet(
        np.vstack([fixed_a, cut_a]),
        np.concatenate([fixed_b, cut_b]),
        np.append(geom.lower, cuts.t_lo),
        np.append(geom.upper, cuts.t_hi),
    )
    x0 = _stage_start(geom, ell0, cons, warm, cuts=cuts)
    try:
        sol = maximize_quadratic(form, cons, tol=_ATOL, initial=x0)
    except QpInfeasibleError as exc:
        raise PlannerError(str(exc), stage=horizon) from exc
    return sol.x[: l + 1], sol.value, sol.status


def _stage_start(geom, ell0, cons, warm, cuts=None):
    candidates = []
    if warm is not None:
        candidates.append(np.asarray(warm, dtype=float)[: geom.l + 1])
    analytic = geom.feasible_start(ell0)
    if analytic is not None:
        candidates.append(analytic)
    for cand in candidates:
        if cuts is not None:
            y = ell0 + geom.ell @ cand
            t0 = min(max(cuts.min_line(y), cuts.t_lo), cuts.t_hi)
            cand = np.append(cand, t0)
        if cons.max_violation(cand) <= 1e-9:
            return cand
    return None


def _solve_stage_per_piece(geom, base, ell0, s_rows_a, s_rows_b, cuts, horizon, warm):
    params = geom.params
    pieces = _merge_pieces(cuts)
    sp = geom.row_sums * geom.caps
    y_min = ell0 + 0.0 - float(np.maximum(sp, 0.0).sum())
    y_max = ell0 + params.o_max - float(np.minimum(sp, 0.0).sum())
    reach_lo = max(0.0, y_min)
    reach_hi = min(params.capacity, y_max)
    best = None
    for lo, hi, slope, intercept in pieces:
        if hi < reach_lo - 1e-9 or lo > reach_hi + 1e-9:
            continue
        form = QuadForm(base.Q, base.B + slope * geom.ell, base.r + slope * ell0 + intercept)
        piece_a = np.vstack([-geom.ell, geom.ell])
        piece_b = np.array([ell0 - lo, hi - ell0])
        cons = LinearConstraintSet(
            np.vstack([geom.base_rows_a, s_rows_a, piece_a]),
            np.concatenate([geom.base_rows_b, s_rows_b, piece_b]),
            geom.lower,
            geom.upper,
        )
        try:
            sol = maximize_quadratic(form, cons, tol=_ATOL, initial=warm)
        except QpInfeasibleError:
            continue
        if best is None or sol.value > best[1] + 1e-12:
            best = (sol.x, sol.value, sol.status)
    if best is None:
        raise PlannerError("no continuation piece admits a feasible decision", stage=horizon)
    return best


def _assemble_plan(scenario, model, params, initial_storage, decisions, statuses=()) -> Plan:
    n = scenario.n_horizons
    demands = np.zeros((model.n_stations, n))
    storage = np.zeros(n + 1)
    storage[0] = initial_storage
    breakdowns = []
    current = float(initial_storage)
    for k in range(1, n + 1):
        dec = decisions[k - 1]
        ctx = StageContext(
            k,
            float(scenario.wholesale_prices[k - 1]),
            float(scenario.renewable[k - 1]),
            min(max(current, 0.0), params.capacity),
        )
        verdict = check_feasible(model, ctx, dec, params, atol=_ATOL)
        if not verdict.feasible:
            raise PlannerError(
                f"decision violates {', '.join(verdict.violations)}", stage=k
            )
        bd = stage_utility(model, ctx, dec, params, atol=_ATOL)
        d = np.maximum(predict_demand(model, dec.prices), 0.0)
        demands[:, k - 1] = d
        current = current + ctx.renewable + dec.purchase - float(d.sum())
        storage[k] = current
        breakdowns.append(bd)
    total_utility = float(
        sum(b.total for b in breakdowns) + params.terminal_salvage * storage[n]
    )
    total_profit = float(sum(b.revenue for b in breakdowns))
    return Plan(
        tuple(decisions),
        demands,
        storage,
        tuple(breakdowns),
        total_utility,
        total_profit,
        tuple(statuses),
    )


def _snap_decision(geom, x) -> Decision:
    prices = np.clip(x[: geom.l], 0.0, geom.caps)
    o = float(min(max(x[geom.l], 0.0), geom.params.o_max))
    return Decision(prices, o)


def greedy_plan(
    scenario: MarketScenario,
    model: ElasticityModel,
    params: EconomicParams,
    initial_storage: float,
) -> Plan:
    """Maximize each horizon's utility independently (the myopic benchmark)."""
    _check_initial(initial_storage, params)
    geom = _StageGeometry(model, params)
    decisions = []
    statuses = []
    current = float(initial_storage)
    warm = None
    for k in range(1, scenario.n_horizons + 1):
        x, _, status = _solve_stage(
            geom,
            k,
            float(scenario.wholesale_prices[k - 1]),
            float(scenario.renewable[k - 1]),
            current,
            cuts=None,
            warm=warm,
        )
        warm = x
        dec = _snap_decision(geom, x)
        decisions.append(dec)
        statuses.append(status)
        d = np.maximum(predict_demand(model, dec.prices), 0.0)
        current = current + float(scenario.renewable[k - 1]) + dec.purchase - float(d.sum())
    return _assemble_plan(scenario, model, params, initial_storage, decisions, statuses)


def value_function(
    scenario: MarketScenario,
    model: ElasticityModel,
    params: EconomicParams,
    grid: GridConfig = GridConfig(),
    method: str = "auto",
) -> ValueTable:
    """Backward value recursion over the storage grid.

    Row k-1 holds stage k's values; the terminal row is terminal_salvage
    times the grid.
    """
    n = scenario.n_horizons
    geom = _StageGeometry(model, params)
    pts = np.linspace(0.0, params.capacity, grid.n_points)
    values = np.zeros((n + 1, grid.n_points))
    values[n] = params.terminal_salvage * pts
    argmax = np.zeros((n, grid.n_points, geom.l + 1))
    stage_warm = None
    for k in range(n, 0, -1):
        cuts = _make_cuts(pts, values[k])
        warm = stage_warm
        for i, storage in enumerate(pts):
            x, val, _ = _solve_stage(
                geom,
                k,
                float(scenario.wholesale_prices[k - 1]),
                float(scenario.renewable[k - 1]),
                float(storage),
                cuts=cuts,
                warm=warm,
                method=method,
            )
            warm = x
            if i == 0:
                stage_warm = x
            values[k - 1, i] = val
            argmax[k - 1, i] = x[: geom.l + 1]
    return ValueTable(pts, values, argmax)


def dp_plan(
    scenario: MarketScenario,
    model: ElasticityModel,
    params: EconomicParams,
    initial_storage: float,
    grid: GridConfig = GridConfig(),
    method: str = "auto",
) -> Plan:
    """Finite-horizon DP plan; forward pass re-solves at the exact storage."""
    _check_initial(initial_storage, params)
    table = value_function(scenario, model, params, grid, method=method)
    geom = _StageGeometry(model, params)
    decisions = []
    statuses = []
    current = float(initial_storage)
    for k in range(1, scenario.n_horizons + 1):
        cuts = _make_cuts(table.storage_grid, table.values[k])
        nearest = int(np.argmin(np.abs(table.storage_grid - current)))
        warm = table.decisions[k - 1, nearest]
        x, _, status = _solve_stage(
            geom,
            k,
            float(scenario.wholesale_prices[k - 1]),
            float(scenario.renewable[k - 1]),
            current,
            cuts=cuts,
            warm=warm,
            method=method,
        )
        dec = _snap_decision(geom, x)
        decisions.append(dec)
        statuses.append(status)
        d = np.maximum(predict_demand(model, dec.prices), 0.0)
        current = current + float(scenario.renewable[k - 1]) + dec.purchase - float(d.sum())
    return _assemble_plan(scenario, model, params, initial_storage, decisions, statuses)


def exhaustive_oracle(
    scenario: MarketScenario,
    model: ElasticityModel,
    params: EconomicParams,
    initial_storage: float,
    price_lattice,
    purchase_lattice,
    max_sequences: int = 100_000_000,
) -> Plan:
    """Best plan over every lattice decision sequence (tiny instances only).

    Enumerates price-vector x purchase combinations per stage, prunes
    infeasible prefixes, and returns the utility argmax re-evaluated through
    the exact stage accounting.
    """
    _check_initial(initial_storage, params)
    n = scenario.n_horizons
    l = model.n_stations
    prices = np.asarray(price_lattice, dtype=float)
    buys = np.asarray(purchase_lattice, dtype=float)
    combos = np.array(list(itertools.product(prices, repeat=l)))
    n_opts = combos.shape[0] * buys.shape[0]
    if float(n_opts) ** n > max_sequences:
        raise PlannerError(
            f"{n_opts} options over {n} stages exceeds {max_sequences} sequences"
        )

    p_all = np.repeat(combos, buys.shape[0], axis=0)
    o_all = np.tile(buys, combos.shape[0])
    d_all = model.intercepts[None, :] + p_all @ model.elasticity.T
    phi_all = d_all.sum(axis=1)
    static_ok = (
        (d_all >= -_ATOL).all(axis=1)
        & (phi_all <= params.capacity + _ATOL)
        & (p_all >= 0).all(axis=1)
        & (o_all >= -_ATOL)
        & (o_all <= params.o_max + _ATOL)
    )
    if not static_ok.any():
        raise PlannerError("no lattice decision satisfies the static constraints")
    p_all, o_all, d_all, phi_all = (
        p_all[static_ok],
        o_all[static_ok],
        d_all[static_ok],
        phi_all[static_ok],
    )
    s = p_all.shape[0]
    pd_sum = np.einsum("ij,ij->i", p_all, np.maximum(d_all, 0.0))
    sat = params.beta * (params.omega * phi_all - 0.5 * params.alpha * phi_all**2)
    stress = params.mu * (o_all - params.o_ref) ** 2

    # prefix enumeration with parent pointers for path reconstruction
    states = np.array([float(initial_storage)])
    utils = np.array([0.0])
    parents: list[np.ndarray] = []
    options: list[np.ndarray] = []
    for k in range(1, n + 1):
        c_k = float(scenario.wholesale_prices[k - 1])
        u_k = float(scenario.renewable[k - 1])
        base = pd_sum - c_k * o_all + sat - stress
        leftover = states[:, None] + u_k + o_all[None, :] - phi_all[None, :]
        ok = (leftover >= -_ATOL) & (leftover <= params.capacity + _ATOL)
        if not ok.any():
            raise PlannerError("feasible set empty", stage=k)
        stage_util = base[None, :] - params.eta * leftover
        total = utils[:, None] + np.where(ok, stage_util, -np.inf)
        if k == n:
            total = total + params.terminal_salvage * leftover
            flat = int(np.argmax(total))
            best_parent, best_opt = divmod(flat, s)
            parents.append(np.array([best_parent]))
            options.append(np.array([best_opt]))
            break
        keep = np.flatnonzero(ok.ravel())
        if keep.size > 20_000_000:
            raise PlannerError(f"{keep.size} feasible prefixes exceed memory guard")
        parents.append(keep // s)
        options.append(keep % s)
        states = leftover.ravel()[keep]
        utils = total.ravel()[keep]

    # walk parent pointers backward to recover the option sequence
    opt_seq = [0] * n
    idx = 0
    for k in range(n - 1, -1, -1):
        opt_seq[k] = int(options[k][idx])
        idx = int(parents[k][idx])
    decisions = [Decision(p_all[j].copy(), float(o_all[j])) for j in opt_seq]
    return _assemble_plan(scenario, model, params, initial_storage, decisions)


def _check_initial(initial_storage: float, params: EconomicParams) -> None:
    if not 0.0 <= initial_storage <= params.capacity:
        raise PlannerError(
            f"initial storage {initial_storage} outside [0, {params.capacity}]"
        )


def plan_to_dict(plan: Plan, scenario: MarketScenario) -> dict:
    """Structured document form of a plan (per-horizon records)."""
    l = plan.predicted_demands.shape[0]
    records = []
    for k in range(scenario.n_horizons):
        dec = plan.decisions[k]
        bd = plan.breakdowns[k]
        records.append(
            {
                "hour": k + 1,
                "wholesale_price": float(scenario.wholesale_prices[k]),
                "renewable": float(scenario.renewable[k]),
                "prices": [float(p) for p in dec.prices],
                "purchase": float(dec.purchase),
                "predicted_demand": [float(d) for d in plan.predicted_demands[:, k]],
                "storage_start": float(plan.storage_trajectory[k]),
                "revenue": bd.revenue,
                "satisfaction": bd.satisfaction,
                "grid_stress": bd.grid_stress,
                "storage_cost": bd.storage_cost,
                "total": bd.total,
            }
        )
    return {
        "n_stations": l,
        "horizons": records,
        "storage_end": float(plan.storage_trajectory[-1]),
        "total_utility": plan.total_utility,
        "total_profit": plan.total_profit,
    }


def write_plan_csv(plan: Plan, scenario: MarketScenario, path) -> None:
    l = plan.predicted_demands.shape[0]
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
            dec = plan.decisions[k]
            bd = plan.breakdowns[k]
            writer.writerow(
                [k + 1, repr(float(scenario.wholesale_prices[k])), repr(float(scenario.renewable[k]))]
                + [repr(float(p)) for p in dec.prices]
                + [repr(float(dec.purchase))]
                + [repr(float(d)) for d in plan.predicted_demands[:, k]]
                + [
                    repr(float(plan.storage_trajectory[k])),
                    repr(bd.revenue),
                    repr(bd.satisfaction),
                    repr(bd.grid_stress),
                    repr(bd.storage_cost),
                    repr(bd.total),
                ]
            )


def write_value_table_csv(table: ValueTable, path) -> None:
    """(stage, storage, value) triples for external plotting."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "storage", "value"])
        for stage in range(1, table.values.shape[0] + 1):
            for storage, value in zip(table.storage_grid, table.values[stage - 1]):
                writer.writerow([stage, repr(float(storage)), repr(float(value))])
