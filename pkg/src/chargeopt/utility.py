"""Stage utility of the charging service provider and its quadratic form.

The per-horizon utility is

    total = revenue + satisfaction - grid_stress - storage_cost

with revenue sum_j p_j d_j - c * o, satisfaction beta * (omega * phi -
alpha/2 * phi^2) for total demand phi, grid stress mu * (o - o_ref)^2, and
storage cost eta * (I + u + o - phi). Because demand is affine in prices,
the whole thing is a quadratic in the decision X = (p_1..p_L, o); this
module assembles that quadratic symbolically and exposes it to the solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demand import ElasticityModel, predict_demand
from .scenario import EconomicParams


class InfeasibleDecisionError(ValueError):
    """Decision violates a hard constraint (storage bounds or demand sign)."""


class SatisfactionDomainError(ValueError):
    """Total demand outside the satisfaction function's domain [0, capacity]."""


@dataclass(frozen=True, eq=False)
class Decision:
    """One horizon's posted prices plus wholesale purchase."""

    prices: np.ndarray
    purchase: float

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        if p.ndim != 1:
            raise ValueError("prices must be a 1-d vector")
        if not (np.isfinite(p).all() and np.isfinite(self.purchase)):
            raise ValueError("decision must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "purchase", float(self.purchase))


@dataclass(frozen=True)
class StageContext:
    """State seen at the start of one horizon."""

    horizon: int
    wholesale_price: float
    renewable: float
    storage: float

    def __post_init__(self):
        if self.renewable < 0:
            raise ValueError("renewable must be >= 0")
        if self.storage < -1e-9:
            raise ValueError("storage must be >= 0")
        if not (np.isfinite(self.wholesale_price) and np.isfinite(self.renewable) and np.isfinite(self.storage)):
            raise ValueError("stage context must be finite")


@dataclass(frozen=True)
class UtilityBreakdown:
    """Stage utility components; total is their signed sum by construction."""

    revenue: float
    satisfaction: float
    grid_stress: float
    storage_cost: float
    total: float


@dataclass(frozen=True, eq=False)
class QuadForm:
    """Quadratic objective 0.5 x'Qx + B'x + r with symmetric Q."""

    Q: np.ndarray
    B: np.ndarray
    r: float

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=float)
        b = np.asarray(self.B, dtype=float)
        n = b.shape[0]
        if q.shape != (n, n):
            raise ValueError(f"Q shape {q.shape} does not match B length {n}")
        if not (np.isfinite(q).all() and np.isfinite(b).all() and np.isfinite(self.r)):
            raise ValueError("quadratic form must be finite")
        if not np.array_equal(q, q.T):
            raise ValueError("Q must be symmetric")
        q.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "r", float(self.r))

    @property
    def dim(self) -> int:
        return self.B.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.B @ x + self.r)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[str, ...]


def demand_aggregates(model: ElasticityModel) -> tuple[float, np.ndarray]:
    """(sum of intercepts, per-station row sums of the elasticity matrix).

    The row sums are the sensitivity of total demand to each price; they
    drive every phi-dependent term of the stage utility.
    """
    return float(model.intercepts.sum()), model.elasticity.sum(axis=1)


def revenue(prices, demands, wholesale_price: float, purchase: float) -> float:
    """Retail income minus wholesale cost: sum_j p_j d_j - c * o."""
    p = np.asarray(prices, dtype=float)
    d = np.asarray(demands, dtype=float)
    if p.shape != d.shape:
        raise ValueError(f"prices {p.shape} vs demands {d.shape}")
    return float(p @ d - wholesale_price * purchase)


def satisfaction(total_demand: float, params: EconomicParams, atol: float = 1e-6) -> float:
    """Customer satisfaction beta * (omega * phi - alpha/2 * phi^2).

    Defined on 0 <= phi <= capacity; values outside that domain raise, the
    caller is expected to constrain or clamp.
    """
    phi = float(total_demand)
    if phi < -atol or phi > params.capacity + atol:
        raise SatisfactionDomainError(
            f"total demand {phi} outside [0, {params.capacity}]"
        )
    return satisfaction_raw(phi, params)


def satisfaction_raw(total_demand: float, params: EconomicParams) -> float:
    """Satisfaction quadratic evaluated without the domain guard.

    Used for realized accounting in the simulator, where demand noise can
    push total demand slightly past capacity.
    """
    phi = float(total_demand)
    return params.beta * (params.omega * phi - 0.5 * params.alpha * phi * phi)


def grid_stress(purchase: float, params: EconomicParams) -> float:
    """Penalty mu * (o - o_ref)^2 on purchase deviation from the reference."""
    if not np.isfinite(purchase):
        raise ValueError("purchase must be finite")
    dev = float(purchase) - params.o_ref
    return params.mu * dev * dev


def storage_cost(
    ctx: StageContext,
    purchase: float,
    total_demand: float,
    params: EconomicParams,
    atol: float = 1e-9,
) -> float:
    """Holding cost eta * leftover, leftover = I + u + o - phi.

    A leftover outside [0, capacity] means the decision is infeasible, which
    is reported distinctly from arithmetic errors.
    """
    leftover = ctx.storage + ctx.renewable + float(purchase) - float(total_demand)
    if leftover < -atol:
        raise InfeasibleDecisionError(f"storage would go negative (leftover {leftover:.6g})")
    if leftover > params.capacity + atol:
        raise InfeasibleDecisionError(
            f"storage would exceed capacity (leftover {leftover:.6g} > {params.capacity})"
        )
    return params.eta * leftover


def stage_utility(
    model: ElasticityModel,
    ctx: StageContext,
    decision: Decision,
    params: EconomicParams,
    atol: float = 1e-9,
) -> UtilityBreakdown:
    """Full stage breakdown under model-predicted demand."""
    demands = predict_demand(model, decision.prices)
    if (demands < -atol).any():
        j = int(np.argmin(demands)) + 1
        raise InfeasibleDecisionError(
            f"predicted demand negative at station {j} ({demands[j - 1]:.6g})"
        )
    demands = np.maximum(demands, 0.0)
    phi = float(demands.sum())
    rev = revenue(decision.prices, demands, ctx.wholesale_price, decision.purchase)
    sat = satisfaction(phi, params, atol=max(atol, 1e-6))
    stress = grid_stress(decision.purchase, params)
    hold = storage_cost(ctx, decision.purchase, phi, params, atol=atol)
    return UtilityBreakdown(rev, sat, stress, hold, rev + sat - stress - hold)


def quad_form(
    model: ElasticityModel,
    ctx: StageContext,
    wholesale_price: float,
    params: EconomicParams,
    continuation_value: float = 0.0,
) -> QuadForm:
    """Stage utility as 0.5 X'QX + B'X + r over X = (p_1..p_L, o).

    Derived by expanding the utility with demand substituted as an affine
    function of prices. The purchase coordinate never couples to prices:
    its diagonal entry is -2*mu and its linear entry -c - eta + 2*mu*o_ref.
    `continuation_value` is folded into the constant term.
    """
    l = model.n_stations
    a = model.elasticity
    gamma0_sum, row_sums = demand_aggregates(model)
    ab = params.alpha * params.beta

    q = np.zeros((l + 1, l + 1))
    q[:l, :l] = a + a.T - ab * np.outer(row_sums, row_sums)
    q[l, l] = -2.0 * params.mu

    b = np.empty(l + 1)
    b[:l] = model.intercepts + (
        params.eta + params.beta * params.omega - ab * gamma0_sum
    ) * row_sums
    b[l] = -wholesale_price - params.eta + 2.0 * params.mu * params.o_ref

    r = (
        -params.eta * (ctx.storage + ctx.renewable)
        - params.mu * params.o_ref**2
        + (params.eta + params.beta * params.omega) * gamma0_sum
        - 0.5 * ab * gamma0_sum**2
        + continuation_value
    )
    return QuadForm(q, b, float(r))


def check_feasible(
    model: ElasticityModel,
    ctx: StageContext,
    decision: Decision,
    params: EconomicParams,
    atol: float = 1e-9,
) -> FeasibilityReport:
    """Verdict on the per-horizon constraint block (non-raising).

    Checks 0 <= o <= o_max, p >= 0, predicted demand >= 0, and the storage
    window 0 <= I + u + o - phi <= capacity.
    """
    violations = []
    if decision.purchase < -atol:
        violations.append("purchase_below_zero")
    if decision.purchase > params.o_max + atol:
        violations.append("purchase_above_max")
    if (decision.prices < -atol).any():
        violations.append("price_negative")
    demands = predict_demand(model, decision.prices)
    if (demands < -atol).any():
        violations.append("demand_negative")
    phi = float(np.maximum(demands, 0.0).sum())
    leftover = ctx.storage + ctx.renewable + decision.purchase - phi
    if leftover < -atol:
        violations.append("storage_negative")
    if leftover > params.capacity + atol:
        violations.append("storage_above_capacity")
    return FeasibilityReport(not violations, tuple(violations))
