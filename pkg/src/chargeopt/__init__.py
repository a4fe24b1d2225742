"""Dynamic pricing and storage-aware energy management for EV charging networks."""

from .demand import (
    DemandObservation,
    ElasticityModel,
    RlsState,
    fit_batch,
    load_model,
    predict_demand,
    rls_update,
    save_model,
    to_model,
)
from .planner import (
    GridConfig,
    Plan,
    PlannerError,
    ValueTable,
    dp_plan,
    exhaustive_oracle,
    greedy_plan,
    value_function,
)
from .qp import (
    LinearConstraintSet,
    concavity_report,
    grid_oracle,
    maximize_quadratic,
)
from .scenario import (
    EconomicParams,
    MarketScenario,
    ScenarioError,
    load_params,
    load_scenario,
    save_params,
    synth_scenario,
)
from .simulate import (
    PolicyComparison,
    SimReport,
    SweepResult,
    TrueMarket,
    compare_policies,
    run_closed_loop,
    sweep,
)
from .utility import (
    Decision,
    QuadForm,
    StageContext,
    UtilityBreakdown,
    check_feasible,
    grid_stress,
    quad_form,
    revenue,
    satisfaction,
    stage_utility,
    storage_cost,
)

__version__ = "0.1.0"
