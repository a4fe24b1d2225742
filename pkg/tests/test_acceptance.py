"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings. Tolerances are pinned here, not configurable.
"""

import time

import numpy as np

from chargeopt.demand import RlsState, fit_batch, rls_update
from chargeopt.planner import GridConfig, dp_plan, exhaustive_oracle, greedy_plan
from chargeopt.qp import LinearConstraintSet, grid_oracle, maximize_quadratic
from chargeopt.scenario import EconomicParams, synth_scenario
from chargeopt.simulate import TrueMarket, report_json, run_closed_loop, sweep
from chargeopt.utility import (
    Decision,
    QuadForm,
    StageContext,
    quad_form,
    satisfaction,
    stage_utility,
)

from _fixtures import (
    make_model,
    random_feasible_decision,
    single_station_model,
    table1_params,
    tiny_params,
    tiny_scenario,
)

from chargeopt.demand import DemandObservation


def _stamp(number, message, elapsed, budget):
    assert elapsed < budget, f"criterion {number} exceeded budget: {elapsed:.1f}s >= {budget}s"
    print(f"ACCEPTANCE {number} PASS: {message} ({elapsed:.1f}s < {budget}s)")


def test_01_quadratic_form_equivalence():
    """1000 random feasible decisions across 20 models match the stage utility."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    params = table1_params()
    checked = 0
    for i in range(20):
        stations = 2 if i % 2 == 0 else 5
        model = make_model(1000 + i, stations, intercept_range=(25.0, 55.0))
        for _ in range(50):
            storage = float(rng.uniform(0, params.capacity))
            renewable = float(rng.uniform(0, 25))
            c = float(rng.uniform(10, 60))
            continuation = float(rng.uniform(-1e4, 1e4))
            prices, o = random_feasible_decision(rng, model, params, storage, renewable)
            ctx = StageContext(1, c, renewable, storage)
            form = quad_form(model, ctx, c, params, continuation)
            bd = stage_utility(model, ctx, Decision(prices, o), params)
            x = np.append(prices, o)
            err = abs(form.value(x) - (bd.total + continuation))
            assert err <= 1e-8 * (1.0 + abs(bd.total))
            checked += 1
    assert checked == 1000
    _stamp(1, "quadratic form equals stage utility on 1000 feasible decisions",
           time.perf_counter() - t0, 5.0)


def test_02_qp_matches_grid_oracle():
    """Solver objective dominates a 0.01-resolution grid on 50 concave instances."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2002)
    for i in range(50):
        dim = int(rng.integers(1, 4))
        m = rng.normal(0, 1, (dim, dim))
        q = -(m @ m.T) - 0.5 * np.eye(dim)
        b = rng.normal(0, 3, dim)
        lo = rng.uniform(-0.8, 0.0, dim)
        hi = lo + rng.uniform(0.3, 1.1, dim)
        rows = []
        if i % 3 == 0:
            a_row = rng.normal(0, 1, dim)
            rows.append((a_row, float(a_row @ ((lo + hi) / 2)) + 0.1))
        form = QuadForm(q, b, float(rng.normal()))
        cons = LinearConstraintSet.build(rows, lo, hi)
        sol = maximize_quadratic(form, cons)
        _, grid_val = grid_oracle(form, cons, resolution=0.01)
        assert sol.value >= grid_val - 1e-3
    _stamp(2, "constrained maximizer dominates the 0.01 grid on 50 instances",
           time.perf_counter() - t0, 30.0)


def test_03_dp_vs_exhaustive_oracle():
    """DP stays within the lattice gap of brute force on 10 tiny instances."""
    t0 = time.perf_counter()
    model = single_station_model()
    params = tiny_params()
    price_lattice = np.linspace(0.0, 28.0, 21)
    purchase_lattice = np.linspace(0.0, 40.0, 21)
    for seed in range(10):
        scenario = tiny_scenario(seed)
        oracle = exhaustive_oracle(scenario, model, params, 20.0,
                                   price_lattice, purchase_lattice)
        plan = dp_plan(scenario, model, params, 20.0, GridConfig(201))
        gap = max(1.0, 0.005 * abs(oracle.total_utility))
        assert plan.total_utility >= oracle.total_utility - gap
        assert plan.total_utility <= oracle.total_utility + 0.10 * abs(oracle.total_utility) + 1.0
    _stamp(3, "DP within [-gap, +10%] of the exhaustive lattice optimum on 10 instances",
           time.perf_counter() - t0, 60.0)


def test_04_dp_dominates_greedy_at_table_scale():
    """20 diurnal scenarios, simulation-table parameters, M=201, L=5."""
    t0 = time.perf_counter()
    params = table1_params(beta=10000.0, eta=0.5)
    best_improvement = -np.inf
    for seed in range(100, 120):
        scenario = synth_scenario(seed, 24, "diurnal")
        model = make_model(seed, 5)
        greedy = greedy_plan(scenario, model, params, 100.0)
        dp = dp_plan(scenario, model, params, 100.0, GridConfig(201))
        assert dp.total_utility >= greedy.total_utility - 1e-3 * abs(greedy.total_utility)
        improvement = 100.0 * (dp.total_profit - greedy.total_profit) / abs(greedy.total_profit)
        best_improvement = max(best_improvement, improvement)
    assert best_improvement >= 1.0
    _stamp(4, f"DP never loses to greedy; best profit improvement {best_improvement:.1f}%",
           time.perf_counter() - t0, 600.0)


def test_05_beta_tradeoff():
    """Satisfaction nondecreasing and profit nonincreasing across the beta range."""
    t0 = time.perf_counter()
    scenario = synth_scenario(100, 24, "diurnal")
    model = make_model(100, 5)
    params = table1_params()
    result = sweep(scenario, model, params, "beta",
                   [0, 5000, 10000, 15000, 20000, 25000, 30000],
                   mode="plan", policy="dp", grid=GridConfig(201), initial_storage=100.0)
    sats = [r.total_satisfaction for r in result.rows]
    profits = [r.total_profit for r in result.rows]
    for prev, cur in zip(sats, sats[1:]):
        assert cur >= prev - 1e-6 * (1.0 + abs(prev))
    for prev, cur in zip(profits, profits[1:]):
        assert cur <= prev + 1e-6 * (1.0 + abs(prev))
    _stamp(5, "beta sweep: satisfaction nondecreasing, profit nonincreasing",
           time.perf_counter() - t0, 300.0)


def _eta_sweep():
    scenario = synth_scenario(100, 24, "diurnal")
    model = make_model(100, 5)
    params = table1_params()
    result = sweep(scenario, model, params, "eta", [0.5, 1.0, 1.5],
                   mode="plan", policy="dp", grid=GridConfig(201),
                   initial_storage=100.0, keep_runs=True)
    return scenario, result


def test_06_eta_purchase_behaviour():
    """Purchase variance strictly falls with storage cost; cheap hours buy more."""
    t0 = time.perf_counter()
    scenario, result = _eta_sweep()
    pvars = [r.purchase_variance for r in result.rows]
    assert pvars[0] > pvars[1] > pvars[2]
    purchases = result.runs[0].purchases  # eta = 0.5 plan
    order = np.argsort(scenario.wholesale_prices)
    cheap = purchases[order[:6]].mean()
    expensive = purchases[order[-6:]].mean()
    assert cheap > expensive
    _stamp(6, f"purchase variance {pvars[0]:.0f} > {pvars[1]:.0f} > {pvars[2]:.0f}; "
              f"cheap-hour purchases {cheap:.1f} > expensive-hour {expensive:.1f} MWh",
           time.perf_counter() - t0, 180.0)


def test_07_price_smoothing():
    """Cheap storage smooths charging prices: higher eta, higher price variance."""
    t0 = time.perf_counter()
    _, result = _eta_sweep()
    low, high = result.rows[0].mean_price_variance, result.rows[2].mean_price_variance
    assert high > low
    _stamp(7, f"mean price variance {high:.3f} at eta=1.5 > {low:.3f} at eta=0.5",
           time.perf_counter() - t0, 180.0)


def test_08_rls_equals_batch_and_stays_pd():
    """lambda=1 RLS equals ridge-1 batch fit; gains stay symmetric PD for 10k steps."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(8008)
    for trial in range(3):
        l = 3
        true_w = np.column_stack([rng.uniform(20, 60, l), rng.uniform(-2, 2, (l, l))])
        history = []
        for _ in range(80):
            prices = rng.uniform(0, 15, l)
            reg = np.concatenate(([1.0], prices))
            history.append(DemandObservation(prices, np.maximum(true_w @ reg, 0.0)))
        state = RlsState.initialize(l, forgetting=1.0, h0_scale=1.0)
        for obs in history:
            reg = np.concatenate(([1.0], obs.prices))
            for j in range(l):
                rls_update(state, j, reg, float(obs.demands[j]))
        for j in range(l):
            batch = fit_batch(history, j, ridge=1.0)
            assert np.max(np.abs(state.weights[j] - batch)) <= 1e-6

    state = RlsState.initialize(2, forgetting=0.99)
    for _ in range(10_000):
        reg = np.concatenate(([1.0], rng.uniform(0, 30, 2)))
        rls_update(state, 0, reg, float(rng.normal(40, 3)))
    h = state.gains[0]
    assert np.max(np.abs(h - h.T)) <= 1e-9
    assert np.linalg.eigvalsh(h).min() > 0
    _stamp(8, "RLS matches identity-prior batch fit to 1e-6; gain PD after 10k updates",
           time.perf_counter() - t0, 10.0)


def test_09_satisfaction_anchor():
    """Unit-weight satisfaction hits exactly 1.0 at 200 MWh and is concave."""
    t0 = time.perf_counter()
    params = EconomicParams(beta=1.0, omega=0.01, alpha=5e-5, mu=0.1, eta=0.5,
                            o_ref=40.0, capacity=200.0)
    assert satisfaction(200.0, params) == 1.0
    rng = np.random.default_rng(9009)
    for _ in range(100):
        a, b = rng.uniform(0, 200, 2)
        t = rng.uniform(0, 1)
        mid = satisfaction(t * a + (1 - t) * b, params)
        chord = t * satisfaction(a, params) + (1 - t) * satisfaction(b, params)
        assert mid >= chord - 1e-12
    _stamp(9, "satisfaction(200) == 1.0 exactly; concave on 100 random triples",
           time.perf_counter() - t0, 1.0)


def test_10_closed_loop_sanity():
    """Noise-free, perfect-model runs realize the planned utility; seeds reproduce."""
    t0 = time.perf_counter()
    scenario = synth_scenario(100, 24, "diurnal")
    model = make_model(100, 5)
    params = table1_params()
    market = TrueMarket(model, 0.0, seed=77)

    greedy_report = run_closed_loop(scenario, market, model, params,
                                    policy="greedy", initial_storage=100.0)
    greedy = greedy_plan(scenario, model, params, 100.0)
    assert abs(greedy_report.total_utility - greedy.total_utility) <= 1e-6 * abs(greedy.total_utility)

    dp_report = run_closed_loop(scenario, market, model, params,
                                policy="dp", grid=GridConfig(51), initial_storage=100.0)
    dp = dp_plan(scenario, model, params, 100.0, GridConfig(51))
    assert abs(dp_report.total_utility - dp.total_utility) <= 1e-6 * abs(dp.total_utility)

    noisy = TrueMarket(model, 4.0, seed=78)
    again = run_closed_loop(scenario, noisy, model, params, policy="greedy",
                            initial_storage=100.0)
    twice = run_closed_loop(scenario, noisy, model, params, policy="greedy",
                            initial_storage=100.0)
    assert report_json(again, scenario) == report_json(twice, scenario)
    _stamp(10, "noise-free runs realize planned utility; seeded reruns byte-identical",
           time.perf_counter() - t0, 60.0)


def test_11_complexity_scaling():
    """Greedy scales roughly linearly in N; DP no worse than quadratically."""
    t0 = time.perf_counter()
    params = table1_params()
    model = make_model(100, 5)

    def min_time(fn, reps):
        best = float("inf")
        for _ in range(reps):
            start = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - start)
        return best

    sc24 = synth_scenario(7, 24, "diurnal")
    sc48 = synth_scenario(7, 48, "diurnal")
    sc96 = synth_scenario(7, 96, "diurnal")

    g24 = min_time(lambda: greedy_plan(sc24, model, params, 100.0), reps=5)
    g96 = min_time(lambda: greedy_plan(sc96, model, params, 100.0), reps=5)
    ratio_greedy = g96 / g24
    assert 2.0 <= ratio_greedy <= 8.0

    d24 = min_time(lambda: dp_plan(sc24, model, params, 100.0, GridConfig(51)), reps=2)
    d48 = min_time(lambda: dp_plan(sc48, model, params, 100.0, GridConfig(51)), reps=2)
    ratio_dp = d48 / d24
    assert ratio_dp <= (48 / 24) ** 2 * 1.5
    _stamp(11, f"greedy 24->96h ratio {ratio_greedy:.2f} in [2, 8]; "
               f"dp 24->48h ratio {ratio_dp:.2f} <= 6",
           time.perf_counter() - t0, 600.0)
