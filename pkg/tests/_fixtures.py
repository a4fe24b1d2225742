"""Shared test fixtures: parameter sets, elasticity models, tiny instances."""

import numpy as np

from chargeopt import EconomicParams, ElasticityModel, MarketScenario


def table1_params(beta=10000.0, eta=0.5, o_max=160.0, terminal_salvage=0.0, mu=0.1):
    """Simulation-scale parameters.

    o_max is not pinned by the published table; 4*o_ref leaves the purchase
    cap slack at beta=10000 so storage arbitrage is observable.
    """
    return EconomicParams(
        beta=beta, omega=0.01, alpha=5e-5, mu=mu, eta=eta,
        o_ref=40.0, capacity=200.0, o_max=o_max, terminal_salvage=terminal_salvage,
    )


def make_model(seed, n_stations=5, intercept_range=(45.0, 70.0)):
    """Random strictly-diagonally-dominant elasticity model."""
    rng = np.random.default_rng(seed)
    l = n_stations
    diag = -rng.uniform(1.6, 2.4, l)
    off = rng.uniform(0.04, 0.18, (l, l))
    off = (off + off.T) / 2.0
    a = off.copy()
    np.fill_diagonal(a, 0.0)
    row_off = a.sum(axis=1)
    scale = min(1.0, float(np.min(0.55 * np.abs(diag) / np.maximum(row_off, 1e-12))))
    a *= scale
    np.fill_diagonal(a, diag)
    intercepts = rng.uniform(*intercept_range, l)
    return ElasticityModel(l, intercepts, a)


def two_station_model():
    return ElasticityModel(
        2, np.array([100.0, 100.0]), np.array([[-10.0, 2.0], [2.0, -10.0]])
    )


def single_station_model(intercept=45.0, slope=-1.5):
    return ElasticityModel(1, np.array([float(intercept)]), np.array([[float(slope)]]))


def tiny_params(**overrides):
    """Small-scale economics for N=3, L=1 oracle instances."""
    base = dict(
        beta=800.0, omega=0.02, alpha=2e-4, mu=0.05, eta=0.5,
        o_ref=15.0, capacity=60.0, o_max=40.0, terminal_salvage=0.0,
    )
    base.update(overrides)
    return EconomicParams(**base)


def tiny_scenario(seed):
    rng = np.random.default_rng(seed)
    prices = rng.uniform(18.0, 48.0, 3)
    renewable = np.array([0.0, float(rng.uniform(0.0, 8.0)), 0.0])
    return MarketScenario(3, prices, renewable)


def random_feasible_decision(rng, model, params, storage, renewable):
    """Rejection-sample a decision satisfying the full constraint block."""
    caps_scale = float(model.intercepts.max()) / max(
        float(np.min(-np.diag(model.elasticity))), 1e-9
    )
    for _ in range(400):
        prices = rng.uniform(0.0, 0.8 * caps_scale, model.n_stations)
        demands = model.intercepts + model.elasticity @ prices
        if (demands < 0).any():
            continue
        phi = float(demands.sum())
        if phi > params.capacity:
            continue
        o_lo = max(0.0, phi - storage - renewable)
        o_hi = min(params.o_max, params.capacity + phi - storage - renewable)
        if o_lo > o_hi:
            continue
        o = float(rng.uniform(o_lo, o_hi))
        return prices, o
    raise AssertionError("could not sample a feasible decision")
