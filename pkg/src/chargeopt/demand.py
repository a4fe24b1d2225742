"""Price-elastic charging demand: linear cross-elasticity model and online estimation.

Station j's demand is affine in all stations' prices:

    d_j = intercept_j + sum_i A[j, i] * p_i

with A symmetric and non-positive on the diagonal (raising a station's own
price never raises its own demand). The matrix is tracked online with
per-station recursive least squares; `fit_batch` is the offline oracle.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DemandModelError(ValueError):
    """Invalid demand-model construction or update."""


@dataclass(frozen=True, eq=False)
class ElasticityModel:
    """Affine demand model: intercept vector plus signed elasticity matrix."""

    n_stations: int
    intercepts: np.ndarray
    elasticity: np.ndarray

    def __post_init__(self):
        g0 = np.asarray(self.intercepts, dtype=float)
        a = np.asarray(self.elasticity, dtype=float)
        l = self.n_stations
        if g0.shape != (l,) or a.shape != (l, l):
            raise DemandModelError(
                f"shape mismatch: intercepts {g0.shape}, elasticity {a.shape}, L={l}"
            )
        if not (np.isfinite(g0).all() and np.isfinite(a).all()):
            raise DemandModelError("model coefficients must be finite")
        if not np.array_equal(a, a.T):
            raise DemandModelError("elasticity matrix must be symmetric")
        if (np.diag(a) > 0).any():
            raise DemandModelError("own-price (diagonal) elasticities must be <= 0")
        if (g0 < 0).any():
            raise DemandModelError("intercepts must be >= 0")
        g0.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "intercepts", g0)
        object.__setattr__(self, "elasticity", a)


@dataclass(frozen=True, eq=False)
class DemandObservation:
    """Posted prices and realized demands for one horizon."""

    prices: np.ndarray
    demands: np.ndarray
    residuals: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        d = np.asarray(self.demands, dtype=float)
        if p.shape != d.shape or p.ndim != 1:
            raise DemandModelError("prices and demands must be 1-d and equal length")
        if (d < 0).any():
            raise DemandModelError("observed demands must be >= 0")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "demands", d)
        if self.residuals is not None:
            object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float))


def predict_demand(model: ElasticityModel, prices) -> np.ndarray:
    """Predicted demand per station; returned raw (may be negative)."""
    p = np.asarray(prices, dtype=float)
    if p.shape != (model.n_stations,):
        raise DemandModelError(
            f"price vector has shape {p.shape}, model expects ({model.n_stations},)"
        )
    return model.intercepts + model.elasticity @ p


class RlsState:
    """Per-station recursive least-squares state.

    Each station keeps a weight vector of length L+1 (intercept followed by
    the L price coefficients) and a symmetric positive-definite gain matrix.
    Gains start at `h0_scale` times the identity.
    """

    def __init__(self, weights: np.ndarray, gains: np.ndarray, forgetting: float = 1.0):
        weights = np.array(weights, dtype=float)
        gains = np.array(gains, dtype=float)
        if not 0 < forgetting <= 1:
            raise DemandModelError("forgetting factor must be in (0, 1]")
        l = weights.shape[0]
        if weights.shape != (l, l + 1) or gains.shape != (l, l + 1, l + 1):
            raise DemandModelError(
                f"inconsistent RLS shapes: weights {weights.shape}, gains {gains.shape}"
            )
        if not (np.isfinite(weights).all() and np.isfinite(gains).all()):
            raise DemandModelError("RLS state must be finite")
        self.weights = weights
        self.gains = gains
        self.forgetting = float(forgetting)

    @property
    def n_stations(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def initialize(cls, n_stations: int, forgetting: float = 1.0, h0_scale: float = 1.0):
        if h0_scale <= 0:
            raise DemandModelError("h0_scale must be > 0")
        weights = np.zeros((n_stations, n_stations + 1))
        gains = np.stack([h0_scale * np.eye(n_stations + 1)] * n_stations)
        return cls(weights, gains, forgetting)

    @classmethod
    def from_model(cls, model: ElasticityModel, forgetting: float = 1.0, h0_scale: float = 1.0):
        state = cls.initialize(model.n_stations, forgetting, h0_scale)
        state.weights[:, 0] = model.intercepts
        state.weights[:, 1:] = model.elasticity
        return state

    def copy(self) -> "RlsState":
        return RlsState(self.weights, self.gains, self.forgetting)


def rls_update(state: RlsState, station: int, regressor, observed: float) -> RlsState:
    """One recursive least-squares step for one station (mutates `state`).

    regressor is (1, p_1, ..., p_L). The gain matrix is re-symmetrized after
    the rank-one update so positive definiteness stays checkable.
    """
    p = np.asarray(regressor, dtype=float)
    if p.shape != (state.n_stations + 1,):
        raise DemandModelError(
            f"regressor has shape {p.shape}, expected ({state.n_stations + 1},)"
        )
    if not (np.isfinite(p).all() and np.isfinite(observed)):
        raise DemandModelError("RLS inputs must be finite")
    lam = state.forgetting
    h = state.gains[station]
    w = state.weights[station]
    err = float(observed) - p @ w
    hp = h @ p
    gain = hp / (lam + p @ hp)
    h_new = (h - np.outer(gain, hp)) / lam
    state.gains[station] = (h_new + h_new.T) / 2.0
    state.weights[station] = w + err * gain
    return state


def fit_batch(history, station: int, ridge: float = 0.0) -> np.ndarray:
    """Least-squares weights for one station from full observed history.

    Minimizes sum of squared residuals plus ridge * ||w||^2. With ridge = 0
    the design matrix must have full column rank.
    """
    if not history:
        raise DemandModelError("need at least one observation")
    if ridge < 0:
        raise DemandModelError("ridge must be >= 0")
    x = np.array([np.concatenate(([1.0], obs.prices)) for obs in history])
    y = np.array([obs.demands[station] for obs in history])
    n_coef = x.shape[1]
    if ridge == 0.0:
        if np.linalg.matrix_rank(x) < n_coef:
            raise DemandModelError(
                f"rank-deficient design ({len(history)} rows for {n_coef} coefficients); "
                "use ridge > 0"
            )
        return np.linalg.lstsq(x, y, rcond=None)[0]
    return np.linalg.solve(x.T @ x + ridge * np.eye(n_coef), x.T @ y)


def to_model(state: RlsState) -> tuple[ElasticityModel, bool]:
    """Assemble a valid ElasticityModel from RLS weights.

    The price-coefficient block is symmetrized as (A + A^T)/2; positive
    diagonal entries and negative intercepts are clamped to zero. Returns
    (model, clamped) where clamped reports whether any clamp fired.
    """
    intercepts = state.weights[:, 0].copy()
    raw = state.weights[:, 1:]
    a = (raw + raw.T) / 2.0
    diag = np.diag(a).copy()
    clamped = bool((diag > 0).any() or (intercepts < 0).any())
    np.fill_diagonal(a, np.minimum(diag, 0.0))
    intercepts = np.maximum(intercepts, 0.0)
    return ElasticityModel(state.n_stations, intercepts, a), clamped


def save_model(model: ElasticityModel, path) -> None:
    doc = {
        "n_stations": model.n_stations,
        "intercepts": [float(v) for v in model.intercepts],
        "elasticity": [[float(v) for v in row] for row in model.elasticity],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_model(path) -> ElasticityModel:
    doc = json.loads(Path(path).read_text())
    try:
        return ElasticityModel(
            int(doc["n_stations"]),
            np.array(doc["intercepts"], dtype=float),
            np.array(doc["elasticity"], dtype=float),
        )
    except KeyError as exc:
        raise DemandModelError(f"model file {path} missing field {exc}") from exc


def save_observations(history, path) -> None:
    """Write history as rows `horizon,station,p_1..p_L,demand` (1-based ids)."""
    history = list(history)
    if not history:
        raise DemandModelError("empty observation history")
    l = len(history[0].prices)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["horizon", "station"] + [f"p_{j}" for j in range(1, l + 1)] + ["demand"])
        for k, obs in enumerate(history, start=1):
            for j in range(l):
                writer.writerow(
                    [k, j + 1]
                    + [repr(float(p)) for p in obs.prices]
                    + [repr(float(obs.demands[j]))]
                )


def load_observations(path, n_stations: int) -> list[DemandObservation]:
    """Read the observation CSV back into per-horizon observations."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DemandModelError(f"{path}: no observation rows")
    expected = ["horizon", "station"] + [f"p_{j}" for j in range(1, n_stations + 1)] + ["demand"]
    header = [c.strip() for c in rows[0]]
    if header != expected:
        raise DemandModelError(
            f"{path}: header mismatch for {n_stations} stations (got {header})"
        )
    by_horizon: dict[int, dict] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != n_stations + 3:
            raise DemandModelError(f"{path}:{lineno}: expected {n_stations + 3} columns")
        try:
            k = int(row[0])
            j = int(row[1])
            prices = np.array([float(c) for c in row[2:-1]])
            demand = float(row[-1])
        except ValueError as exc:
            raise DemandModelError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
        if not 1 <= j <= n_stations:
            raise DemandModelError(f"{path}:{lineno}: station {j} outside 1..{n_stations}")
        entry = by_horizon.setdefault(k, {"prices": prices, "demands": {}})
        if not np.array_equal(entry["prices"], prices):
            raise DemandModelError(f"{path}:{lineno}: inconsistent prices within horizon {k}")
        if j in entry["demands"]:
            raise DemandModelError(f"{path}:{lineno}: duplicate station {j} in horizon {k}")
        entry["demands"][j] = demand
    history = []
    for k in sorted(by_horizon):
        entry = by_horizon[k]
        if len(entry["demands"]) != n_stations:
            raise DemandModelError(f"{path}: horizon {k} has incomplete station coverage")
        demands = np.array([entry["demands"][j] for j in range(1, n_stations + 1)])
        history.append(DemandObservation(entry["prices"], demands))
    return history
