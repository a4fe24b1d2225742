"""Market scenarios: hourly wholesale prices, renewable forecasts, economic parameters.

Hours are indexed 1..N throughout. Wholesale prices may be negative (real
day-ahead markets clear negative); loading such a series attaches a warning
instead of rejecting it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PARAM_KEYS = (
    "beta",
    "omega",
    "alpha",
    "mu",
    "eta",
    "o_ref",
    "o_max",
    "capacity",
    "terminal_salvage",
)


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario input."""


@dataclass(frozen=True)
class EconomicParams:
    """Weights and physical limits of the charging service provider.

    beta    weight of customer satisfaction in the stage utility
    omega   satisfaction shape (linear term)
    alpha   satisfaction shape (quadratic term)
    mu      weight of the wholesale-purchase deviation penalty
    eta     unit storage cost, $/MWh
    o_ref   reference wholesale purchase, MWh
    o_max   purchase cap per horizon, MWh
    capacity          storage capacity, MWh
    terminal_salvage  $/MWh credited to energy left in storage after the
                      last horizon
    """

    beta: float
    omega: float
    alpha: float
    mu: float
    eta: float
    o_ref: float
    capacity: float
    o_max: float | None = None
    terminal_salvage: float = 0.0

    def __post_init__(self):
        if self.o_max is None:
            object.__setattr__(self, "o_max", 2.0 * self.o_ref)
        vals = [getattr(self, k) for k in PARAM_KEYS]
        if not all(np.isfinite(v) for v in vals):
            raise ScenarioError("economic parameters must be finite")
        if self.alpha <= 0:
            raise ScenarioError("alpha must be > 0")
        if self.omega <= 0:
            raise ScenarioError("omega must be > 0")
        if self.capacity <= 0:
            raise ScenarioError("capacity must be > 0")
        if not 0 <= self.o_ref <= self.o_max:
            raise ScenarioError("require 0 <= o_ref <= o_max")
        for name in ("beta", "mu", "eta"):
            if getattr(self, name) < 0:
                raise ScenarioError(f"{name} must be >= 0")


@dataclass(frozen=True, eq=False)
class MarketScenario:
    """One planning day: wholesale price and renewable forecast per hour."""

    n_horizons: int
    wholesale_prices: np.ndarray
    renewable: np.ndarray
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_horizons < 1:
            raise ScenarioError("n_horizons must be >= 1")
        prices = np.asarray(self.wholesale_prices, dtype=float)
        renew = np.asarray(self.renewable, dtype=float)
        if prices.shape != (self.n_horizons,) or renew.shape != (self.n_horizons,):
            raise ScenarioError(
                "series lengths must equal n_horizons "
                f"(got {prices.shape[0]} prices, {renew.shape[0]} renewable, "
                f"n_horizons={self.n_horizons})"
            )
        if not (np.isfinite(prices).all() and np.isfinite(renew).all()):
            raise ScenarioError("scenario series must be finite")
        if (renew < 0).any():
            hour = int(np.argmin(renew)) + 1
            raise ScenarioError(f"renewable must be >= 0 (hour {hour})")
        prices.setflags(write=False)
        renew.setflags(write=False)
        object.__setattr__(self, "wholesale_prices", prices)
        object.__setattr__(self, "renewable", renew)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def slice_from(self, start_hour: int) -> "MarketScenario":
        """Sub-scenario covering hours start_hour..N (1-based)."""
        if not 1 <= start_hour <= self.n_horizons:
            raise ScenarioError(f"start_hour {start_hour} outside 1..{self.n_horizons}")
        i = start_hour - 1
        return MarketScenario(
            self.n_horizons - i,
            self.wholesale_prices[i:].copy(),
            self.renewable[i:].copy(),
        )


def _read_hourly_csv(path) -> np.ndarray:
    """Read a two-column `hour,value` file with consecutive hours 1..N."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ScenarioError(f"{path}: empty file")
    header = [c.strip().lower() for c in rows[0]]
    if header != ["hour", "value"]:
        raise ScenarioError(f"{path}: expected header 'hour,value', got {rows[0]}")
    seen: dict[int, float] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ScenarioError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            hour = int(row[0])
            value = float(row[1])
        except ValueError as exc:
            raise ScenarioError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
        if hour in seen:
            raise ScenarioError(f"{path}: duplicate hour index {hour}")
        seen[hour] = value
    if not seen:
        raise ScenarioError(f"{path}: no data rows")
    n = len(seen)
    missing = sorted(set(range(1, n + 1)) - set(seen))
    if missing:
        raise ScenarioError(f"{path}: missing hour index {missing[0]} (hours must run 1..N)")
    return np.array([seen[h] for h in range(1, n + 1)], dtype=float)


def load_scenario(price_source, renewable_source, params: EconomicParams) -> MarketScenario:
    """Build a scenario from two `hour,value` files.

    Negative wholesale prices are accepted with an attached warning.
    Renewable hours exceeding the storage capacity also warn (the planner
    may be forced to sell that energy within the hour).
    """
    prices = _read_hourly_csv(price_source)
    renew = _read_hourly_csv(renewable_source)
    if len(prices) != len(renew):
        raise ScenarioError(
            f"length mismatch: {len(prices)} price hours vs {len(renew)} renewable hours"
        )
    notes = []
    if (prices < 0).any():
        hours = [int(h) + 1 for h in np.flatnonzero(prices < 0)]
        notes.append(f"negative wholesale price at hours {hours}")
    if (renew > params.capacity).any():
        hours = [int(h) + 1 for h in np.flatnonzero(renew > params.capacity)]
        notes.append(f"renewable exceeds storage capacity at hours {hours}")
    return MarketScenario(len(prices), prices, renew, tuple(notes))


def synth_scenario(seed: int, n_horizons: int, profile: str) -> MarketScenario:
    """Deterministic synthetic scenario.

    `flat`: constant price, zero renewable. `diurnal`: price curve with an
    afternoon peak plus a solar series that is zero outside hours 8..17 and
    peaks at hour 13.
    """
    if n_horizons < 1:
        raise ScenarioError("n_horizons must be >= 1")
    if profile not in ("flat", "diurnal"):
        raise ScenarioError(f"unknown profile {profile!r} (use 'flat' or 'diurnal')")
    if profile == "flat":
        return MarketScenario(n_horizons, np.full(n_horizons, 30.0), np.zeros(n_horizons))

    rng = np.random.default_rng(seed)
    hours = np.arange(1, n_horizons + 1, dtype=float)

    base = 24.0 + 4.0 * rng.uniform(-1.0, 1.0)
    swing = 26.0 + 6.0 * rng.uniform(-1.0, 1.0)
    # afternoon bump centred near 17:00 with a smaller morning shoulder
    shape = np.exp(-((hours - 17.0) / 4.2) ** 2) + 0.35 * np.exp(-((hours - 9.0) / 2.6) ** 2)
    prices = base + swing * shape + rng.normal(0.0, 0.5, n_horizons)
    prices = np.maximum(prices, 1.0)

    amp = 24.0 + 8.0 * rng.uniform(-1.0, 1.0)
    window = (hours >= 8) & (hours <= 17)
    bump = np.where(window, np.cos(np.pi * (hours - 13.0) / 10.8) ** 2, 0.0)
    jitter = 1.0 + 0.02 * rng.uniform(-1.0, 1.0, n_horizons)
    renewable = amp * bump * jitter
    return MarketScenario(n_horizons, prices, renewable)


def load_params(path) -> EconomicParams:
    """Parse the flat `key = value` parameter file (keys: PARAM_KEYS)."""
    path = Path(path)
    found: dict[str, float] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in PARAM_KEYS:
            raise ScenarioError(f"{path}:{lineno}: unknown parameter key {key!r}")
        if key in found:
            raise ScenarioError(f"{path}:{lineno}: duplicate parameter key {key!r}")
        try:
            found[key] = float(raw.strip())
        except ValueError as exc:
            raise ScenarioError(f"{path}:{lineno}: non-numeric value for {key!r}") from exc
    missing = [k for k in PARAM_KEYS if k not in found]
    if missing:
        raise ScenarioError(f"{path}: missing parameter key {missing[0]!r}")
    return EconomicParams(**found)


def save_params(params: EconomicParams, path) -> None:
    lines = [f"{k} = {getattr(params, k)!r}" for k in PARAM_KEYS]
    Path(path).write_text("\n".join(lines) + "\n")


def save_series(values, path) -> None:
    """Write an `hour,value` file for a 1..N series."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "value"])
        for h, v in enumerate(np.asarray(values, dtype=float), start=1):
            writer.writerow([h, repr(float(v))])
