"""Three-objective day-ahead dispatch of a grid-connected microgrid.

Decision layout (length 5T): generator output, battery charge, battery
discharge, demand response and renewable curtailment, one block of T periods
each. Objectives: operating cost, emissions, mean absolute grid ramp.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from trust_taea.core import Bounds, ConfigurationError
from trust_taea.problems.base import ProblemDef
from trust_taea.rng import stream
from trust_taea.structure import VariableStructure

BLOCKS = ("gen", "ch", "dis", "dr", "cur")
CONSTRAINTS = ("grid_nonnegative", "generator_ramp", "soc_bounds", "dr_energy", "terminal_soc")
SCALARS = (
    "gen_cost", "gen_emission", "battery_cost", "dr_cost", "cur_cost",
    "gen_max", "ch_max", "dis_max", "ramp_max", "dr_energy_max",
    "eta_ch", "eta_dis", "E_min", "E_max", "E_0", "epsilon",
)


@dataclass
class MicrogridScenario:
    load: np.ndarray  # kW
    renewable: np.ndarray  # kW
    grid_price: np.ndarray  # currency/kWh
    grid_emission: np.ndarray  # kg/kWh
    dr_max: np.ndarray  # kW
    gen_cost: float = 0.55
    gen_emission: float = 0.85
    battery_cost: float = 0.02
    dr_cost: float = 0.9
    cur_cost: float = 0.3
    gen_max: float = 150.0
    ch_max: float = 50.0
    dis_max: float = 50.0
    ramp_max: float = 30.0
    dr_energy_max: float = 250.0
    eta_ch: float = 0.95
    eta_dis: float = 0.95
    E_min: float = 60.0
    E_max: float = 300.0
    E_0: float = 180.0
    epsilon: float = 10.0
    header: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("load", "renewable", "grid_price", "grid_emission", "dr_max"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        T = len(self.load)
        if T < 2 or any(len(getattr(self, n)) != T for n in ("renewable", "grid_price", "grid_emission", "dr_max")):
            raise ConfigurationError("scenario vectors must share a length of at least 2")
        if not self.E_min <= self.E_0 <= self.E_max:
            raise ConfigurationError("need E_min <= E_0 <= E_max")
        if not (0 < self.eta_ch <= 1 and 0 < self.eta_dis <= 1):
            raise ConfigurationError("efficiencies must lie in (0, 1]")
        limits = [self.gen_max, self.ch_max, self.dis_max, self.ramp_max, self.dr_energy_max, self.epsilon]
        if min(limits) < 0 or np.any(self.dr_max < 0) or np.any(self.renewable < 0):
            raise ConfigurationError("device limits must be nonnegative")

    @property
    def T(self) -> int:
        return len(self.load)

    @property
    def dt(self) -> float:
        return 24.0 / self.T

    def totals(self) -> dict[str, float]:
        return {
            "load_kwh": float(self.load.sum() * self.dt),
            "renewable_kwh": float(self.renewable.sum() * self.dt),
        }

    def block_limits(self) -> np.ndarray:
        """Upper box limit per block and period, shape (5, T)."""
        T = self.T
        return np.vstack([
            np.full(T, self.gen_max), np.full(T, self.ch_max), np.full(T, self.dis_max),
            self.dr_max, self.renewable,
        ])


@dataclass
class Dispatch:
    """Decoded schedule of a batch of decision vectors, each array (n, T)."""

    gen: np.ndarray
    ch: np.ndarray
    dis: np.ndarray
    dr: np.ndarray
    cur: np.ndarray
    grid: np.ndarray
    soc: np.ndarray
    violations: dict[str, np.ndarray]
    objectives: np.ndarray

    @property
    def violation(self) -> np.ndarray:
        return sum(self.violations[c] for c in CONSTRAINTS)


def decode(X: np.ndarray, sc: MicrogridScenario) -> Dispatch:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    T = sc.T
    if X.shape[1] != 5 * T:
        raise ConfigurationError(f"decision length {X.shape[1]} != 5*T = {5 * T}")
    blocks = np.clip(X.reshape(len(X), 5, T), 0.0, sc.block_limits())
    gen, ch, dis, dr, cur = (blocks[:, k] for k in range(5))
    dt = sc.dt
    grid = sc.load - dr + ch + cur - (gen + dis + sc.renewable)
    f1 = dt * np.sum(
        sc.grid_price * grid + sc.gen_cost * gen + sc.battery_cost * (ch + dis) + sc.dr_cost * dr + sc.cur_cost * cur,
        axis=1,
    )
    f2 = dt * np.sum(sc.grid_emission * grid + sc.gen_emission * gen, axis=1)
    f3 = np.abs(np.diff(grid, axis=1)).sum(axis=1) / (T - 1)
    # same summation order as replay_soc, so a saved schedule replays bit-exactly
    soc = np.empty_like(ch)
    e = np.full(len(ch), float(sc.E_0))
    for t in range(T):
        e = e + sc.eta_ch * dt * ch[:, t] - dt / sc.eta_dis * dis[:, t]
        soc[:, t] = e
    violations = {
        "grid_nonnegative": np.maximum(-grid, 0.0).sum(axis=1),
        "generator_ramp": np.maximum(np.abs(np.diff(gen, axis=1)) - sc.ramp_max, 0.0).sum(axis=1),
        "soc_bounds": (np.maximum(sc.E_min - soc, 0.0) + np.maximum(soc - sc.E_max, 0.0)).sum(axis=1),
        "dr_energy": np.maximum(dt * dr.sum(axis=1) - sc.dr_energy_max, 0.0),
        "terminal_soc": np.maximum(np.abs(soc[:, -1] - sc.E_0) - sc.epsilon, 0.0),
    }
    return Dispatch(gen, ch, dis, dr, cur, grid, soc, violations, np.column_stack([f1, f2, f3]))


def microgrid_evaluate(x, scenario: MicrogridScenario) -> tuple[float, float, float, float]:
    d = decode(np.asarray(x)[None, :], scenario)
    f = d.objectives[0]
    return float(f[0]), float(f[1]), float(f[2]), float(d.violation[0])


def replay_soc(ch: np.ndarray, dis: np.ndarray, sc: MicrogridScenario) -> np.ndarray:
    """State of charge trajectory recomputed period by period."""
    soc = np.empty(len(ch))
    e = sc.E_0
    for t in range(len(ch)):
        e = e + sc.eta_ch * sc.dt * ch[t] - sc.dt / sc.eta_dis * dis[t]
        soc[t] = e
    return soc


@dataclass
class ProfileParams:
    """Closed-form daily profiles; the defaults integrate to roughly
    7180 kWh of load and 2460 kWh of renewable energy."""

    periods: int = 96
    load_base: float = 250.0
    load_midday: float = 95.0
    load_morning: float = 55.0
    load_evening: float = 120.0
    renewable_peak: float = 322.0
    sunrise: float = 6.0
    sunset: float = 18.0
    noise: float = 0.02
    price_offpeak: float = 0.35
    price_flat: float = 0.65
    price_peak: float = 1.05
    grid_emission: float = 0.60
    dr_share: float = 0.10


def generate_scenario(params: ProfileParams | None = None, seed: int = 0, **device) -> MicrogridScenario:
    """Synthetic representative day.

    load(h) = base + midday*bump(h; 13, 3) + morning*bump(h; 8.5, 1.5)
              + evening*bump(h; 19.5, 2), bump(h; c, w) = exp(-(h-c)^2 / (2 w^2))
    renewable(h) = peak * sin(pi (h - sunrise) / (sunset - sunrise)) in daylight, else 0
    Both carry multiplicative seeded noise of relative size ``noise``.
    """
    p = params or ProfileParams()
    T = p.periods
    dt = 24.0 / T
    h = (np.arange(T) + 0.5) * dt

    def bump(c, w):
        return np.exp(-((h - c) ** 2) / (2 * w * w))

    rng = stream(seed, 0, "scenario", 0)
    load = p.load_base + p.load_midday * bump(13.0, 3.0) + p.load_morning * bump(8.5, 1.5) + p.load_evening * bump(19.5, 2.0)
    load = load * (1.0 + p.noise * rng.standard_normal(T))
    day = (h > p.sunrise) & (h < p.sunset)
    solar = np.where(day, np.sin(np.pi * (h - p.sunrise) / (p.sunset - p.sunrise)), 0.0)
    renewable = np.clip(p.renewable_peak * solar * (1.0 + p.noise * rng.standard_normal(T)), 0.0, None)
    price = np.full(T, p.price_flat)
    price[(h < 7.0) | (h >= 23.0)] = p.price_offpeak
    price[((h >= 10.0) & (h < 12.0)) | ((h >= 17.0) & (h < 21.0))] = p.price_peak
    sc = MicrogridScenario(
        load=load, renewable=renewable, grid_price=price, grid_emission=np.full(T, p.grid_emission),
        dr_max=p.dr_share * load, **device,
    )
    sc.header = {"seed": seed, **sc.totals()}
    return sc


def write_scenario(sc: MicrogridScenario, path) -> None:
    path = Path(path)
    lines = [f"# {name}={repr(float(getattr(sc, name)))}" for name in SCALARS]
    for key, value in sc.totals().items():
        lines.append(f"# {key}={repr(value)}")
    lines.append("t,load_kw,re_kw,price,emission_factor,dr_max_kw")
    for t in range(sc.T):
        row = (sc.load[t], sc.renewable[t], sc.grid_price[t], sc.grid_emission[t], sc.dr_max[t])
        lines.append(",".join([str(t + 1)] + [repr(float(v)) for v in row]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scenario(path) -> MicrogridScenario:
    scalars: dict[str, float] = {}
    header: dict[str, float] = {}
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            key = key.strip()
            (scalars if key in SCALARS else header)[key] = float(value)
            continue
        if line.startswith("t,"):
            continue
        rows.append([float(v) for v in line.split(",")])
    data = np.array(rows)
    if data.ndim != 2 or data.shape[1] != 6:
        raise ConfigurationError(f"{path}: expected 6 scenario columns")
    known = {f.name for f in fields(MicrogridScenario)}
    sc = MicrogridScenario(
        load=data[:, 1], renewable=data[:, 2], grid_price=data[:, 3], grid_emission=data[:, 4], dr_max=data[:, 5],
        **{k: v for k, v in scalars.items() if k in known},
    )
    sc.header = header
    return sc


def make_microgrid(scenario: MicrogridScenario) -> ProblemDef:
    """Problem wrapper: generator block is the front group, the other four
    blocks are convergence groups targeting zero action."""
    T = scenario.T
    upper = scenario.block_limits().ravel()
    # periods with no headroom (e.g. curtailment at night) keep a unit box; decode clips them to 0
    upper = np.where(upper > 0, upper, 1.0)
    bounds = Bounds(np.zeros(5 * T), upper)
    groups = [np.arange(k * T, (k + 1) * T) for k in range(5)]
    structure = VariableStructure(groups, bounds, lambda X: np.zeros_like(X))

    def evaluate(X):
        d = decode(X, scenario)
        return d.objectives, d.violation

    return ProblemDef("microgrid", 3, 5 * T, bounds, evaluate, structure, None, constrained=True)
