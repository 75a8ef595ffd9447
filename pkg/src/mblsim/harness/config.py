"""Experiment configuration: a JSON document validated into a dataclass.

Top-level keys (all optional except ``experiment``; defaults come from
the experiment registry):

    experiment           one of the registry names
    initial_state        "neel" | "domain-wall" | explicit bitstring
    disorder_bounds_mhz  list of disorder half-widths
    n_realizations       ensemble size per bound
    seed                 base RNG seed (64-bit int)
    time_grid            {"stop_us", "n_points", "spacing": "linear"|"log",
                          "first_us" (log only)}
    evolution            {"mode": "unitary-sector" | "lindblad-dense" |
                          "lindblad-trajectory", "n_trajectories", "step_ns"}
    subsystem            list of 1-based qubit labels, or "q3-q7" / "q1-q5"
    shot_sampling        {"enabled", "n_shots"}
    output_dir           where the run directory is created
    device               inline device-parameter overrides
    device_file          path to a device-parameter JSON file
    params               experiment-specific extras
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..evolve import TimeGrid
from ..model import DeviceParams

MODES = ("unitary-sector", "lindblad-dense", "lindblad-trajectory")
NAMED_SUBSYSTEMS = {
    "q3-q7": (3, 4, 5, 6, 7),
    "q1-q5": (1, 2, 3, 4, 5),
}


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


@dataclass
class ExperimentConfig:
    experiment: str
    initial_state: str = "neel"
    disorder_bounds_mhz: tuple[float, ...] = (0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    n_realizations: int = 30
    seed: int = 42
    time_grid: dict = field(
        default_factory=lambda: {"stop_us": 1.0, "n_points": 101, "spacing": "linear"}
    )
    evolution: dict = field(
        default_factory=lambda: {
            "mode": "unitary-sector",
            "n_trajectories": 500,
            "step_ns": 1.0,
        }
    )
    subsystem: tuple[int, ...] = (3, 4, 5, 6, 7)
    shot_sampling: dict = field(
        default_factory=lambda: {"enabled": False, "n_shots": 3000}
    )
    output_dir: str = ""
    device: dict = field(default_factory=dict)
    device_file: str = ""
    params: dict = field(default_factory=dict)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, defaults: dict | None = None) -> "ExperimentConfig":
        if "experiment" not in data:
            raise ConfigError("config is missing the 'experiment' key")
        merged: dict = dict(defaults or {})
        for key, value in data.items():
            if key in ("time_grid", "evolution", "shot_sampling", "params") and isinstance(
                merged.get(key), dict
            ):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        known = set(cls.__dataclass_fields__)
        unknown = set(merged) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**merged)
        cfg._normalize()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path, defaults: dict | None = None) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.from_dict(data, defaults=defaults)

    def _normalize(self) -> None:
        if isinstance(self.subsystem, str):
            name = self.subsystem.lower()
            if name not in NAMED_SUBSYSTEMS:
                raise ConfigError(
                    f"unknown subsystem name {self.subsystem!r}; "
                    f"expected one of {sorted(NAMED_SUBSYSTEMS)} or a list of qubit labels"
                )
            self.subsystem = NAMED_SUBSYSTEMS[name]
        else:
            self.subsystem = tuple(int(q) for q in self.subsystem)
        self.disorder_bounds_mhz = tuple(float(b) for b in self.disorder_bounds_mhz)
        self.n_realizations = int(self.n_realizations)
        self.seed = int(self.seed)

    # -- validation and derived objects -----------------------------------

    def validate(self, known_experiments) -> None:
        if self.experiment not in known_experiments:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; "
                f"available: {', '.join(sorted(known_experiments))}"
            )
        n = self.device_params().n_sites
        if self.initial_state not in ("neel", "domain-wall"):
            bits = self.initial_state
            if set(bits) - {"0", "1"}:
                raise ConfigError(
                    f"initial_state must be 'neel', 'domain-wall', or a bitstring, "
                    f"got {bits!r}"
                )
            if len(bits) != n:
                raise ConfigError(
                    f"initial bitstring has {len(bits)} sites, device has {n}"
                )
        if any(b < 0 for b in self.disorder_bounds_mhz) or not self.disorder_bounds_mhz:
            raise ConfigError("disorder_bounds_mhz must be a nonempty list of values >= 0")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        self._validate_grid()
        self._validate_evolution()
        if not self.subsystem or len(set(self.subsystem)) != len(self.subsystem):
            raise ConfigError("subsystem must list distinct qubit labels")
        if any(not 1 <= q <= n for q in self.subsystem):
            raise ConfigError(f"subsystem labels must lie in 1..{n}")
        shots = self.shot_sampling
        if set(shots) - {"enabled", "n_shots"}:
            raise ConfigError("shot_sampling accepts only 'enabled' and 'n_shots'")
        if shots.get("enabled") and int(shots.get("n_shots", 0)) < 1:
            raise ConfigError("shot sampling needs n_shots >= 1")

    def _validate_grid(self) -> None:
        g = self.time_grid
        unknown = set(g) - {"stop_us", "n_points", "spacing", "first_us"}
        if unknown:
            raise ConfigError(f"unknown time_grid keys: {sorted(unknown)}")
        spacing = g.get("spacing", "linear")
        if spacing not in ("linear", "log"):
            raise ConfigError("time_grid spacing must be 'linear' or 'log'")
        if float(g.get("stop_us", 1.0)) <= 0:
            raise ConfigError("time_grid stop_us must be positive")
        if int(g.get("n_points", 101)) < 2:
            raise ConfigError("time_grid needs at least 2 points")
        if spacing == "log" and float(g.get("first_us", 0.01)) <= 0:
            raise ConfigError("log grid first_us must be positive")

    def _validate_evolution(self) -> None:
        ev = self.evolution
        unknown = set(ev) - {"mode", "n_trajectories", "step_ns"}
        if unknown:
            raise ConfigError(f"unknown evolution keys: {sorted(unknown)}")
        mode = ev.get("mode", "unitary-sector")
        if mode not in MODES:
            raise ConfigError(f"evolution mode must be one of {MODES}, got {mode!r}")
        step = float(ev.get("step_ns", 1.0))
        if step <= 0:
            raise ConfigError("step_ns must be positive")
        if mode == "lindblad-dense" and step > 1.0 + 1e-12:
            raise ConfigError("lindblad-dense requires step_ns <= 1.0")
        if mode == "lindblad-trajectory" and int(ev.get("n_trajectories", 0)) < 1:
            raise ConfigError("lindblad-trajectory needs n_trajectories >= 1")

    # -- accessors ---------------------------------------------------------

    def device_params(self) -> DeviceParams:
        if self.device_file and self.device:
            raise ConfigError("give either 'device' or 'device_file', not both")
        try:
            if self.device_file:
                return DeviceParams.from_json(self.device_file)
            if self.device:
                return DeviceParams.from_dict(self.device)
            return DeviceParams.default()
        except (OSError, ValueError) as exc:
            raise ConfigError(f"invalid device parameters: {exc}") from exc

    def build_grid(self) -> TimeGrid:
        g = self.time_grid
        stop = float(g.get("stop_us", 1.0))
        n = int(g.get("n_points", 101))
        if g.get("spacing", "linear") == "log":
            return TimeGrid.logarithmic(float(g.get("first_us", 0.01)), stop, n)
        return TimeGrid.linear(stop, n)

    @property
    def mode(self) -> str:
        return self.evolution.get("mode", "unitary-sector")

    @property
    def step_us(self) -> float:
        return float(self.evolution.get("step_ns", 1.0)) * 1e-3

    @property
    def n_trajectories(self) -> int:
        return int(self.evolution.get("n_trajectories", 500))

    def subsystem_sites(self) -> tuple[int, ...]:
        """0-based site indices of the configured subsystem."""
        return tuple(q - 1 for q in self.subsystem)

    def initial_occupations(self) -> tuple[int, ...]:
        from ..model import domain_wall_occupations, neel_occupations

        n = self.device_params().n_sites
        if self.initial_state == "neel":
            return neel_occupations(n)
        if self.initial_state == "domain-wall":
            return domain_wall_occupations(n)
        return tuple(i for i, b in enumerate(self.initial_state) if b == "1")

    def canonical_dict(self) -> dict:
        """A plain JSON-able snapshot with normalized values."""
        return {
            "experiment": self.experiment,
            "initial_state": self.initial_state,
            "disorder_bounds_mhz": list(self.disorder_bounds_mhz),
            "n_realizations": self.n_realizations,
            "seed": self.seed,
            "time_grid": dict(self.time_grid),
            "evolution": dict(self.evolution),
            "subsystem": list(self.subsystem),
            "shot_sampling": dict(self.shot_sampling),
            "output_dir": self.output_dir,
            "device": dict(self.device),
            "device_file": self.device_file,
            "params": dict(self.params),
        }
