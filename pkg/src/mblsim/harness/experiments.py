"""Experiment catalog and the end-to-end runner.

Each experiment maps a validated config to a set of CSV files (canonical
outputs), a ``run.json`` sidecar (config snapshot plus structured
summaries and matrices), and a plain-text manifest with per-file
checksums.  Workers are parallelized over (disorder bound, realization)
items; aggregation happens in fixed index order so outputs are
bit-identical for any worker count.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from .. import __version__
from ..evolve import (
    CollapseChannel,
    TimeGrid,
    collapse_channels,
    evolve_pure,
    iter_trajectories,
    lindblad_evolve,
)
from ..fermion import (
    correlation_series,
    entropy_from_correlation,
    initial_correlation,
    single_particle_hamiltonian,
)
from ..model import (
    DisorderSpec,
    build_hamiltonian,
    derive_couplings,
    full_basis,
    restrict_nearest_neighbor,
    sample_disorder,
    sector_basis,
)
from ..observables import (
    ensemble_stats,
    delta_n,
    imbalance_domain,
    imbalance_neel,
    matrix_to_json,
    sample_shots,
    site_probabilities,
    site_probability_series,
    trace_distance,
    von_neumann_entropy,
    write_series_csv,
)
from ..observables import _reduce_density_pure, _reduce_density_matrix
from ..rng import SHOT_STREAM, seed_for
from ..state import product_state
from .config import ConfigError, ExperimentConfig
from .manifest import RunManifest
from .parallel import map_indexed
from .summary import final_sample_summary, logfit_entropy, quasi_steady_summary


def _fmt(x) -> str:
    return repr(float(x))


def _bound_tag(bound: float) -> str:
    return f"dh{bound:g}"


def _bound_key(bound: float) -> int:
    return round(bound * 1_000_000)


def _clip_window(window, grid: TimeGrid) -> tuple[float, float]:
    """Clamp a summary window to the sampled range (short smoke grids)."""
    t_end = float(grid.times[-1])
    lo, hi = float(window[0]), float(window[1])
    return min(lo, t_end), min(hi, t_end)


# ---------------------------------------------------------------------------
# Shared simulation helpers
# ---------------------------------------------------------------------------


def _cfg(cfg_dict: dict) -> ExperimentConfig:
    return ExperimentConfig.from_dict(cfg_dict)


def _disordered_model(cfg: ExperimentConfig, bound: float, k: int):
    device = cfg.device_params()
    model = derive_couplings(device)
    spec = DisorderSpec(bound=bound, n_realizations=cfg.n_realizations, seed=cfg.seed)
    return device, model.with_disorder(sample_disorder(spec, k, device.n_sites))


def _evolved_pure_states(cfg: ExperimentConfig, model, grid: TimeGrid):
    occupied = cfg.initial_occupations()
    basis = sector_basis(model.n_sites, len(occupied))
    psi0 = product_state(occupied, model.n_sites, sector=True)
    H = build_hamiltonian(model, basis)
    return evolve_pure(H, psi0, grid)


def _reduced_series(cfg: ExperimentConfig, device, model, grid: TimeGrid, keep, bound, k):
    """Reduced density matrices on ``keep`` at every grid time.

    Dispatches on the configured evolution mode; the trajectory mode
    accumulates the (linear) partial trace per trajectory instead of the
    full density matrix, which keeps 10-qubit runs in memory budget.
    """
    n = model.n_sites
    mode = cfg.mode
    if mode == "unitary-sector":
        states = _evolved_pure_states(cfg, model, grid)
        return [_reduce_density_pure(s.in_full_basis().data, keep, n) for s in states]
    occupied = cfg.initial_occupations()
    psi0 = product_state(occupied, n, sector=False)
    H = build_hamiltonian(model, full_basis(n))
    channels = collapse_channels(device)
    if mode == "lindblad-dense":
        rhos = lindblad_evolve(H, psi0, channels, grid, step_us=cfg.step_us)
        return [_reduce_density_matrix(r.data, keep, n) for r in rhos]
    n_traj = cfg.n_trajectories
    acc = np.zeros((len(grid), 2 ** len(keep), 2 ** len(keep)), dtype=complex)
    for states in iter_trajectories(
        H, psi0, channels, grid, n_traj, cfg.seed,
        step_us=cfg.step_us, key=(_bound_key(bound), k),
    ):
        for t_idx in range(len(grid)):
            acc[t_idx] += _reduce_density_pure(states[t_idx], keep, n)
    return list(acc / n_traj)


# ---------------------------------------------------------------------------
# Imbalance experiments
# ---------------------------------------------------------------------------


def _work_imbalance(cfg_dict: dict, bound: float, k: int) -> dict:
    cfg = _cfg(cfg_dict)
    device, model = _disordered_model(cfg, bound, k)
    grid = cfg.build_grid()
    states = _evolved_pure_states(cfg, model, grid)
    probs = site_probability_series(states)
    out = {"probs": probs}
    if cfg.shot_sampling.get("enabled"):
        n_shots = int(cfg.shot_sampling["n_shots"])
        basis = states[0].basis
        shot_probs = np.empty_like(probs)
        for t_idx, st in enumerate(states):
            p = np.abs(st.data) ** 2
            counts = sample_shots(
                p / p.sum(), n_shots,
                seed_for(cfg.seed, SHOT_STREAM, _bound_key(bound), k, t_idx),
            )
            shot_probs[t_idx] = (counts / n_shots) @ basis.occupations
        out["shot_probs"] = shot_probs
    return out


def _run_imbalance(cfg: ExperimentConfig, run_dir: Path, workers: int):
    imbalance = imbalance_domain if cfg.experiment == "imbalance-domain" else imbalance_neel
    grid = cfg.build_grid()
    window = _clip_window(cfg.params.get("window_us", (0.25, 1.0)), grid)
    cfg_dict = cfg.canonical_dict()
    items = [(cfg_dict, b, k) for b in cfg.disorder_bounds_mhz
             for k in range(1, cfg.n_realizations + 1)]
    results = map_indexed(_work_imbalance, items, workers)

    files: list[str] = []
    summary_rows = []
    for b_idx, bound in enumerate(cfg.disorder_bounds_mhz):
        chunk = results[b_idx * cfg.n_realizations:(b_idx + 1) * cfg.n_realizations]
        probs = np.array([r["probs"] for r in chunk])  # (K, T, n)
        tag = _bound_tag(bound)

        name = f"probs_{tag}.csv"
        _write_site_table(run_dir / name, grid, probs.mean(axis=0), "p")
        files.append(name)

        series = {}
        for label, fn in (("imbalance", imbalance), ("delta_n", delta_n)):
            values = np.array([[fn(p) for p in probs[i]] for i in range(len(chunk))])
            series[label] = ensemble_stats(grid, values)
            name = f"{label}_{tag}.csv"
            write_series_csv(run_dir / name, series[label])
            files.append(name)

        if cfg.shot_sampling.get("enabled"):
            shot_probs = np.array([r["shot_probs"] for r in chunk])
            for label, fn in (("imbalance", imbalance), ("delta_n", delta_n)):
                values = np.array(
                    [[fn(p) for p in shot_probs[i]] for i in range(len(chunk))]
                )
                name = f"{label}_shots_{tag}.csv"
                write_series_csv(run_dir / name, ensemble_stats(grid, values))
                files.append(name)

        row = {"bound_mhz": bound}
        for label in ("imbalance", "delta_n"):
            qs = quasi_steady_summary(series[label], window)
            fin = final_sample_summary(series[label])
            row[f"{label}_qs_mean"] = qs.mean
            row[f"{label}_qs_sd"] = qs.sd
            row[f"{label}_final_mean"] = fin.mean
            row[f"{label}_final_sd"] = fin.sd
        summary_rows.append(row)

    name = "crossover_summary.csv"
    _write_dict_rows(run_dir / name, summary_rows)
    files.append(name)
    return files, {"crossover_summary": summary_rows, "window_us": list(window)}


def _write_site_table(path: Path, grid: TimeGrid, table: np.ndarray, prefix: str):
    n = table.shape[1]
    header = ["time_us"] + [f"{prefix}{i + 1:02d}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t_idx, t in enumerate(grid.times):
            writer.writerow([_fmt(t)] + [_fmt(v) for v in table[t_idx]])


def _write_dict_rows(path: Path, rows: list[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(rows[0].keys()))
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row.values()])


# ---------------------------------------------------------------------------
# ETH reduced-matrix experiment
# ---------------------------------------------------------------------------


def _eth_subsystems(cfg: ExperimentConfig) -> list[tuple[str, tuple[int, ...]]]:
    subs = cfg.params.get("subsystems", [[3], [3, 4], [3, 4, 5, 6, 7]])
    out = []
    for qubits in subs:
        label = "-".join(f"q{q}" for q in qubits)
        out.append((label, tuple(int(q) - 1 for q in qubits)))
    return out


def _work_eth(cfg_dict: dict, bound: float, k: int) -> dict:
    cfg = _cfg(cfg_dict)
    device, model = _disordered_model(cfg, bound, k)
    times = sorted(set([0.0] + [float(t) for t in cfg.params.get("times_us", [0.0, 0.3, 1.0])]))
    grid = TimeGrid(np.asarray(times))
    out = {}
    for label, keep in _eth_subsystems(cfg):
        out[label] = _reduced_series(cfg, device, model, grid, keep, bound, k)
    return out


def _run_eth(cfg: ExperimentConfig, run_dir: Path, workers: int):
    times = sorted(set([0.0] + [float(t) for t in cfg.params.get("times_us", [0.0, 0.3, 1.0])]))
    cfg_dict = cfg.canonical_dict()
    items = [(cfg_dict, b, k) for b in cfg.disorder_bounds_mhz
             for k in range(1, cfg.n_realizations + 1)]
    results = map_indexed(_work_eth, items, workers)

    occupied = cfg.initial_occupations()
    matrices: dict = {}
    distance_rows = []
    for b_idx, bound in enumerate(cfg.disorder_bounds_mhz):
        chunk = results[b_idx * cfg.n_realizations:(b_idx + 1) * cfg.n_realizations]
        matrices[_bound_tag(bound)] = {}
        for label, keep in _eth_subsystems(cfg):
            d = 2 ** len(keep)
            mixed = np.eye(d) / d
            initial_bits = "".join("1" if s in occupied else "0" for s in keep)
            initial = np.zeros((d, d))
            initial[int(initial_bits, 2), int(initial_bits, 2)] = 1.0
            per_time = {}
            for t_idx, t in enumerate(times):
                stack = np.array([chunk[i][label][t_idx] for i in range(len(chunk))])
                mean_rho = stack.mean(axis=0)
                per_time[f"{t:g}us"] = {
                    "mean": matrix_to_json(mean_rho),
                    "abs_of_mean": np.abs(mean_rho).tolist(),
                    "mean_of_abs": np.abs(stack).mean(axis=0).tolist(),
                }
                distance_rows.append(
                    {
                        "bound_mhz": bound,
                        "time_us": t,
                        "subsystem": label,
                        "n_qubits": len(keep),
                        "dist_to_mixed": trace_distance(mean_rho, mixed),
                        "dist_to_initial": trace_distance(mean_rho, initial),
                    }
                )
            matrices[_bound_tag(bound)][label] = per_time

    files = ["trace_distances.csv"]
    _write_dict_rows(run_dir / "trace_distances.csv", distance_rows)
    return files, {"matrices": matrices, "trace_distances": distance_rows}


# ---------------------------------------------------------------------------
# Entropy experiments
# ---------------------------------------------------------------------------


def _work_entropy(cfg_dict: dict, bound: float, k: int) -> dict:
    cfg = _cfg(cfg_dict)
    device, model = _disordered_model(cfg, bound, k)
    grid = cfg.build_grid()
    keep = cfg.subsystem_sites()
    rhos = _reduced_series(cfg, device, model, grid, keep, bound, k)
    entropy = np.array([von_neumann_entropy(r) for r in rhos])
    from ..observables import site_averaged_entropy

    site_avg = np.array(
        [site_averaged_entropy(rhos[-1], nk) for nk in range(1, len(keep) + 1)]
    )
    return {"entropy": entropy, "site_avg": site_avg}


def _fit_window(window, grid: TimeGrid) -> tuple[float, float]:
    """Clipped window with at least 3 positive-time samples when possible."""
    lo, hi = _clip_window(window, grid)
    positive = grid.times[grid.times > 0]
    if ((positive >= lo - 1e-12) & (positive <= hi + 1e-12)).sum() < 3 and positive.size >= 3:
        return float(positive[0]), float(positive[-1])
    return lo, hi


def _run_entropy(cfg: ExperimentConfig, run_dir: Path, workers: int):
    grid = cfg.build_grid()
    window = _fit_window(cfg.params.get("window_us", (0.25, 1.0)), grid)
    cfg_dict = cfg.canonical_dict()
    items = [(cfg_dict, b, k) for b in cfg.disorder_bounds_mhz
             for k in range(1, cfg.n_realizations + 1)]
    results = map_indexed(_work_entropy, items, workers)

    files: list[str] = []
    siteavg_rows = []
    logfit_rows = []
    for b_idx, bound in enumerate(cfg.disorder_bounds_mhz):
        chunk = results[b_idx * cfg.n_realizations:(b_idx + 1) * cfg.n_realizations]
        series = ensemble_stats(grid, np.array([r["entropy"] for r in chunk]))
        tag = _bound_tag(bound)
        name = f"entropy_{tag}.csv"
        write_series_csv(run_dir / name, series)
        files.append(name)

        site_avg = np.array([r["site_avg"] for r in chunk])  # (K, n_keep)
        for nk in range(site_avg.shape[1]):
            siteavg_rows.append(
                {
                    "bound_mhz": bound,
                    "n_sites_kept": nk + 1,
                    "mean": site_avg[:, nk].mean(),
                    "sd": site_avg[:, nk].std(),
                    "volume_law": (nk + 1) * np.log(2.0),
                }
            )
        fit = logfit_entropy(series, window)
        logfit_rows.append(
            {
                "bound_mhz": bound,
                "slope": fit.slope,
                "slope_sd": fit.slope_sd,
                "intercept": fit.intercept,
                "window_lo_us": window[0],
                "window_hi_us": window[1],
            }
        )

    _write_dict_rows(run_dir / "site_averaged_entropy.csv", siteavg_rows)
    files.append("site_averaged_entropy.csv")
    _write_dict_rows(run_dir / "entropy_logfit.csv", logfit_rows)
    files.append("entropy_logfit.csv")
    return files, {"site_averaged_entropy": siteavg_rows, "logfit": logfit_rows}


def _work_comparison(cfg_dict: dict, bound: float, k: int) -> dict:
    cfg = _cfg(cfg_dict)
    device, model = _disordered_model(cfg, bound, k)
    grid = cfg.build_grid()
    keep = cfg.subsystem_sites()
    rhos = _reduced_series(cfg, device, model, grid, keep, bound, k)
    s_long = np.array([von_neumann_entropy(r) for r in rhos])
    # paired single-particle baseline: same fields and disorder, open chain
    nn_model = restrict_nearest_neighbor(model, keep_ring_pair=False)
    h_sp = single_particle_hamiltonian(nn_model)
    C0 = initial_correlation(cfg.initial_occupations(), model.n_sites)
    s_nn = np.array(
        [
            entropy_from_correlation(C, keep)
            for C in correlation_series(h_sp, C0, grid.times)
        ]
    )
    return {"long_range": s_long, "nearest_neighbor": s_nn}


def _run_comparison(cfg: ExperimentConfig, run_dir: Path, workers: int):
    grid = cfg.build_grid()
    window = _fit_window(cfg.params.get("window_us", (0.25, 1.0)), grid)
    cfg_dict = cfg.canonical_dict()
    items = [(cfg_dict, b, k) for b in cfg.disorder_bounds_mhz
             for k in range(1, cfg.n_realizations + 1)]
    results = map_indexed(_work_comparison, items, workers)

    files: list[str] = []
    slope_rows = []
    for b_idx, bound in enumerate(cfg.disorder_bounds_mhz):
        chunk = results[b_idx * cfg.n_realizations:(b_idx + 1) * cfg.n_realizations]
        tag = _bound_tag(bound)
        for label in ("long_range", "nearest_neighbor"):
            series = ensemble_stats(grid, np.array([r[label] for r in chunk]))
            name = f"entropy_{label}_{tag}.csv"
            write_series_csv(run_dir / name, series)
            files.append(name)
            fit = logfit_entropy(series, window)
            slope_rows.append(
                {
                    "model": label,
                    "bound_mhz": bound,
                    "slope": fit.slope,
                    "slope_sd": fit.slope_sd,
                    "window_lo_us": window[0],
                    "window_hi_us": window[1],
                }
            )
    _write_dict_rows(run_dir / "slopes.csv", slope_rows)
    files.append("slopes.csv")
    return files, {"slopes": slope_rows}


# ---------------------------------------------------------------------------
# Swap calibration (coupled-qubit dephasing characterization)
# ---------------------------------------------------------------------------


def _run_swap(cfg: ExperimentConfig, run_dir: Path, workers: int):
    from ..model import submodel

    device = cfg.device_params()
    qubits = [int(q) for q in cfg.params.get("qubits", [7, 8])]
    t_phi_list = [float(v) for v in cfg.params.get("t_phi_us", [30.0, 20.0, 10.0, 5.0])]
    sites = [q - 1 for q in qubits]
    if any(not 0 <= s < device.n_sites for s in sites):
        raise ConfigError(f"swap qubits must lie in 1..{device.n_sites}")
    model = submodel(derive_couplings(device), sites)
    ns = len(sites)
    basis = full_basis(ns)
    H = build_hamiltonian(model, basis)
    # first listed qubit starts excited
    psi0 = product_state([0], ns, sector=False)
    grid = cfg.build_grid()

    columns: dict[str, np.ndarray] = {}
    for t_phi in t_phi_list:
        channels = []
        for local, q in enumerate(qubits):
            channels.append(
                CollapseChannel(local, "relaxation", 1.0 / float(device.t1[q - 1]))
            )
            channels.append(CollapseChannel(local, "dephasing", 1.0 / (2.0 * t_phi)))
        rhos = lindblad_evolve(H, psi0, channels, grid, step_us=cfg.step_us)
        probs = np.array([site_probabilities(r) for r in rhos])
        for local, q in enumerate(qubits):
            columns[f"q{q}_tphi{t_phi:g}"] = probs[:, local]
    closed = site_probability_series(
        evolve_pure(build_hamiltonian(model, sector_basis(ns, 1)),
                    product_state([0], ns, sector=True), grid)
    )
    for local, q in enumerate(qubits):
        columns[f"q{q}_closed"] = closed[:, local]

    name = "swap_probabilities.csv"
    with open(run_dir / name, "w", newline="") as fh:
        writer = csv.writer(fh)
        keys = list(columns)
        writer.writerow(["time_us"] + keys)
        for t_idx, t in enumerate(grid.times):
            writer.writerow([_fmt(t)] + [_fmt(columns[key][t_idx]) for key in keys])
    return [name], {"qubits": qubits, "t_phi_us": t_phi_list}


# ---------------------------------------------------------------------------
# Post-selection comparison
# ---------------------------------------------------------------------------


def _work_postselect(cfg_dict: dict, bound: float, k: int) -> dict:
    cfg = _cfg(cfg_dict)
    device, model = _disordered_model(cfg, bound, k)
    grid = cfg.build_grid()
    n = model.n_sites
    occupied = cfg.initial_occupations()
    m = len(occupied)
    basis = full_basis(n)
    psi0 = product_state(occupied, n, sector=False)
    H = build_hamiltonian(model, basis)
    channels = collapse_channels(device)
    occ = basis.occupations
    in_sector = occ.sum(axis=1) == m
    occ_sector = occ * in_sector[:, None]

    if cfg.mode == "lindblad-dense":
        rhos = lindblad_evolve(H, psi0, channels, grid, step_us=cfg.step_us)
        raw = np.array([np.diag(r.data).real @ occ for r in rhos])
        num = np.array([np.diag(r.data).real @ occ_sector for r in rhos])
        den = np.array([(np.diag(r.data).real * in_sector).sum() for r in rhos])
    else:
        n_traj = cfg.n_trajectories
        raw = np.zeros((len(grid), n))
        num = np.zeros((len(grid), n))
        den = np.zeros(len(grid))
        for states in iter_trajectories(
            H, psi0, channels, grid, n_traj, cfg.seed,
            step_us=cfg.step_us, key=(_bound_key(bound), k),
        ):
            weights = np.abs(states) ** 2  # (T, dim)
            raw += weights @ occ
            num += weights @ occ_sector
            den += weights @ in_sector
        raw /= n_traj
        num /= n_traj
        den /= n_traj
    selected = num / den[:, None]
    return {"raw": raw, "selected": selected}


def _run_postselect(cfg: ExperimentConfig, run_dir: Path, workers: int):
    grid = cfg.build_grid()
    cfg_dict = cfg.canonical_dict()
    items = [(cfg_dict, b, k) for b in cfg.disorder_bounds_mhz
             for k in range(1, cfg.n_realizations + 1)]
    results = map_indexed(_work_postselect, items, workers)
    files: list[str] = []
    for b_idx, bound in enumerate(cfg.disorder_bounds_mhz):
        chunk = results[b_idx * cfg.n_realizations:(b_idx + 1) * cfg.n_realizations]
        tag = _bound_tag(bound)
        for key, label in (("raw", "raw"), ("selected", "selected")):
            probs = np.array([r[key] for r in chunk]).mean(axis=0)
            name = f"magnetization_{label}_{tag}.csv"
            # sigma-z expectation: 2P - 1
            _write_site_table(run_dir / name, grid, 2.0 * probs - 1.0, "sz")
            files.append(name)
    return files, {}


# ---------------------------------------------------------------------------
# Registry and runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    defaults: dict
    runner: Callable[[ExperimentConfig, Path, int], tuple[list[str], dict]]


EXPERIMENTS: dict[str, Experiment] = {}


def _register(name, description, runner, **defaults):
    defaults.setdefault("output_dir", f"runs/{name}")
    EXPERIMENTS[name] = Experiment(name, description, {"experiment": name, **defaults}, runner)


_register(
    "imbalance-neel",
    "Disorder sweep of site probabilities, imbalance, and delta_n from the alternating initial state",
    _run_imbalance,
)
_register(
    "imbalance-domain",
    "Disorder sweep of left/right imbalance from the domain-wall initial state",
    _run_imbalance,
    initial_state="domain-wall",
)
_register(
    "eth-matrices",
    "Ensemble-averaged reduced density matrices (1-, 2-, 5-qubit) vs thermal and initial forms",
    _run_eth,
    disorder_bounds_mhz=(0.0, 12.0),
    params={"times_us": [0.0, 0.3, 1.0]},
)
_register(
    "entropy",
    "Half-chain entanglement entropy dynamics, site-averaged entropy, and log-time fits",
    _run_entropy,
    time_grid={"stop_us": 1.0, "n_points": 30, "spacing": "log", "first_us": 0.01},
)
_register(
    "entropy-comparison",
    "Paired long-range vs nearest-neighbor (single-particle) entropy growth at strong disorder",
    _run_comparison,
    disorder_bounds_mhz=(12.0,),
)
_register(
    "swap-calibration",
    "Damped two- or three-qubit excitation swap for dephasing-time characterization",
    _run_swap,
    evolution={"mode": "lindblad-dense", "step_ns": 1.0},
    time_grid={"stop_us": 1.0, "n_points": 201, "spacing": "linear"},
    params={"qubits": [7, 8], "t_phi_us": [30.0, 20.0, 10.0, 5.0]},
)
_register(
    "post-selection",
    "Single-site magnetization with and without excitation-number post-selection under decoherence",
    _run_postselect,
    disorder_bounds_mhz=(0.0, 12.0),
    n_realizations=10,
    evolution={"mode": "lindblad-trajectory", "n_trajectories": 100, "step_ns": 1.0},
)


def default_config(experiment: str) -> dict:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    return json.loads(json.dumps(EXPERIMENTS[experiment].defaults))


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a config file, merging registry defaults for its experiment."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "experiment" not in raw:
        raise ConfigError("config document must be a JSON object with an 'experiment' key")
    if raw["experiment"] not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {raw['experiment']!r}; "
            f"available: {', '.join(sorted(EXPERIMENTS))}"
        )
    defaults = default_config(raw["experiment"])
    cfg = ExperimentConfig.from_dict(raw, defaults=defaults)
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate(EXPERIMENTS)
    return cfg


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> tuple[Path, RunManifest]:
    """Run one experiment end to end; returns the run directory and manifest."""
    cfg.validate(EXPERIMENTS)
    run_dir = Path(cfg.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    files, extras = EXPERIMENTS[cfg.experiment].runner(cfg, run_dir, workers)

    config_snapshot = cfg.canonical_dict()
    (run_dir / "config.json").write_text(
        json.dumps(config_snapshot, sort_keys=True, indent=2) + "\n"
    )
    sidecar = {"config": config_snapshot, "outputs": extras, "files": sorted(files)}
    (run_dir / "run.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
    )

    manifest = RunManifest(
        experiment=cfg.experiment,
        package_version=__version__,
        created_utc=datetime.now(timezone.utc).isoformat(),
        elapsed_seconds=time.monotonic() - started,
        workers=workers,
    )
    manifest.add_files(run_dir, sorted(files) + ["config.json", "run.json"])
    manifest.write(run_dir)
    return run_dir, manifest
