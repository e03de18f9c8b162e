"""Scenario runners behind the command line interface.

Each runner builds its initial data from a validated ScenarioConfig,
integrates, writes the scenario's output files into a directory, and
returns a RunReport.  The report is also serialized to ``status.json``
so a run can be inspected (and diffed) after the fact.

Guarantees shared by every scenario:

* deterministic output: all randomness flows through
  ``numpy.random.default_rng(cfg.seed)``, floats are printed with 17
  significant digits, and nothing time- or host-dependent enters the
  files, so a rerun with the same config is byte identical;
* single-threaded by default: ``threads`` only fans out independent
  sweep members (traveling-wave sweeps), never a single integration;
* on success every file listed in the report exists and is non-empty;
* a guard that halts a run maps to a stable status string and exit code
  (see EXIT_CODES) instead of a traceback.
"""

from __future__ import annotations

import json
import math
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .config import ScenarioConfig
from .errors import (
    BoundaryContaminated,
    CollisionDetected,
    ConfigError,
    EnergyCapExceeded,
    VfsimError,
)
from .filaments import (
    FilamentState,
    collision_initial_state,
    dilation_state,
    energies,
    evolve,
    filament_state,
    growth_monitors,
    max_pair_norm,
    predicted_T,
    tilde_E0,
    write_reports_csv,
)
from .grid import Grid1D, make_field, make_grid, write_fields_csv, read_fields_csv
from .point_vortex import (
    VortexConfig,
    integrate,
    linear_stability,
    polygon_config,
    write_trajectory_csv,
)
from .reduced import PhiState, evolve_bm, lattice_wavenumber
from .traveling_wave import (
    WaveParams,
    build_wave,
    helix_filaments,
    residual_tw,
    sweep_waves,
)

__all__ = [
    "RunReport",
    "EXIT_CODES",
    "run",
    "build_backbone",
    "build_filament_state",
]


# Exit code for each terminal status.  Guard exceptions not listed here
# (modulus floor, escaped amplitude, step-size refusals) are grouped
# under NumericalGuard.
EXIT_CODES = {
    "Completed": 0,
    "ConfigError": 2,
    "CollisionDetected": 3,
    "EnergyCapExceeded": 4,
    "BoundaryContaminated": 5,
    "NumericalGuard": 6,
}

# Which acceptance test each scenario (or scenario + perturbation)
# exercises; recorded in the report so a run points back at the check
# that pins its expected behaviour.
_ACCEPTANCE = {
    "point_vortex": "test_01_point_vortex_invariants",
    "stability": "test_02_polygon_stability_threshold",
    "reduced": "test_05_reduced_energy_conservation",
    "collision": "test_04_collision_scenario",
    "traveling_wave": "test_06_traveling_waves",
    "helix": "test_06_traveling_waves",
    ("square", "gaussian"): "test_09_energy_cap_window",
    ("square", "dilation"): "test_10_product_ansatz",
    ("square", "parallelogram"): "test_08_parallelogram_preset",
    ("square", "file"): "test_07_square_identities",
}


@dataclass
class RunReport:
    """Outcome of one scenario run.

    ``hitting_times`` records when guards fired (collision time, cap
    crossing); ``constants`` holds fitted or measured quantities (drifts,
    growth constants, slopes) that are reported but only ever asserted
    through their exponents, never their prefactors.
    """

    status: str
    exit_code: int
    scenario: str
    hitting_times: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)
    acceptance: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "exit_code": self.exit_code,
            "scenario": self.scenario,
            "hitting_times": self.hitting_times,
            "constants": self.constants,
            "files": self.files,
            "config": self.config_echo,
            "versions": self.versions,
            "acceptance": self.acceptance,
        }


def _versions() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "vfsim": __version__,
    }


def _effective_config(cfg: ScenarioConfig) -> dict:
    """The config with every default filled in, for the report echo."""
    echo = {
        "scenario": cfg.scenario,
        "config": {
            "kind": cfg.kind,
            "N": cfg.N,
            "R": cfg.R,
            "gamma": cfg.gamma,
            "gamma0": cfg.gamma0,
            "omega": cfg.omega,
            "c2": cfg.c2,
        },
        "grid": {"L": cfg.L, "M": cfg.M},
        "perturbation": {
            "kind": cfg.pert_kind,
            "amp": cfg.amp,
            "width": cfg.width,
            "center": cfg.center,
            "seed": cfg.seed,
            "path": cfg.path,
        },
        "time": {"T": cfg.T, "dt": cfg.dt, "sample_every": cfg.sample_every},
        "guards": {
            "delta_min": cfg.delta_min,
            "energy_cap_factor": cfg.energy_cap_factor,
            "boundary_tol": cfg.boundary_tol,
        },
    }
    return echo


def _acceptance_for(cfg: ScenarioConfig) -> str:
    key = (cfg.scenario, cfg.pert_kind)
    if key in _ACCEPTANCE:
        return _ACCEPTANCE[key]
    return _ACCEPTANCE.get(cfg.scenario, "")


def _base_report(cfg: ScenarioConfig, status: str) -> RunReport:
    return RunReport(
        status=status,
        exit_code=EXIT_CODES[status],
        scenario=cfg.scenario,
        config_echo=_effective_config(cfg),
        versions=_versions(),
        acceptance=_acceptance_for(cfg),
    )


def _check_files(out_dir, names: list) -> None:
    for name in names:
        full = os.path.join(out_dir, name)
        if not os.path.isfile(full) or os.path.getsize(full) == 0:
            raise VfsimError(f"output file {name} missing or empty")


def write_status(out_dir, report: RunReport) -> str:
    path = os.path.join(out_dir, "status.json")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# initial data builders
# ---------------------------------------------------------------------------

def build_backbone(cfg: ScenarioConfig) -> VortexConfig:
    """The point-vortex configuration described by the config section."""
    if cfg.kind == "square":
        return polygon_config(4, cfg.R, cfg.gamma)
    if cfg.kind == "polygon":
        return polygon_config(cfg.N, cfg.R, cfg.gamma)
    if cfg.kind == "hexagon":
        return polygon_config(6, cfg.R, cfg.gamma)
    if cfg.kind == "polygon_center":
        gamma0 = cfg.gamma0
        if gamma0 is None:
            # the choice that freezes the backbone (omega = 0)
            gamma0 = -(cfg.N - 1) / 2.0 * cfg.gamma
        return polygon_config(cfg.N, cfg.R, cfg.gamma, center_circulation=gamma0)
    if cfg.kind == "segment":
        gamma0 = cfg.gamma if cfg.gamma0 is None else cfg.gamma0
        return polygon_config(2, cfg.R, cfg.gamma, center_circulation=gamma0)
    raise ConfigError("config.kind", f"unknown backbone kind {cfg.kind!r}")


def _random_bump(rng: np.random.Generator, grid: Grid1D, amp: float,
                 width: float) -> np.ndarray:
    """A decaying complex profile: three modulated Gaussian bumps.

    The modulation wavenumber is kept inside each bump's own bandwidth
    (|k| <= 1/w) so the group transport over a long run stays bounded by
    2 gamma t / w and the tails cannot race to the domain ends.
    """
    vals = np.zeros(grid.num_points, dtype=np.complex128)
    for _ in range(3):
        a = amp * rng.uniform(0.3, 1.0)
        w = width * rng.uniform(0.7, 1.6)
        c = rng.uniform(-2.0, 2.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        k = rng.uniform(-1.0, 1.0) / w
        vals += (
            a
            * np.exp(1j * phase)
            * np.exp(-(((grid.nodes - c) / w) ** 2) + 1j * k * grid.nodes)
        )
    return vals


def _gaussian_profile(cfg: ScenarioConfig, grid: Grid1D) -> np.ndarray:
    return cfg.amp * np.exp(-(((grid.nodes - cfg.center) / cfg.width) ** 2))


def build_filament_state(cfg: ScenarioConfig, grid: Grid1D) -> FilamentState:
    """Initial perturbations for the full N-filament system.

    ``gaussian`` draws an independent random bump profile per filament
    (generic data, scale ``amp``); ``dilation`` is the shared-profile
    ansatz u_j = X_j (phi - 1) with phi a Gaussian bump on background 1;
    ``parallelogram`` seeds the antisymmetric square pattern
    (g_a, g_b, -g_a, -g_b); ``file`` reads previously dumped fields.
    """
    vortex = build_backbone(cfg)
    if cfg.pert_kind == "gaussian":
        rng = np.random.default_rng(cfg.seed)
        fields = [
            make_field(grid, _random_bump(rng, grid, cfg.amp, cfg.width))
            for _ in range(vortex.count)
        ]
        return filament_state(fields, vortex)
    if cfg.pert_kind == "dilation":
        phi = make_field(grid, 1.0 + _gaussian_profile(cfg, grid), background=1.0)
        return dilation_state(vortex, phi)
    if cfg.pert_kind == "parallelogram":
        rng = np.random.default_rng(cfg.seed)
        ga = _random_bump(rng, grid, cfg.amp, cfg.width)
        gb = _random_bump(rng, grid, cfg.amp, cfg.width)
        fields = [make_field(grid, v) for v in (ga, gb, -ga, -gb)]
        return filament_state(fields, vortex)
    if cfg.pert_kind == "file":
        try:
            sigma, arrays = read_fields_csv(cfg.path)
        except (OSError, ValueError) as exc:
            raise ConfigError("perturbation.path", f"cannot read: {exc}") from exc
        if len(sigma) != grid.num_points or abs(sigma[0] - grid.nodes[0]) > 1e-12:
            raise ConfigError(
                "perturbation.path",
                f"fields in {cfg.path} do not match the configured grid",
            )
        fields = [make_field(grid, a) for a in arrays]
        return filament_state(fields, vortex)
    raise ConfigError("perturbation.kind", f"unknown kind {cfg.pert_kind!r}")


# ---------------------------------------------------------------------------
# per-scenario runners
# ---------------------------------------------------------------------------

def _run_point_vortex(cfg: ScenarioConfig, out_dir, dump_fields: bool,
                      threads: int) -> RunReport:
    vortex = build_backbone(cfg)
    traj = integrate(vortex, cfg.T, cfg.dt)
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), traj)

    report = _base_report(cfg, "Completed")
    inv = traj.invariant_series
    for key in ("center_of_inertia", "angular_momentum", "log_sum", "quad_sum"):
        series = inv[key]
        drift = float(np.max(np.abs(series - series[0])))
        report.constants[f"drift_{key}"] = drift
    report.files = ["trajectory.csv"]
    return report


def _run_stability(cfg: ScenarioConfig, out_dir, dump_fields: bool,
                   threads: int) -> RunReport:
    rows = []
    for n in range(3, 11):
        eigs, verdict = linear_stability(n, cfg.gamma)
        rows.append((n, float(np.max(eigs.real)), verdict))
    with open(os.path.join(out_dir, "stability.csv"), "w",
              encoding="ascii", newline="\n") as fh:
        fh.write("N,max_re_lambda,verdict\n")
        for n, lam, verdict in rows:
            fh.write(f"{n},{lam:.17g},{verdict}\n")

    report = _base_report(cfg, "Completed")
    for n, lam, verdict in rows:
        if n == cfg.N:
            report.constants["max_re_lambda"] = lam
            report.constants["verdict"] = verdict
    report.files = ["stability.csv"]
    return report


def _run_reduced(cfg: ScenarioConfig, out_dir, dump_fields: bool,
                 threads: int) -> RunReport:
    grid = make_grid(cfg.L, cfg.M)
    if cfg.pert_kind in ("gaussian", "dilation"):
        values = 1.0 + _gaussian_profile(cfg, grid)
        phi = make_field(grid, values.astype(np.complex128), background=1.0)
    elif cfg.pert_kind == "file":
        sigma, arrays = read_fields_csv(cfg.path)
        if len(arrays) != 1 or len(sigma) != grid.num_points:
            raise ConfigError(
                "perturbation.path",
                f"{cfg.path} does not hold a single profile on the grid",
            )
        phi = make_field(grid, arrays[0], background=1.0)
    else:
        raise ConfigError(
            "perturbation.kind",
            f"{cfg.pert_kind!r} data needs the square scenario",
        )
    state = PhiState(phi=phi, omega=cfg.omega, time=0.0)
    states, samples = evolve_bm(
        state, cfg.T, cfg.dt,
        sample_every=cfg.sample_every,
        boundary_tol=cfg.boundary_tol,
    )
    with open(os.path.join(out_dir, "energies.csv"), "w",
              encoding="ascii", newline="\n") as fh:
        fh.write("t,E,E_GP,sup_dev,min_mod\n")
        for s in samples:
            fh.write(
                f"{s.time:.17g},{s.E:.17g},{s.E_GP:.17g},"
                f"{s.sup_dev:.17g},{s.min_mod:.17g}\n"
            )
    files = ["energies.csv"]
    if dump_fields:
        for i, st in enumerate(states):
            name = f"fields_t{i:04d}.csv"
            write_fields_csv(os.path.join(out_dir, name), grid, [st.phi])
            files.append(name)

    report = _base_report(cfg, "Completed")
    e0 = samples[0].E
    drift = max(abs(s.E - e0) for s in samples)
    report.constants["drift_E"] = drift
    if e0 != 0.0:
        report.constants["rel_drift_E"] = drift / abs(e0)
    report.constants["min_mod"] = min(s.min_mod for s in samples)
    report.files = files
    return report


def _energy_cap(cfg: ScenarioConfig, state: FilamentState) -> float | None:
    """Cap at factor x the initial scale, armed for positive circulations."""
    if np.any(state.cfg.circulations <= 0.0):
        return None
    if state.count == 4 and not state.cfg.has_center:
        scale = tilde_E0(state)
    else:
        scale = energies(state).E
    if scale <= 0.0:
        return None
    return cfg.energy_cap_factor * scale


def _write_filament_outputs(out_dir, result, dump_fields: bool) -> list:
    write_reports_csv(os.path.join(out_dir, "energies.csv"), result.reports)
    files = ["energies.csv"]
    if dump_fields:
        for i, st in enumerate(result.states):
            name = f"fields_t{i:04d}.csv"
            write_fields_csv(os.path.join(out_dir, name), st.grid, list(st.u))
            files.append(name)
    return files


def _run_square(cfg: ScenarioConfig, out_dir, dump_fields: bool,
                threads: int) -> RunReport:
    grid = make_grid(cfg.L, cfg.M)
    state = build_filament_state(cfg, grid)
    cap = _energy_cap(cfg, state)
    is_plain_square = state.count == 4 and not state.cfg.has_center

    constants: dict = {}
    if is_plain_square:
        te0 = tilde_E0(state)
        constants["tilde_E0"] = te0
        constants["predicted_T"] = predicted_T(te0, max_pair_norm(state))

    result = evolve(
        state, cfg.T, cfg.dt,
        sample_every=cfg.sample_every,
        delta_min=cfg.delta_min,
        energy_cap=cap,
        boundary_tol=cfg.boundary_tol,
    )
    files = _write_filament_outputs(out_dir, result, dump_fields)

    report = _base_report(cfg, result.status)
    report.constants.update(constants)
    e0 = result.reports[0].E
    drift = max(abs(r.E - e0) for r in result.reports)
    report.constants["drift_E"] = drift
    if e0 != 0.0:
        report.constants["rel_drift_E"] = drift / abs(e0)
    if all(r.vw_norms is not None for r in result.reports):
        report.constants["max_vw"] = max(
            max(r.vw_norms) for r in result.reports
        )
    growth = growth_monitors(result.states, result.reports)
    report.constants["pair_norm_C"] = growth.pair_norm_C
    if growth.vw_C is not None:
        report.constants["vw_C"] = growth.vw_C
    if result.status == "CollisionDetected":
        report.hitting_times["collision_time"] = result.halt_time
        report.hitting_times["sigma_star"] = result.collision_sigma
        report.hitting_times["pair"] = list(result.collision_pair)
    elif result.status == "EnergyCapExceeded":
        report.hitting_times["cap_time"] = result.halt_time
        report.constants["energy_cap"] = result.energy_cap
    elif result.status == "BoundaryContaminated":
        report.hitting_times["boundary_time"] = result.halt_time
    report.files = files
    return report


def _run_collision(cfg: ScenarioConfig, out_dir, dump_fields: bool,
                   threads: int) -> RunReport:
    grid = make_grid(cfg.L, cfg.M)
    state = collision_initial_state(cfg.N, grid)
    result = evolve(
        state, cfg.T, cfg.dt,
        sample_every=cfg.sample_every,
        delta_min=cfg.delta_min,
        boundary_tol=cfg.boundary_tol,
    )
    files = _write_filament_outputs(out_dir, result, dump_fields)

    report = _base_report(cfg, result.status)
    report.constants["min_sep"] = min(r.min_sep for r in result.reports)
    if result.status == "CollisionDetected":
        report.hitting_times["collision_time"] = result.halt_time
        report.hitting_times["sigma_star"] = result.collision_sigma
        report.hitting_times["pair"] = list(result.collision_pair)
    report.files = files
    return report


def _parse_sweep(text: str) -> list:
    """Parse ``c2=START:STOP:COUNT`` into a list of c2 values."""
    try:
        name, rest = text.split("=", 1)
        start_s, stop_s, count_s = rest.split(":")
        start, stop, count = float(start_s), float(stop_s), int(count_s)
    except ValueError:
        raise ConfigError("sweep", f"expected c2=START:STOP:COUNT, got {text!r}")
    if name != "c2":
        raise ConfigError("sweep", f"only c2 sweeps are supported, got {name!r}")
    if count < 2:
        raise ConfigError("sweep", "sweep needs at least 2 points")
    return [float(v) for v in np.linspace(start, stop, count)]


def _run_traveling_wave(cfg: ScenarioConfig, out_dir, dump_fields: bool,
                        threads: int, sweep: str | None = None,
                        out_name: str | None = None) -> RunReport:
    grid = make_grid(cfg.L, cfg.M)
    report = _base_report(cfg, "Completed")
    name = out_name or ("sweep.csv" if sweep else "profile.csv")

    if sweep is None:
        params = WaveParams(omega=cfg.omega, c=math.sqrt(cfg.c2))
        profile = build_wave(params, grid)
        with open(os.path.join(out_dir, name), "w",
                  encoding="ascii", newline="\n") as fh:
            fh.write("sigma,eta,theta,re_v,im_v\n")
            for i in range(grid.num_points):
                fh.write(
                    f"{grid.nodes[i]:.17g},{profile.eta[i]:.17g},"
                    f"{profile.theta[i]:.17g},{profile.v.values[i].real:.17g},"
                    f"{profile.v.values[i].imag:.17g}\n"
                )
        report.constants["sigma1"] = profile.sigma1
        report.constants["phase_jump"] = profile.phase_jump
        report.constants["energy"] = profile.energy
        report.constants["residual"] = residual_tw(profile.v, params)
        report.files = [name]
        return report

    c2_values = _parse_sweep(sweep)
    params_list = [WaveParams(omega=cfg.omega, c=math.sqrt(c2)) for c2 in c2_values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(lambda p: sweep_waves([p], grid)[0], params_list)
            )
    else:
        rows = sweep_waves(params_list, grid)
    with open(os.path.join(out_dir, name), "w",
              encoding="ascii", newline="\n") as fh:
        fh.write("c2,sigma1,energy,phase_jump,residual\n")
        for row in rows:
            fh.write(
                f"{row['c2']:.17g},{row['sigma1']:.17g},{row['energy']:.17g},"
                f"{row['phase_jump']:.17g},{row['residual']:.17g}\n"
            )
    # fitted exponents against the subsonic gap 2 omega - c^2: the wave
    # energy closes the gap like gap^(3/2), the tail onset sigma1 like gap
    gaps = np.array([2.0 * cfg.omega - row["c2"] for row in rows])
    log_gaps = np.log(gaps)
    energy = np.array([row["energy"] for row in rows])
    sig1 = np.array([row["sigma1"] for row in rows])
    report.constants["energy_slope"] = float(
        np.polyfit(log_gaps, np.log(energy), 1)[0]
    )
    report.constants["sigma1_slope"] = float(
        np.polyfit(log_gaps, np.log(sig1), 1)[0]
    )
    report.constants["max_residual"] = max(row["residual"] for row in rows)
    report.files = [name]
    return report


def _run_helix(cfg: ScenarioConfig, out_dir, dump_fields: bool,
               threads: int) -> RunReport:
    grid = make_grid(cfg.L, cfg.M)
    params = WaveParams(omega=cfg.omega, c=math.sqrt(cfg.c2))
    profile = build_wave(params, grid)
    # nearest lattice wavenumber to sqrt(omega), the stationary-helix pitch
    k_idx = max(round(math.sqrt(cfg.omega) * grid.half_length / math.pi), 1)
    nu = lattice_wavenumber(grid, math.pi * k_idx / grid.half_length)
    start = helix_filaments(profile, cfg.N, nu, time=0.0)
    end = helix_filaments(profile, cfg.N, nu, time=cfg.T)
    write_fields_csv(os.path.join(out_dir, "helix_t0.csv"), grid, start)
    write_fields_csv(os.path.join(out_dir, "helix_t1.csv"), grid, end)

    report = _base_report(cfg, "Completed")
    report.constants["nu"] = nu
    report.constants["sigma1"] = profile.sigma1
    report.constants["phase_jump"] = profile.phase_jump
    report.constants["residual"] = residual_tw(profile.v, params)
    report.files = ["helix_t0.csv", "helix_t1.csv"]
    return report


_DISPATCH = {
    "point_vortex": _run_point_vortex,
    "stability": _run_stability,
    "reduced": _run_reduced,
    "square": _run_square,
    "collision": _run_collision,
    "helix": _run_helix,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _status_for_exception(exc: VfsimError) -> str:
    if isinstance(exc, ConfigError):
        return "ConfigError"
    if isinstance(exc, CollisionDetected):
        return "CollisionDetected"
    if isinstance(exc, EnergyCapExceeded):
        return "EnergyCapExceeded"
    if isinstance(exc, BoundaryContaminated):
        return "BoundaryContaminated"
    return "NumericalGuard"


def run(cfg: ScenarioConfig, out_dir, dump_fields: bool = False,
        threads: int = 1, sweep: str | None = None,
        out_name: str | None = None) -> RunReport:
    """Run one scenario, write its files and status.json, return the report.

    Guard exceptions are converted into a report with the matching status
    and exit code rather than propagating; the caller turns
    ``report.exit_code`` into the process exit status.
    """
    os.makedirs(out_dir, exist_ok=True)
    try:
        if cfg.scenario == "traveling_wave":
            report = _run_traveling_wave(
                cfg, out_dir, dump_fields, threads,
                sweep=sweep, out_name=out_name,
            )
        else:
            report = _DISPATCH[cfg.scenario](cfg, out_dir, dump_fields, threads)
        _check_files(out_dir, report.files)
    except VfsimError as exc:
        status = _status_for_exception(exc)
        report = _base_report(cfg, status)
        report.constants["error"] = str(exc)
        if isinstance(exc, CollisionDetected):
            report.hitting_times["collision_time"] = exc.time
            report.hitting_times["sigma_star"] = exc.sigma
            report.hitting_times["pair"] = list(exc.pair)
        elif isinstance(exc, (EnergyCapExceeded, BoundaryContaminated)):
            report.hitting_times["halt_time"] = exc.time
    write_status(out_dir, report)
    return report
