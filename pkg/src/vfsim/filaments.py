"""N-filament dynamics in perturbation form around a rotating backbone.

Each filament is Psi_j(t, sigma) = X_j(t) + u_j(t, sigma), where the backbone
X_j(t) = exp(i omega t) X_j(0) is an exact rotating point-vortex equilibrium
(kept analytic, never integrated) and u_j is a decaying perturbation.  The
perturbations obey

    i du_j/dt + Gamma_j d^2u_j/dsigma^2
        + sum_{k != j} Gamma_k [ (X_jk + u_jk)/|X_jk + u_jk|^2
                                 - X_jk/|X_jk|^2 ] = 0

with u_jk = u_j - u_k and X_jk = X_j - X_k.  The module provides this
interaction term, a Strang splitting integrator with collision, energy-cap
and boundary guards, the renormalized quantities H, A, T, I and E = H + I,
the coercivity check, the square-configuration identities built on
v = u_1 + u_3 and w = u_2 + u_4, the analogous segment and hexagon
identities, the existence-time prediction, and the exact synchronized
collision scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryContaminated,
    CollisionDetected,
    ConfigError,
    PreconditionViolated,
    WrongConfig,
    WrongN,
)
from .grid import (
    DEFAULT_BOUNDARY_TOL,
    ComplexField,
    Grid1D,
    boundary_deviation,
    derivative,
    make_field,
    quad_trapezoid,
)
from .point_vortex import VortexConfig, min_separation, polygon_config
from .reduced import analytic_collision_phi

DELTA_MIN = 1e-3  # collision threshold as a fraction of the backbone spacing
COERCIVITY_C = 0.21  # verified lower convexity constant on the ratio band
ENERGY_CAP_FACTOR = 10.0  # run is trusted while E(t) <= factor * initial scale

STATUS_COMPLETED = "Completed"
STATUS_COLLISION = "CollisionDetected"
STATUS_ENERGY_CAP = "EnergyCapExceeded"
STATUS_BOUNDARY = "BoundaryContaminated"


# ---------------------------------------------------------------------------
# state type and constructors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilamentState:
    """Perturbations of all filaments at one time.

    ``u`` holds one background-0 field per vortex of ``cfg`` (center
    included when the configuration has one, in the configuration's own
    index order).  The backbone at this time is ``backbone(state)``.
    """

    u: tuple[ComplexField, ...]
    cfg: VortexConfig
    time: float = 0.0

    @property
    def grid(self) -> Grid1D:
        return self.u[0].grid

    @property
    def count(self) -> int:
        return len(self.u)


def backbone(state: FilamentState) -> np.ndarray:
    """Exact backbone positions X_j(t) = exp(i omega t) X_j(0)."""
    omega = state.cfg.omega if state.cfg.omega is not None else 0.0
    return np.exp(1j * omega * state.time) * state.cfg.positions


def filament_state(
    u: list[ComplexField],
    cfg: VortexConfig,
    time: float = 0.0,
) -> FilamentState:
    """Validate and assemble a FilamentState.

    Checks the field count against the configuration, a common grid,
    background 0, and the no-coincidence invariant min |Psi_jk| > 0.
    """
    if len(u) != cfg.count:
        raise ConfigError(
            "u", f"{len(u)} perturbation fields for {cfg.count} vortices"
        )
    grid = u[0].grid
    for j, f in enumerate(u):
        if f.grid is not grid and f.grid != grid:
            raise ConfigError("u", f"field {j} lives on a different grid")
        if f.background != 0.0:
            raise ConfigError(
                "u", f"field {j} has background {f.background!r}, expected 0"
            )
    state = FilamentState(u=tuple(u), cfg=cfg, time=float(time))
    sep, sigma, pair = min_separation_field(state)
    if sep <= 0.0:
        raise CollisionDetected(time, sigma, pair)
    return state


def zero_perturbations(cfg: VortexConfig, grid: Grid1D) -> FilamentState:
    """The unperturbed state u_j = 0 at time 0."""
    zeros = np.zeros(grid.num_points, dtype=np.complex128)
    fields = [make_field(grid, zeros.copy()) for _ in range(cfg.count)]
    return FilamentState(u=tuple(fields), cfg=cfg, time=0.0)


def dilation_state(
    cfg: VortexConfig, phi: ComplexField, time: float = 0.0
) -> FilamentState:
    """Dilation data u_j = X_j(t) (phi - 1), the shared-profile ansatz.

    Requires a profile with background 1 so the perturbations decay.
    """
    if phi.background != 1.0:
        raise ConfigError(
            "phi", f"dilation profile needs background 1, got {phi.background!r}"
        )
    omega = cfg.omega if cfg.omega is not None else 0.0
    xs = np.exp(1j * omega * time) * cfg.positions
    dev = phi.values - 1.0
    fields = [make_field(phi.grid, x * dev) for x in xs]
    return filament_state(fields, cfg, time=time)


def collision_initial_state(N: int, grid: Grid1D) -> FilamentState:
    """Exact-collision data: centered N-polygon with Gamma_0 = -(N-1)/2 (so
    the backbone is stationary) carrying the inverted-Gaussian dilation
    profile whose free evolution vanishes at t = 1, sigma = 0."""
    cfg = polygon_config(N, 1.0, 1.0, center_circulation=-(N - 1) / 2.0)
    phi = make_field(grid, analytic_collision_phi(0.0, grid.nodes), background=1.0)
    return dilation_state(cfg, phi)


# ---------------------------------------------------------------------------
# pairwise geometry and the interaction term
# ---------------------------------------------------------------------------

def _values_matrix(state: FilamentState) -> np.ndarray:
    return np.stack([f.values for f in state.u])


def _pair_differences(
    xs: np.ndarray, u_vals: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(Psi_jk over sigma, X_jk) with the diagonals set to inf.

    Psi_jk is expanded as X_jk + u_jk rather than via Psi_j - Psi_k so the
    small-perturbation regime keeps full relative accuracy.
    """
    n = xs.size
    xd = xs[:, None] - xs[None, :]
    ud = u_vals[:, None, :] - u_vals[None, :, :]
    psi = xd[:, :, None] + ud
    idx = np.arange(n)
    psi[idx, idx, :] = np.inf
    xd = xd.copy()
    xd[idx, idx] = np.inf
    return psi, xd


def min_separation_field(
    state: FilamentState,
) -> tuple[float, float, tuple[int, int]]:
    """(min over sigma and pairs of |Psi_jk|, its sigma, its (j, k))."""
    psi, _ = _pair_differences(backbone(state), _values_matrix(state))
    dist = np.abs(psi)
    flat = int(np.argmin(dist))
    j, k, i = np.unravel_index(flat, dist.shape)
    return float(dist[j, k, i]), float(state.grid.nodes[i]), (int(j), int(k))


def _rhs_values(
    u_vals: np.ndarray,
    xs: np.ndarray,
    circulations: np.ndarray,
    threshold: float,
    time: float,
    nodes: np.ndarray,
) -> np.ndarray:
    """Interaction term on raw arrays; raises CollisionDetected below the
    separation threshold."""
    psi, xd = _pair_differences(xs, u_vals)
    dist = np.abs(psi)
    low = float(dist.min())
    if low < threshold:
        j, k, i = np.unravel_index(int(np.argmin(dist)), dist.shape)
        raise CollisionDetected(time, float(nodes[i]), (int(j), int(k)))
    # z/|z|^2 == 1/conj(z); the inf diagonals reciprocate to zero
    term = 1.0 / np.conj(psi) - (1.0 / np.conj(xd))[:, :, None]
    return np.tensordot(term, circulations, axes=([1], [0]))


def interaction_rhs(
    state: FilamentState, delta_min: float = DELTA_MIN
) -> list[ComplexField]:
    """The N pointwise interaction fields of the perturbation system.

    The linear dispersion Gamma_j d^2/dsigma^2 is handled separately by the
    splitting integrator; this is only the pair-interaction sum.  Raises
    CollisionDetected when two filaments approach within delta_min times the
    backbone spacing.
    """
    threshold = delta_min * min_separation(state.cfg)
    vals = _rhs_values(
        _values_matrix(state),
        backbone(state),
        state.cfg.circulations,
        threshold,
        state.time,
        state.grid.nodes,
    )
    return [make_field(state.grid, row) for row in vals]


# ---------------------------------------------------------------------------
# renormalized energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    """Renormalized diagnostics of one filament snapshot.

    All pair quantities sum over unordered pairs {j,k}, each pair counted
    once.  ``T_quant`` is the quadratic pair moment sum Gamma_j Gamma_k
    int (|Psi_jk|^2 - |X_jk|^2); ``I`` is half the same sum weighted by
    1/|X_jk|^2; ``E = H + I`` is the conserved energy candidate.  Counting
    each pair once (rather than both ordered copies) is what makes E land
    exactly on N * energy_bm for dilation data and stay constant in the
    conservation regimes; the price is that the dilation identity for I
    reads 2I = omega * A.  ``vw_norms`` holds (||u_1+u_3||, ||u_2+u_4||)
    for plain 4-filament configurations and None otherwise.
    """

    time: float
    H: float
    A: float
    T_quant: float
    I: float
    E: float
    sup_ratio_dev: float
    min_sep: float
    vw_norms: tuple[float, float] | None = None


def _log_ratio(rel: np.ndarray) -> np.ndarray:
    """ln(1 + rel) with rel = |Psi_jk|^2/|X_jk|^2 - 1, safe on both ends.

    Uses log1p for full accuracy near ratio 1; ratios at or below zero are
    clamped at 1e-300, which only ever matters for reports taken after a
    collision flag.
    """
    ratio = 1.0 + rel
    good = ratio > 0.5
    return np.where(
        good,
        np.log1p(np.where(good, rel, 0.0)),
        np.log(np.maximum(ratio, 1e-300)),
    )


def _l2_norm(grid: Grid1D, values: np.ndarray) -> float:
    return math.sqrt(float(quad_trapezoid(grid, np.abs(values) ** 2)))


def energies(state: FilamentState) -> EnergyReport:
    """Compute the full EnergyReport of a snapshot.

    All densities are expanded around the backbone (2 Re(conj(X) u) + |u|^2
    instead of |X + u|^2 - |X|^2) so small perturbations are not lost to
    cancellation, and the grouping E = H + I is cross-checked against the
    single-integrand form kinetic + (1/2) sum_{pairs} Gamma_j Gamma_k
    int (ratio - 1 - ln ratio), the sum running over unordered pairs.
    """
    grid = state.grid
    g = state.cfg.circulations
    xs = backbone(state)
    u_vals = _values_matrix(state)
    n = xs.size

    kinetic = 0.0
    for j, f in enumerate(state.u):
        du = derivative(f).values
        kinetic += 0.5 * g[j] ** 2 * float(
            quad_trapezoid(grid, np.abs(du) ** 2)
        )

    # per-filament density |Psi_j|^2 - |X_j|^2
    self_dens = 2.0 * (np.conj(xs)[:, None] * u_vals).real + np.abs(u_vals) ** 2
    a_quant = float(quad_trapezoid(grid, np.sum(g[:, None] * self_dens, axis=0)))

    xd = xs[:, None] - xs[None, :]
    ud = u_vals[:, None, :] - u_vals[None, :, :]
    pair_dens = 2.0 * (np.conj(xd)[:, :, None] * ud).real + np.abs(ud) ** 2
    xd_sq = np.abs(xd) ** 2
    np.fill_diagonal(xd_sq, np.inf)  # kills the diagonal in every pair sum
    rel = pair_dens / xd_sq[:, :, None]

    dist = np.sqrt(np.maximum(xd_sq[:, :, None] + pair_dens, 0.0))
    flat = int(np.argmin(dist))
    jm, km, im = np.unravel_index(flat, dist.shape)
    min_sep = float(dist[jm, km, im])
    if min_sep <= 0.0:
        raise CollisionDetected(
            state.time, float(grid.nodes[im]), (int(jm), int(km))
        )

    # the einsum below runs over ordered (j, k); the extra factor 1/2 turns
    # it into a sum over unordered pairs, each counted once
    gg = (g[:, None] * g[None, :])[:, :, None]
    log_ratio = _log_ratio(rel)
    h_quant = kinetic - 0.25 * float(
        quad_trapezoid(grid, np.sum(gg * log_ratio, axis=(0, 1)))
    )
    t_quant = 0.5 * float(
        quad_trapezoid(grid, np.sum(gg * pair_dens, axis=(0, 1)))
    )
    i_quant = 0.25 * float(quad_trapezoid(grid, np.sum(gg * rel, axis=(0, 1))))
    e_quant = h_quant + i_quant

    direct = kinetic + 0.25 * float(
        quad_trapezoid(grid, np.sum(gg * (rel - log_ratio), axis=(0, 1)))
    )
    assert abs(e_quant - direct) <= 1e-12 * max(1.0, abs(e_quant)), (
        f"energy groupings disagree: {e_quant!r} vs {direct!r}"
    )

    sup_ratio_dev = float(np.max(np.abs(np.where(np.isfinite(rel), rel, 0.0))))

    vw_norms = None
    if n == 4 and not state.cfg.has_center:
        vw_norms = (
            _l2_norm(grid, u_vals[0] + u_vals[2]),
            _l2_norm(grid, u_vals[1] + u_vals[3]),
        )

    return EnergyReport(
        time=state.time,
        H=h_quant,
        A=a_quant,
        T_quant=t_quant,
        I=i_quant,
        E=e_quant,
        sup_ratio_dev=sup_ratio_dev,
        min_sep=min_sep,
        vw_norms=vw_norms,
    )


def write_reports_csv(path, reports: list[EnergyReport]) -> None:
    """Dump EnergyReports, one row per sample, 17 significant digits."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t,H,A,T,I,E,sup_ratio_dev,min_sep,v_norm,w_norm\n")
        for r in reports:
            v, w = r.vw_norms if r.vw_norms is not None else (math.nan, math.nan)
            fh.write(
                f"{r.time:.17g},{r.H:.17g},{r.A:.17g},{r.T_quant:.17g},"
                f"{r.I:.17g},{r.E:.17g},{r.sup_ratio_dev:.17g},"
                f"{r.min_sep:.17g},{v:.17g},{w:.17g}\n"
            )


# ---------------------------------------------------------------------------
# Strang splitting integrator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionResult:
    """Outcome of a filament run: status, sampled states and reports.

    ``halt_time`` is None for a completed run; for a collision it carries the
    detection time together with ``collision_sigma`` and ``collision_pair``;
    for the energy cap and boundary guards it is the first flagged sample.
    """

    status: str
    states: list[FilamentState]
    reports: list[EnergyReport]
    halt_time: float | None = None
    collision_sigma: float | None = None
    collision_pair: tuple[int, int] | None = None
    energy_cap: float | None = None


def _default_energy_cap(state: FilamentState) -> float | None:
    """10x the initial energy scale, armed only for positive circulations.

    For a plain 4-filament configuration the scale is tilde_E0 (which also
    sees the diagonal sums v, w); otherwise it is E(0).
    Mixed-sign circulations sit outside the energy framework (the collision
    scenario runs there), so the cap is disarmed.
    """
    if np.any(state.cfg.circulations <= 0.0):
        return None
    if state.count == 4 and not state.cfg.has_center:
        scale = tilde_E0(state)
    else:
        scale = energies(state).E
    if scale <= 0.0:
        return None
    return ENERGY_CAP_FACTOR * scale


def evolve(
    state: FilamentState,
    T: float,
    dt: float = 1e-3,
    sample_every: int = 10,
    delta_min: float = DELTA_MIN,
    energy_cap: float | None = None,
    boundary_tol: float = DEFAULT_BOUNDARY_TOL,
) -> EvolutionResult:
    """Evolve the perturbation system for time T by Strang splitting.

    Each step is a half linear step (per-filament exact Fourier propagator
    with gamma = Gamma_j), a full RK4 step on the pointwise interaction
    (non-autonomous: the backbone is evaluated at the stage times t, t+dt/2,
    t+dt), and a second half linear step.  dt is limited only by splitting
    accuracy; the linear part is exact at any step size.

    The run halts early with status CollisionDetected when filaments approach
    within delta_min times the backbone spacing, EnergyCapExceeded when a
    sampled E(t) exceeds the cap (default 10x the initial scale; pass
    energy_cap to override, 0 or inf to disarm), and BoundaryContaminated
    when a perturbation stops being flat at the domain ends.  States and
    reports are recorded at t = 0, every ``sample_every`` steps, at the final
    time, and at the halt.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if energy_cap is None:
        energy_cap = _default_energy_cap(state)
    if energy_cap is not None and not 0.0 < energy_cap < math.inf:
        energy_cap = None

    cfg = state.cfg
    g = cfg.circulations
    omega = cfg.omega if cfg.omega is not None else 0.0
    threshold = delta_min * min_separation(cfg)
    grid = state.grid
    nodes = grid.nodes
    x0 = cfg.positions

    n_steps = max(int(round(T / dt)), 0)
    h = T / n_steps if n_steps else 0.0

    def snapshot(u_vals: np.ndarray, t: float) -> FilamentState:
        fields = tuple(make_field(grid, row.copy()) for row in u_vals)
        return FilamentState(u=fields, cfg=cfg, time=t)

    states = [state]
    reports = [energies(state)]
    u_vals = _values_matrix(state)
    xi_sq = grid.wavenumbers**2

    def half_linear(vals: np.ndarray, tau: float) -> np.ndarray:
        spec = np.fft.fft(vals, axis=1)
        spec *= np.exp(-1j * np.outer(g, xi_sq) * tau)
        return np.fft.ifft(spec, axis=1)

    def rate(vals: np.ndarray, t: float) -> np.ndarray:
        xs = np.exp(1j * omega * t) * x0
        return 1j * _rhs_values(vals, xs, g, threshold, t, nodes)

    status = STATUS_COMPLETED
    halt_time = None
    collision_sigma = None
    collision_pair = None

    for n in range(n_steps):
        t = state.time + n * h
        try:
            v = half_linear(u_vals, 0.5 * h)
            k1 = rate(v, t)
            k2 = rate(v + 0.5 * h * k1, t + 0.5 * h)
            k3 = rate(v + 0.5 * h * k2, t + 0.5 * h)
            k4 = rate(v + h * k3, t + h)
            v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            u_vals = half_linear(v, 0.5 * h)
        except CollisionDetected as exc:
            status = STATUS_COLLISION
            halt_time = exc.time
            collision_sigma = exc.sigma
            collision_pair = exc.pair
            if states[-1].time != t:  # keep the last healthy snapshot
                snap = snapshot(u_vals, t)
                states.append(snap)
                reports.append(energies(snap))
            break
        t_new = state.time + (n + 1) * h

        dev = float(np.max(np.abs(u_vals[:, [0, -1]])))
        if dev > boundary_tol:
            status = STATUS_BOUNDARY
            halt_time = t_new
            snap = snapshot(u_vals, t_new)
            states.append(snap)
            reports.append(energies(snap))
            break

        if (n + 1) % sample_every == 0 or n + 1 == n_steps:
            snap = snapshot(u_vals, t_new)
            report = energies(snap)
            states.append(snap)
            reports.append(report)
            if energy_cap is not None and report.E > energy_cap:
                status = STATUS_ENERGY_CAP
                halt_time = t_new
                break

    return EvolutionResult(
        status=status,
        states=states,
        reports=reports,
        halt_time=halt_time,
        collision_sigma=collision_sigma,
        collision_pair=collision_pair,
        energy_cap=energy_cap,
    )


# ---------------------------------------------------------------------------
# coercivity
# ---------------------------------------------------------------------------

def coercivity_check(
    report: EnergyReport, state: FilamentState, c: float = COERCIVITY_C
) -> float:
    """Assert kinetic + c * sum ||ratio - 1||^2 <= E on the ratio band.

    Valid while every squared-modulus ratio stays within [3/4, 5/4]
    (PreconditionViolated otherwise); there the integrand comparison
    2c (x-1)^2 <= x - 1 - ln x holds for c = 0.21 but fails at the band edge
    for c = 0.25.  Returns the margin E - lhs.
    """
    if report.sup_ratio_dev > 0.25 * (1.0 + 1e-9):
        raise PreconditionViolated(
            f"ratio deviation {report.sup_ratio_dev:.3e} exceeds 1/4; "
            "the coercivity bound only holds on the band [3/4, 5/4]"
        )
    grid = state.grid
    g = state.cfg.circulations
    xs = backbone(state)
    u_vals = _values_matrix(state)

    kinetic = 0.0
    for j, f in enumerate(state.u):
        du = derivative(f).values
        kinetic += 0.5 * g[j] ** 2 * float(quad_trapezoid(grid, np.abs(du) ** 2))

    xd = xs[:, None] - xs[None, :]
    ud = u_vals[:, None, :] - u_vals[None, :, :]
    pair_dens = 2.0 * (np.conj(xd)[:, :, None] * ud).real + np.abs(ud) ** 2
    xd_sq = np.abs(xd) ** 2
    np.fill_diagonal(xd_sq, np.inf)
    rel = pair_dens / xd_sq[:, :, None]
    gg = (g[:, None] * g[None, :])[:, :, None]
    # unordered pairs, matching the convention used in energies()
    quad = 0.5 * float(quad_trapezoid(grid, np.sum(gg * rel**2, axis=(0, 1))))

    lhs = kinetic + c * quad
    margin = report.E - lhs
    assert lhs <= report.E + 1e-12 * max(1.0, abs(report.E)), (
        f"coercivity failed with c={c}: lhs={lhs:.6e} > E={report.E:.6e}"
    )
    return margin


# ---------------------------------------------------------------------------
# square configuration: diagonal sums and identities
# ---------------------------------------------------------------------------

def _require_plain_four(state: FilamentState) -> None:
    if state.count != 4 or state.cfg.has_center:
        raise WrongN(
            f"needs exactly 4 filaments without a center, got "
            f"{state.count} (has_center={state.cfg.has_center})"
        )


def _require_unit_square(state: FilamentState) -> None:
    cfg = state.cfg
    if state.count != 4 or cfg.has_center:
        raise WrongConfig(
            f"needs a plain 4-vortex configuration, got {state.count} "
            f"(has_center={cfg.has_center})"
        )
    x = cfg.positions
    if not np.allclose(np.abs(x), 1.0, atol=1e-12):
        raise WrongConfig("square identity needs radius 1")
    if not np.allclose(x, x[0] * 1j ** np.arange(4), atol=1e-12):
        raise WrongConfig("positions do not form a square")
    if not np.allclose(cfg.circulations, 1.0, atol=1e-12):
        raise WrongConfig("square identity needs unit circulations")


def vw_decompose(state: FilamentState) -> tuple[ComplexField, ComplexField]:
    """Diagonal sums v = u_1 + u_3 and w = u_2 + u_4 of a 4-filament state.

    The diagonal backbone positions cancel (X_1 + X_3 = X_2 + X_4 = 0), so
    these are also the sums of the full filament fields.
    """
    _require_plain_four(state)
    grid = state.grid
    v = make_field(grid, state.u[0].values + state.u[2].values)
    w = make_field(grid, state.u[1].values + state.u[3].values)
    return v, w


def square_energy_identity(state: FilamentState) -> float:
    """Residual of the square identity

        E = H + T/4 - A/4 + (||v||^2 + ||w||^2)/8,

    asserted below 1e-10 * max(1, |E|).  The coefficients follow from
    |X_jk|^2 = 2 on sides and 4 on diagonals together with the
    parallelogram law; doubling any of them breaks the identity (see the
    tests).
    """
    _require_unit_square(state)
    rep = energies(state)
    v, w = vw_decompose(state)
    vsq = float(quad_trapezoid(state.grid, np.abs(v.values) ** 2))
    wsq = float(quad_trapezoid(state.grid, np.abs(w.values) ** 2))
    rhs = rep.H + rep.T_quant / 4.0 - rep.A / 4.0 + (vsq + wsq) / 8.0
    residual = abs(rep.E - rhs)
    assert residual <= 1e-10 * max(1.0, abs(rep.E)), (
        f"square energy identity failed: E={rep.E!r}, combination={rhs!r}"
    )
    return residual


def check_Lv_vanishes(state: FilamentState) -> tuple[float, float]:
    """Sup-norms of the assembled linear parts L_v and L_w.

    L_v collects the first-order terms of the interaction felt by the
    diagonal pair (1, 3) from the other pair:

        L_v(u) = 2 sum_{k=2,4} [ X_1k Re(conj(u_1k) X_1k)/|X_1k|^4
                                 + X_3k Re(conj(u_3k) X_3k)/|X_3k|^4 ]
                 - sum_{k=2,4} [ u_1k/|X_1k|^2 + u_3k/|X_3k|^2 ]

    and L_w swaps the roles of the pairs.  On the unit square both vanish
    identically (the geometry turns the projections into plain sums); on a
    distorted backbone they do not, which is what makes this a usable check.
    """
    if state.count != 4 or state.cfg.has_center:
        raise WrongConfig(
            f"needs a plain 4-filament configuration, got {state.count} "
            f"(has_center={state.cfg.has_center})"
        )
    xs = backbone(state)
    u_vals = _values_matrix(state)

    def assemble(js: tuple[int, int], ks: tuple[int, int]) -> float:
        total = np.zeros(u_vals.shape[1], dtype=np.complex128)
        for j in js:
            for k in ks:
                xjk = xs[j] - xs[k]
                ujk = u_vals[j] - u_vals[k]
                sq = abs(xjk) ** 2
                total += 2.0 * xjk * (np.conj(ujk) * xjk).real / sq**2
                total -= ujk / sq
        return float(np.max(np.abs(total)))

    return assemble((0, 2), (1, 3)), assemble((1, 3), (0, 2))


# ---------------------------------------------------------------------------
# existence-time prediction and growth monitors
# ---------------------------------------------------------------------------

def tilde_E0(state: FilamentState) -> float:
    """max(E(0), (||u_1+u_3||^2 + ||u_2+u_4||^2)/2) for 4-filament data."""
    _require_plain_four(state)
    rep = energies(state)
    v, w = rep.vw_norms
    return max(rep.E, 0.5 * (v**2 + w**2))


def max_pair_norm(state: FilamentState) -> float:
    """Largest L2 norm of a pair difference u_j - u_k."""
    u_vals = _values_matrix(state)
    best = 0.0
    n = u_vals.shape[0]
    for j in range(n):
        for k in range(j + 1, n):
            best = max(best, _l2_norm(state.grid, u_vals[j] - u_vals[k]))
    return best


def predicted_T(tilde_e0: float, max_jk_norm: float, C: float = 0.1) -> float:
    """Guaranteed existence time C min(tE0^(-1/4) d0^(-1/2), tE0^(-1/3)).

    tilde_e0 = 0 (unperturbed data) returns inf as a sentinel.
    """
    if tilde_e0 <= 0.0:
        return math.inf
    first = math.inf
    if max_jk_norm > 0.0:
        first = tilde_e0 ** (-0.25) * max_jk_norm ** (-0.5)
    return C * min(first, tilde_e0 ** (-1.0 / 3.0))


@dataclass(frozen=True)
class GrowthConstants:
    """Smallest constants making the a-priori growth bounds hold on a run.

    ``pair_norm_C`` fits sum ||u_jk(t)|| <= C (sum ||u_jk(0)|| +
    t sup E^(1/2)); ``vw_C`` fits the diagonal-sum bound
    ||v(t)|| + ||w(t)|| <= ||v(0)|| + ||w(0)|| + C t sup G(s) with
    G = max ||u_jk||^(1/2) E^(1/4) (||v|| + ||w|| + E^(1/2)), and is None
    for non-4-filament runs.  Monitoring output, not assertions.
    """

    pair_norm_C: float
    vw_C: float | None


def growth_monitors(
    states: list[FilamentState],
    reports: list[EnergyReport] | None = None,
) -> GrowthConstants:
    """Fit the growth-bound constants over a sampled trajectory."""
    if reports is None:
        reports = [energies(s) for s in states]
    t0 = states[0].time
    energies_pos = [max(r.E, 0.0) for r in reports]

    def pair_sum(state: FilamentState) -> float:
        u_vals = _values_matrix(state)
        n = u_vals.shape[0]
        total = 0.0
        for j in range(n):
            for k in range(n):
                if j != k:
                    total += _l2_norm(state.grid, u_vals[j] - u_vals[k])
        return total

    sums = [pair_sum(s) for s in states]
    pair_c = 0.0
    sup_e = 0.0
    for i, s in enumerate(states):
        sup_e = max(sup_e, energies_pos[i])
        denom = sums[0] + (s.time - t0) * math.sqrt(sup_e)
        if denom > 0.0:
            pair_c = max(pair_c, sums[i] / denom)

    vw_c = None
    if states[0].count == 4 and not states[0].cfg.has_center:
        vw = [r.vw_norms[0] + r.vw_norms[1] for r in reports]
        maxima = [max_pair_norm(s) for s in states]
        vw_c = 0.0
        sup_g = 0.0
        for i, s in enumerate(states):
            e = energies_pos[i]
            sup_g = max(
                sup_g,
                math.sqrt(maxima[i]) * e**0.25 * (vw[i] + math.sqrt(e)),
            )
            denom = (s.time - t0) * sup_g
            if denom > 0.0:
                vw_c = max(vw_c, (vw[i] - vw[0]) / denom)
    return GrowthConstants(pair_norm_C=pair_c, vw_C=vw_c)


# ---------------------------------------------------------------------------
# segment and hexagon identities
# ---------------------------------------------------------------------------

def segment_energy_identity(state: FilamentState) -> float:
    """Residual of the collinear three-filament identity

        E = H + T/2 - (3/4) A + (3/4) ||u_mid||^2 + (3/8) ||u_+ + u_-||^2,

    for the segment backbone (center vortex at the midpoint, index 0, and
    the two ends at +-1), all circulations 1.  Asserted below
    1e-10 * max(1, |E|).
    """
    cfg = state.cfg
    if state.count != 3 or not cfg.has_center:
        raise WrongConfig(
            f"needs the centered 2-polygon (3 filaments), got {state.count} "
            f"(has_center={cfg.has_center})"
        )
    x = cfg.positions
    if abs(x[0]) > 1e-12 or not np.allclose(np.abs(x[1:]), 1.0, atol=1e-12):
        raise WrongConfig("segment identity needs ends at radius 1")
    if abs(x[1] + x[2]) > 1e-12:
        raise WrongConfig("segment ends must be antipodal")
    if not np.allclose(cfg.circulations, 1.0, atol=1e-12):
        raise WrongConfig("segment identity needs unit circulations")

    rep = energies(state)
    grid = state.grid
    mid_sq = float(quad_trapezoid(grid, np.abs(state.u[0].values) ** 2))
    ends = state.u[1].values + state.u[2].values
    ends_sq = float(quad_trapezoid(grid, np.abs(ends) ** 2))
    rhs = (
        rep.H
        + rep.T_quant / 2.0
        - 0.75 * rep.A
        + 0.75 * mid_sq
        + 0.375 * ends_sq
    )
    residual = abs(rep.E - rhs)
    assert residual <= 1e-10 * max(1.0, abs(rep.E)), (
        f"segment energy identity failed: E={rep.E!r}, combination={rhs!r}"
    )
    return residual


def hexagon_energy_identity(state: FilamentState) -> float:
    """Residual of the hexagon identity

        E = H + T/2 - (7/4) A
            + (1/3) (||u_1+u_3+u_5||^2 + ||u_2+u_4+u_6||^2)
            + (3/8) sum_j ||u_j + u_(j+3)||^2,

    for the plain unit hexagon with circulations 1; the triangle sums run
    over the two inscribed equilateral triangles and the last sum over the
    three antipodal pairs.  Asserted below 1e-10 * max(1, |E|).
    """
    cfg = state.cfg
    if state.count != 6 or cfg.has_center:
        raise WrongConfig(
            f"needs the plain 6-polygon, got {state.count} "
            f"(has_center={cfg.has_center})"
        )
    x = cfg.positions
    if not np.allclose(np.abs(x), 1.0, atol=1e-12):
        raise WrongConfig("hexagon identity needs radius 1")
    step = np.exp(1j * np.pi / 3.0)
    if not np.allclose(x, x[0] * step ** np.arange(6), atol=1e-12):
        raise WrongConfig("positions do not form a regular hexagon")
    if not np.allclose(cfg.circulations, 1.0, atol=1e-12):
        raise WrongConfig("hexagon identity needs unit circulations")

    rep = energies(state)
    grid = state.grid
    u_vals = _values_matrix(state)
    tri = 0.0
    for start in (0, 1):
        s = u_vals[start] + u_vals[start + 2] + u_vals[start + 4]
        tri += float(quad_trapezoid(grid, np.abs(s) ** 2))
    opp = 0.0
    for j in range(3):
        s = u_vals[j] + u_vals[j + 3]
        opp += float(quad_trapezoid(grid, np.abs(s) ** 2))
    rhs = (
        rep.H
        + rep.T_quant / 2.0
        - 1.75 * rep.A
        + (1.0 / 3.0) * tri
        + 0.375 * opp
    )
    residual = abs(rep.E - rhs)
    assert residual <= 1e-10 * max(1.0, abs(rep.E)), (
        f"hexagon energy identity failed: E={rep.E!r}, combination={rhs!r}"
    )
    return residual
