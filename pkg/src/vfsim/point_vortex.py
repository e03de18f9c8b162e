"""Planar point-vortex system: equilibria, integration, invariants, stability.

Positions are complex numbers X_j, circulations real Gamma_j, and the motion is

    dX_j/dt = i * sum_{k != j} Gamma_k (X_j - X_k) / |X_j - X_k|^2.

Regular polygons (optionally with a center vortex) rotate rigidly at a rate
omega fixed by the circulations; those configurations are the backbones of the
filament model, so this module also provides their linear stability in the
co-rotating frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPolygon, NearCollision, NumericalGuard

DELTA_MIN = 1e-8  # coincidence guard for the singular interaction kernel


# ---------------------------------------------------------------------------
# configuration type and constructors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VortexConfig:
    """A snapshot of N point vortices.

    ``omega`` is the rigid rotation rate when the configuration was built as a
    relative equilibrium (None otherwise).  When ``has_center`` is set, index 0
    holds the center vortex.
    """

    positions: np.ndarray
    circulations: np.ndarray
    has_center: bool = False
    omega: float | None = None

    @property
    def count(self) -> int:
        return self.positions.size


def min_separation(cfg: VortexConfig) -> float:
    """Smallest pairwise distance d > 0 of the configuration."""
    x = cfg.positions
    diff = x[:, None] - x[None, :]
    dist = np.abs(diff)
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def polygon_config(
    N: int,
    R: float,
    gamma: float,
    center_circulation: float | None = None,
) -> VortexConfig:
    """Regular N-gon of radius R, circulation gamma, optional center vortex.

    The rotation rate is gamma*(N-1)/(2 R^2) for the plain polygon and
    [gamma*(N-1) + 2*Gamma_0]/(2 R^2) with a center vortex of circulation
    Gamma_0; the choice Gamma_0 = -gamma*(N-1)/2 makes the configuration
    stationary.
    """
    if N < 2:
        raise InvalidPolygon(f"need at least 2 vertices, got N={N}")
    if R <= 0:
        raise InvalidPolygon(f"polygon radius must be positive, got R={R}")
    vertices = R * np.exp(2j * np.pi * np.arange(N) / N)
    if center_circulation is None:
        positions = vertices
        circulations = np.full(N, gamma, dtype=float)
        omega = gamma * (N - 1) / (2.0 * R**2)
        has_center = False
    else:
        positions = np.concatenate(([0.0 + 0.0j], vertices))
        circulations = np.concatenate(([center_circulation], np.full(N, gamma)))
        omega = (gamma * (N - 1) + 2.0 * center_circulation) / (2.0 * R**2)
        has_center = True
    return VortexConfig(
        positions=positions,
        circulations=circulations,
        has_center=has_center,
        omega=omega,
    )


# ---------------------------------------------------------------------------
# vector field and conserved quantities
# ---------------------------------------------------------------------------

def _pairwise(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Difference matrix X_j - X_k and squared distances, inf on the diagonal."""
    diff = positions[:, None] - positions[None, :]
    sq = np.abs(diff) ** 2
    np.fill_diagonal(sq, np.inf)
    return diff, sq


def rhs(
    positions: np.ndarray,
    circulations: np.ndarray,
    delta_min: float = DELTA_MIN,
) -> np.ndarray:
    """Velocities dX_j/dt of the point-vortex system."""
    diff, sq = _pairwise(positions)
    min_sq = sq.min()
    if min_sq < delta_min**2:
        raise NearCollision(float(np.sqrt(min_sq)))
    return 1j * np.sum(circulations[None, :] * diff / sq, axis=1)


def config_rhs(cfg: VortexConfig, delta_min: float = DELTA_MIN) -> np.ndarray:
    return rhs(cfg.positions, cfg.circulations, delta_min)


def invariants(cfg: VortexConfig) -> tuple[complex, float, float, float]:
    """The four conserved quantities of the motion.

    Returns (center of inertia sum Gamma_j X_j, angular momentum
    sum Gamma_j |X_j|^2, sum_{j != k} Gamma_j Gamma_k ln|X_jk|^2, and
    sum_{j != k} Gamma_j Gamma_k |X_jk|^2), the last two over ordered pairs.
    """
    x, g = cfg.positions, cfg.circulations
    diff, sq = _pairwise(x)
    if sq.min() <= 0.0:
        raise NearCollision(0.0)
    gg = g[:, None] * g[None, :]
    off = ~np.eye(x.size, dtype=bool)
    center = complex(np.sum(g * x))
    ang_mom = float(np.sum(g * np.abs(x) ** 2))
    log_sum = float(np.sum(gg[off] * np.log(sq[off])))
    quad_sum = float(np.sum(gg[off] * sq[off]))
    return center, ang_mom, log_sum, quad_sum


# ---------------------------------------------------------------------------
# time integration
# ---------------------------------------------------------------------------

@dataclass
class VortexTrajectory:
    """RK4 trajectory with the conserved quantities sampled every step."""

    times: np.ndarray
    states: list[VortexConfig]
    invariant_series: dict[str, np.ndarray] = field(default_factory=dict)


_INVARIANT_KEYS = ("center_of_inertia", "angular_momentum", "log_sum", "quad_sum")


def integrate(
    cfg: VortexConfig,
    T: float,
    dt: float,
    delta_min: float = DELTA_MIN,
) -> VortexTrajectory:
    """Classical fixed-step RK4 on the point-vortex equations.

    The step is capped at d^2/10 (d = initial minimal separation) because the
    velocity varies on the scale of the separation; NearCollision is raised
    with the offending time if vortices approach within delta_min.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    d = min_separation(cfg)
    if dt > d**2 / 10.0:
        raise NumericalGuard(
            f"dt={dt:.3e} exceeds the stability guard d^2/10 = {d**2 / 10.0:.3e}"
        )
    g = cfg.circulations
    n_steps = max(int(round(T / dt)), 0)
    h = T / n_steps if n_steps else 0.0

    times = np.empty(n_steps + 1)
    states: list[VortexConfig] = []
    series = {key: [] for key in _INVARIANT_KEYS}

    def record(t: float, x: np.ndarray) -> None:
        snap = VortexConfig(
            positions=x.copy(),
            circulations=g,
            has_center=cfg.has_center,
            omega=cfg.omega,
        )
        states.append(snap)
        vals = invariants(snap)
        for key, val in zip(_INVARIANT_KEYS, vals):
            series[key].append(val)

    x = cfg.positions.astype(complex)
    record(0.0, x)
    times[0] = 0.0
    for n in range(n_steps):
        t = n * h
        try:
            k1 = rhs(x, g, delta_min)
            k2 = rhs(x + 0.5 * h * k1, g, delta_min)
            k3 = rhs(x + 0.5 * h * k2, g, delta_min)
            k4 = rhs(x + h * k3, g, delta_min)
        except NearCollision as exc:
            raise NearCollision(exc.distance, time=t) from None
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        times[n + 1] = t + h
        record(times[n + 1], x)

    series_arrays = {
        key: np.asarray(vals) for key, vals in series.items()
    }
    return VortexTrajectory(times=times, states=states, invariant_series=series_arrays)


def write_trajectory_csv(path, traj: VortexTrajectory) -> None:
    """Dump a trajectory, one row per sample, 17 significant digits."""
    n = traj.states[0].count
    cols = ["t"]
    for j in range(n):
        cols += [f"re_X{j}", f"im_X{j}"]
    cols += ["center_re", "center_im", "ang_mom", "log_sum", "quad_sum"]
    inv = traj.invariant_series
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(traj.times):
            x = traj.states[i].positions
            row = [f"{t:.17g}"]
            for j in range(n):
                row += [f"{x[j].real:.17g}", f"{x[j].imag:.17g}"]
            c = inv["center_of_inertia"][i]
            row += [
                f"{c.real:.17g}",
                f"{c.imag:.17g}",
                f"{inv['angular_momentum'][i]:.17g}",
                f"{inv['log_sum'][i]:.17g}",
                f"{inv['quad_sum'][i]:.17g}",
            ]
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# linear stability of polygon equilibria
# ---------------------------------------------------------------------------

def _corotating_jacobian(cfg: VortexConfig) -> np.ndarray:
    """Real 2M x 2M Jacobian of the co-rotating vector field at cfg.

    In the frame rotating at omega the field is
    F_j(Y) = i sum_k Gamma_k / conj(Y_j - Y_k) - i omega Y_j, so the Wirtinger
    derivatives are A_jl = dF_j/dY_l = -i omega delta_jl and
    B_jl = dF_j/d conj(Y_l) = i Gamma_l / conj(Y_jl)^2 for l != j,
    B_jj = -i sum_k Gamma_k / conj(Y_jk)^2.  Each (j, l) pair becomes the real
    block [[Re(A+B), -Im(A-B)], [Im(A+B), Re(A-B)]].
    """
    x, g = cfg.positions, cfg.circulations
    omega = cfg.omega if cfg.omega is not None else 0.0
    m = x.size
    diff = x[:, None] - x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_conj_sq = 1.0 / np.conj(diff) ** 2
    np.fill_diagonal(inv_conj_sq, 0.0)

    B = 1j * g[None, :] * inv_conj_sq
    np.fill_diagonal(B, -1j * np.sum(g[None, :] * inv_conj_sq, axis=1))
    A = np.diag(np.full(m, -1j * omega))

    jac = np.empty((2 * m, 2 * m))
    s, dmat = A + B, A - B
    jac[0::2, 0::2] = s.real
    jac[0::2, 1::2] = -dmat.imag
    jac[1::2, 0::2] = s.imag
    jac[1::2, 1::2] = dmat.real
    return jac


STABILITY_TOL = 1e-8  # separates rounding noise from genuine growth rates


def _spectrum_with_deflated_kernel(jac: np.ndarray) -> np.ndarray:
    """Eigenvalues of jac with the generalized kernel removed analytically.

    The linearization at a relative equilibrium always carries a defective
    zero eigenvalue (the scaling mode X feeds the rotation mode iX), and the
    marginal heptagon has four more neutral modes.  A dense eigenvalue routine
    scatters a defective zero by sqrt(eps)*||J||, which is larger than
    STABILITY_TOL and would misclassify every stable polygon.  The generalized
    kernel ker(J^2) is exactly invariant and its rank is decided by a singular
    value gap (observed ~1e-16 against O(1)), so we split it off, count its
    eigenvalues as exact zeros, and diagonalize the complement, where all
    eigenvalues are simple and come out at rounding accuracy.
    """
    n = jac.shape[0]
    sq = jac @ jac
    u_all, s, vt = np.linalg.svd(sq)
    del u_all
    smax = s[0]
    if smax == 0.0:
        return np.zeros(n, dtype=complex)
    ker_dim = int(np.sum(s < 1e-8 * smax))
    if ker_dim == 0:
        return np.linalg.eigvals(jac)
    kernel = vt[n - ker_dim:].T
    q, _ = np.linalg.qr(np.column_stack([kernel, np.eye(n)]))
    w = q[:, ker_dim:n]
    rest = np.linalg.eigvals(w.T @ jac @ w)
    return np.concatenate([np.zeros(ker_dim, dtype=complex), rest])


def linear_stability(
    N: int,
    gamma: float,
    center_circulation: float | None = None,
) -> tuple[np.ndarray, str]:
    """Spectrum of the linearized co-rotating dynamics at the polygon.

    Returns the eigenvalues and the verdict "stable" when no eigenvalue has
    real part above STABILITY_TOL, "unstable" otherwise.
    """
    if N < 3:
        raise InvalidPolygon(f"stability analysis needs N >= 3, got N={N}")
    cfg = polygon_config(N, 1.0, gamma, center_circulation)
    eigenvalues = _spectrum_with_deflated_kernel(_corotating_jacobian(cfg))
    verdict = "stable" if eigenvalues.real.max() <= STABILITY_TOL else "unstable"
    return eigenvalues, verdict
