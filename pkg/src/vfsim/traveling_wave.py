"""Travelling-wave profiles of the reduced filament equation.

Builds the even, real-amplitude travelling waves v(sigma) = sqrt(1 - eta) e^{i theta}
whose amplitude solves the planar Hamiltonian system

    eta'' = 2 omega ln(1 - eta) - (c^2 - 4 omega) eta,   eta(0) = sigma1, eta'(0) = 0,

with first integral (eta')^2 = a(eta), and whose phase obeys the Madelung relation
(1 - eta) theta' = c eta / 2.  The turning point sigma1 is the smallest positive
root of a, located by bisection on b = a / eta^2.  The module also provides the
explicit Gross-Pitaevskii soliton with the same speed (a near-miss profile used
as a negative control) and helical multi-filament fields built from a profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp

from .errors import (
    BoundViolated,
    DomainError,
    EtaEscaped,
    NoRoot,
    NotMonotone,
    ZeroModulus,
)
from .grid import ComplexField, Grid1D, derivative, make_field, quad_trapezoid, shift_field
from .reduced import lattice_wavenumber

# Default box for wave construction.  The box must hold many decay lengths of
# the amplitude tail, and the phase quadrature error scales like h^2, so the
# default grid is long and fine.
DEFAULT_WAVE_HALF_LENGTH = 256.0
DEFAULT_WAVE_MODES = 65536

# Bisection stops when |b| drops below this at the midpoint.
ROOT_TOL = 1e-14

# The amplitude equation switches from the second-order form to the
# first-integral form once eta falls below this fraction of sigma1.  Past the
# turning point the first-order form is contraction-stable, while the
# second-order form would amplify roundoff along e^{+sqrt(2 omega - c^2) sigma}
# over a long box.
SWITCH_FRACTION = 0.5

_ODE_RTOL = 1e-12
_ODE_ATOL = 1e-14


@dataclass(frozen=True)
class WaveParams:
    """Speed and rotation parameters of a travelling wave.

    Requires omega > 0 and 0 < 2 omega - c^2 < eta3, with eta3 defaulting to
    0.2 omega.  Violations raise DomainError.
    """

    omega: float
    c: float
    eta3: float = 0.0

    def __post_init__(self):
        if self.omega <= 0.0:
            raise DomainError(f"omega = {self.omega:.6g} must be positive")
        if self.eta3 == 0.0:
            object.__setattr__(self, "eta3", 0.2 * self.omega)
        if self.c <= 0.0:
            raise DomainError(f"wave speed c = {self.c:.6g} must be positive")
        gap = 2.0 * self.omega - self.c**2
        if not 0.0 < gap < self.eta3:
            raise DomainError(
                f"2*omega - c^2 = {gap:.6g} must lie in (0, {self.eta3:.6g})"
            )

    @property
    def gap(self) -> float:
        """The slow-speed parameter 2 omega - c^2."""
        return 2.0 * self.omega - self.c**2

    @property
    def sigma0(self) -> float:
        """Upper end 3 (2 omega - c^2) / (2 omega) of the root bracket."""
        return 1.5 * self.gap / self.omega


@dataclass(frozen=True)
class WaveProfile:
    """A fully assembled travelling wave on a grid.

    eta and theta are node samples of amplitude defect and phase; v is the
    complex profile with background e^{i jump/2} (the right asymptotic phase,
    theta being odd).  periodic_part is the de-twisted field
    w = v e^{-i twist sigma}, which has background 1 and is the representation
    safe for spectral work; twist = phase_jump / (2 L).
    """

    params: WaveParams
    grid: Grid1D
    sigma1: float
    eta: np.ndarray
    theta: np.ndarray
    v: ComplexField
    periodic_part: ComplexField
    twist: float
    energy: float
    phase_jump: float


def a_of(eta, params: WaveParams):
    """Potential a(eta) = -(c^2 - 4 omega) eta^2 + 4 omega ((eta - 1) ln(1 - eta) - eta).

    Vectorized; below eta = 1e-4 the series
    (2 omega - c^2) eta^2 - (2 omega / 3) eta^3 - (omega / 3) eta^4 is used to
    dodge the cancellation of the direct form.  Arguments must lie in [0, 1).
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0.0) or np.any(eta >= 1.0):
        raise DomainError("a(eta) requires 0 <= eta < 1")
    om, c2 = params.omega, params.c**2
    small = eta < 1e-4
    direct = (4.0 * om - c2) * eta**2 + 4.0 * om * (
        (eta - 1.0) * np.log1p(-np.where(small, 0.0, eta)) - eta
    )
    series = eta**2 * (params.gap - (2.0 * om / 3.0) * eta - (om / 3.0) * eta**2)
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def b_of(eta, params: WaveParams):
    """b(eta) = a(eta) / eta^2, extended by continuity to b(0) = 2 omega - c^2."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0.0) or np.any(eta >= 1.0):
        raise DomainError("b(eta) requires 0 <= eta < 1")
    om = params.omega
    small = eta < 1e-4
    safe = np.where(small, 0.5, eta)
    direct = np.asarray(a_of(safe, params)) / safe**2
    series = params.gap - (2.0 * om / 3.0) * eta - (om / 3.0) * eta**2
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def find_sigma1(params: WaveParams) -> float:
    """Smallest positive root of a, via bisection on b over (0, sigma0].

    b(0) = 2 omega - c^2 > 0 and b(sigma0) < 0, so a sign change is bracketed;
    b is checked to be strictly decreasing on the bracket first (NotMonotone
    otherwise, NoRoot if the endpoint sign is wrong).  The returned sigma1
    satisfies |b(sigma1)| < 1e-14.
    """
    s0 = params.sigma0
    samples = b_of(np.linspace(0.0, s0, 201), params)
    if np.any(np.diff(samples) >= 0.0):
        raise NotMonotone(f"b is not strictly decreasing on [0, {s0:.6g}]")
    if samples[-1] > 0.0:
        raise NoRoot(f"b({s0:.6g}) = {samples[-1]:.6g} > 0: no bracketed root")
    lo, hi = 0.0, s0
    mid = 0.5 * s0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        bm = b_of(mid, params)
        if abs(bm) < ROOT_TOL:
            return mid
        if bm > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            break
    if abs(b_of(mid, params)) < 10.0 * ROOT_TOL:
        return mid
    raise NoRoot(f"bisection stalled at {mid:.17g} with b = {b_of(mid, params):.3g}")


def solve_eta(params: WaveParams, grid: Grid1D, sigma1: float | None = None) -> np.ndarray:
    """Amplitude defect eta sampled on the grid nodes.

    Integrates the second-order equation from the turning point (eta(0) = sigma1,
    eta'(0) = 0) outward until eta has halved, then follows the first-integral
    form eta' = -sqrt(a(eta)), in the logarithmic variable ln(eta), to the
    boundary; the solution is extended to negative sigma by evenness.  The
    hand-off keeps the shot stable: the second-order form would amplify
    roundoff exponentially over a long box, while the first-order form cannot
    resolve the turning point.  Raises EtaEscaped if the trajectory leaves
    [0, sigma1] beyond tolerance.
    """
    if sigma1 is None:
        sigma1 = find_sigma1(params)
    om, c2 = params.omega, params.c**2
    half = SWITCH_FRACTION * sigma1

    def second_order(_s, y):
        return (y[1], 2.0 * om * np.log1p(-y[0]) + (4.0 * om - c2) * y[0])

    def crossing(_s, y):
        return y[0] - half

    crossing.terminal = True
    crossing.direction = -1.0

    L = grid.half_length
    sol1 = solve_ivp(
        second_order, (0.0, L), (sigma1, 0.0), rtol=_ODE_RTOL, atol=_ODE_ATOL,
        dense_output=True, events=crossing,
    )
    if not sol1.success:
        raise EtaEscaped(float(sol1.t[-1]), float(sol1.y[0, -1]), sigma1)

    abs_nodes = np.abs(grid.nodes)
    if sol1.t_events[0].size == 0:
        eta_abs = sol1.sol(abs_nodes)[0]
    else:
        s_switch = float(sol1.t_events[0][0])
        eta_switch = float(sol1.sol(s_switch)[0])

        # Past the turning point, track u = ln(eta): u' = -sqrt(b(e^u)) is a
        # slowly varying slope, so the integrator takes long steps, eta stays
        # positive by construction, and the deep tail never underflows inside
        # the equation (b(0+) = 2 omega - c^2 is finite).
        def log_first_order(_s, u):
            return (-np.sqrt(b_of(min(float(np.exp(u[0])), sigma1), params)),)

        sol2 = solve_ivp(
            log_first_order, (s_switch, L), (np.log(eta_switch),),
            rtol=_ODE_RTOL, atol=1e-12, dense_output=True,
        )
        if not sol2.success:
            raise EtaEscaped(float(sol2.t[-1]), float(np.exp(sol2.y[0, -1])), sigma1)
        near = abs_nodes <= s_switch
        eta_abs = np.empty_like(abs_nodes)
        eta_abs[near] = sol1.sol(abs_nodes[near])[0]
        eta_abs[~near] = np.exp(sol2.sol(abs_nodes[~near])[0])

    slack = 1e-10 * sigma1
    if np.any(eta_abs < -slack) or np.any(eta_abs > sigma1 + slack):
        bad = int(np.argmax(np.abs(eta_abs - 0.5 * sigma1)))
        raise EtaEscaped(float(grid.nodes[bad]), float(eta_abs[bad]), sigma1)
    return np.clip(eta_abs, 0.0, sigma1)


def solve_theta(eta: np.ndarray, params: WaveParams, grid: Grid1D) -> np.ndarray:
    """Phase theta on the grid nodes, gauge theta(0) = 0.

    Cumulative trapezoid of theta' = c eta / (2 (1 - eta)); the grid node at
    sigma = 0 anchors the gauge, which makes theta odd when eta is even.
    """
    rate = params.c * eta / (2.0 * (1.0 - eta))
    theta = cumulative_trapezoid(rate, dx=grid.spacing, initial=0.0)
    return theta - theta[grid.num_points // 2]


def assemble_wave(
    params: WaveParams,
    grid: Grid1D,
    sigma1: float,
    eta: np.ndarray,
    theta: np.ndarray,
) -> WaveProfile:
    """Assemble v = sqrt(1 - eta) e^{i theta} and its certified bounds.

    Raises BoundViolated if the amplitude defect leaves (0, sigma0) anywhere,
    the pointwise bound every admissible wave satisfies; the energy and the
    total phase jump are recorded on the profile.
    """
    if np.any(eta <= 0.0) or np.any(eta >= params.sigma0):
        raise BoundViolated(
            f"1 - |v|^2 must stay inside (0, {params.sigma0:.6g}); "
            f"range [{eta.min():.3g}, {eta.max():.3g}]"
        )
    rate = params.c * eta / (2.0 * (1.0 - eta))
    jump = quad_trapezoid(grid, rate)
    twist = jump / (2.0 * grid.half_length)

    values = np.sqrt(1.0 - eta) * np.exp(1j * theta)
    v = make_field(grid, values, background=np.exp(0.5j * jump))
    w = make_field(grid, values * np.exp(-1j * twist * grid.nodes), background=1.0 + 0.0j)

    dw = derivative(w).values
    kinetic = 0.5 * quad_trapezoid(grid, np.abs(dw + 1j * twist * w.values) ** 2)
    potential = 0.5 * params.omega * quad_trapezoid(grid, -eta - np.log1p(-eta))
    return WaveProfile(
        params=params,
        grid=grid,
        sigma1=sigma1,
        eta=eta,
        theta=theta,
        v=v,
        periodic_part=w,
        twist=twist,
        energy=kinetic + potential,
        phase_jump=jump,
    )


def build_wave(params: WaveParams, grid: Grid1D) -> WaveProfile:
    """Run the full pipeline: locate sigma1, integrate eta, integrate theta, assemble."""
    sigma1 = find_sigma1(params)
    eta = solve_eta(params, grid, sigma1)
    theta = solve_theta(eta, params, grid)
    return assemble_wave(params, grid, sigma1, eta, theta)


def _detwist(field: ComplexField):
    """Split a field with asymptotically constant phases into (w, twist).

    twist is the linear phase rate lambda = jump / (2 L) with jump read off the
    two end nodes, and w = field * e^{-i lambda sigma} is periodic up to the
    field's tail decay.  Exact for any lambda; the choice only controls how
    smooth w is across the wrap.
    """
    values = field.values
    if np.abs(values[0]) == 0.0 or np.abs(values[-1]) == 0.0:
        raise ZeroModulus(0.0, 0.0)
    jump = float(np.angle(values[-1] * np.conj(values[0])))
    twist = jump / (2.0 * field.grid.half_length)
    w = make_field(
        field.grid,
        values * np.exp(-1j * twist * field.grid.nodes),
        background=values[0] * np.exp(1j * twist * field.grid.half_length),
    )
    return w, twist


def residual_tw(v: ComplexField, params: WaveParams) -> float:
    """Sup norm of the travelling-wave equation residual i c v' + v'' + omega (v / |v|^2)(1 - |v|^2).

    Derivatives are spectral, taken through the de-twisted representation so a
    profile with unequal asymptotic phases is differentiated without wrap
    artifacts.  The profile must be bounded away from zero.
    """
    mod2 = np.abs(v.values) ** 2
    if mod2.min() <= 0.0:
        raise ZeroModulus(float(np.sqrt(mod2.min())), 0.0)
    w, twist = _detwist(v)
    dw = derivative(w).values
    ddw = derivative(w, order=2).values
    phase = np.exp(1j * twist * v.grid.nodes)
    dv = (dw + 1j * twist * w.values) * phase
    ddv = (ddw + 2j * twist * dw - twist**2 * w.values) * phase
    resid = 1j * params.c * dv + ddv + params.omega * (v.values / mod2) * (1.0 - mod2)
    return float(np.max(np.abs(resid)))


def wronskian(v: ComplexField) -> np.ndarray:
    """Pointwise v1 v2' - v1' v2 (real and imaginary parts), spectrally.

    For a travelling wave this equals c eta / 2; computed through the
    de-twisted representation.
    """
    w, twist = _detwist(v)
    dw = derivative(w).values
    phase = np.exp(1j * twist * v.grid.nodes)
    dv = (dw + 1j * twist * w.values) * phase
    return np.imag(np.conj(v.values) * dv)


def gp_soliton(params: WaveParams, grid: Grid1D) -> ComplexField:
    """The explicit Gross-Pitaevskii dark soliton with speed c and rotation omega.

    Modulus dips to |v_c(0)|^2 = c^2 / (2 omega); the phase is the closed
    arctan form, gauged to 0 at sigma = -infinity and carrying the full
    asymptotic jump on the right.  Used as a near-miss control: it does not
    solve the travelling-wave equation of the filament model.
    """
    om, c = params.omega, params.c
    root = np.sqrt(params.gap)
    sech2 = 1.0 / np.cosh(0.5 * root * grid.nodes) ** 2
    modulus = np.sqrt(1.0 - params.gap / (2.0 * om) * sech2)
    phase = np.arctan(
        (om * np.exp(root * grid.nodes) + c**2 - om) / (c * root)
    ) - np.arctan((c**2 - om) / (c * root))
    values = modulus * np.exp(1j * phase)
    background = np.exp(1j * (0.5 * np.pi - np.arctan((c**2 - om) / (c * root))))
    return make_field(grid, values, background=background)


def helix_filaments(
    profile: WaveProfile, count: int, nu: float, time: float = 0.0
) -> list[ComplexField]:
    """The count-filament helical solution built on a travelling wave.

    Filament j is e^{i time (omega - nu^2) + i nu sigma + 2 pi i j / count}
    v(sigma + time (c - 2 nu)); nu must be a grid wavenumber so the sampled
    fields wrap cleanly.  The profile shift acts on the periodic part
    spectrally.  Returned fields have background 0 (they oscillate at the
    ends).
    """
    if count < 1:
        raise DomainError(f"count = {count} must be at least 1")
    grid = profile.grid
    nu = lattice_wavenumber(grid, nu)
    shift = time * (profile.params.c - 2.0 * nu)
    w = shift_field(profile.periodic_part, -shift)
    base = w.values * np.exp(1j * profile.twist * (grid.nodes + shift))
    common = np.exp(
        1j * time * (profile.params.omega - nu**2) + 1j * nu * grid.nodes
    )
    fields = []
    for j in range(count):
        values = base * common * np.exp(2j * np.pi * j / count)
        fields.append(make_field(grid, values, background=0.0j))
    return fields


def sweep_waves(params_list: list[WaveParams], grid: Grid1D) -> list[dict]:
    """Build each wave and collect (c^2, sigma1, energy, phase_jump, residual) records."""
    records = []
    for params in params_list:
        profile = build_wave(params, grid)
        records.append(
            {
                "c2": params.c**2,
                "sigma1": profile.sigma1,
                "energy": profile.energy,
                "phase_jump": profile.phase_jump,
                "residual": residual_tw(profile.v, params),
            }
        )
    return records
