"""Periodic grid, exact linear propagation, and spectral utilities.

Everything downstream works on a uniform grid over [-L, L) with M nodes.
Fields that tend to a nonzero constant at the domain ends (profiles close
to 1, helices, ...) are stored together with that constant as a
``background``; every spectral operation acts on ``values - background``
so the FFT only ever sees a field that decays at the boundary.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGrid

#: Default tolerance for the "field is flat at the domain ends" guard.
DEFAULT_BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-L, L) with an FFT-ordered wavenumber set."""

    half_length: float
    num_points: int
    spacing: float
    nodes: np.ndarray = field(repr=False)
    wavenumbers: np.ndarray = field(repr=False)


def make_grid(half_length: float, num_points: int) -> Grid1D:
    """Build a grid with nodes sigma_i = -L + i*h, h = 2L/M.

    Wavenumbers are pi*k/L for k in {-M/2, ..., M/2 - 1}, stored in FFT
    order (zero mode first, Nyquist at the most negative entry).
    """
    if half_length <= 0:
        raise InvalidGrid(f"half_length must be positive, got {half_length}")
    if num_points % 2 != 0 or num_points < 8:
        raise InvalidGrid(f"num_points must be even and >= 8, got {num_points}")
    h = 2.0 * half_length / num_points
    nodes = -half_length + h * np.arange(num_points)
    wavenumbers = 2.0 * np.pi * np.fft.fftfreq(num_points, d=h)
    return Grid1D(
        half_length=float(half_length),
        num_points=int(num_points),
        spacing=h,
        nodes=nodes,
        wavenumbers=wavenumbers,
    )


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a grid plus the constant they tend to at +-L.

    Operations never mutate a field in place; they return new instances.
    """

    grid: Grid1D
    values: np.ndarray = field(repr=False)
    background: complex = 0.0


def make_field(grid: Grid1D, values: np.ndarray, background: complex = 0.0) -> ComplexField:
    """Wrap samples as a ComplexField, checking the length."""
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != (grid.num_points,):
        raise InvalidGrid(
            f"field has {values.shape} samples, grid expects ({grid.num_points},)"
        )
    return ComplexField(grid=grid, values=values, background=complex(background))


def constant_field(grid: Grid1D, value: complex) -> ComplexField:
    """A spatially constant field equal to its own background."""
    return ComplexField(
        grid=grid,
        values=np.full(grid.num_points, complex(value), dtype=np.complex128),
        background=complex(value),
    )


def boundary_deviation(f: ComplexField) -> float:
    """How far the field sits from its background at the two end nodes."""
    dev0 = abs(f.values[0] - f.background)
    dev1 = abs(f.values[-1] - f.background)
    return float(max(dev0, dev1))


def linear_propagate(f: ComplexField, gamma: float, t: float) -> ComplexField:
    """Exact solution at time t of  i df/dt + gamma * d^2f/dsigma^2 = 0.

    Applied as the Fourier multiplier exp(-i*gamma*xi^2*t) on the
    zero-background part; the background (a constant, hence invariant
    under the flow) is re-added.
    """
    xi = f.grid.wavenumbers
    spec = np.fft.fft(f.values - f.background)
    spec *= np.exp(-1j * gamma * xi**2 * t)
    return ComplexField(
        grid=f.grid,
        values=np.fft.ifft(spec) + f.background,
        background=f.background,
    )


def derivative(f: ComplexField, order: int = 1) -> ComplexField:
    """Spectral derivative d^order/dsigma^order of (f - background).

    The result has background 0 (constants differentiate to zero).
    """
    xi = f.grid.wavenumbers
    spec = np.fft.fft(f.values - f.background)
    spec *= (1j * xi) ** order
    return ComplexField(grid=f.grid, values=np.fft.ifft(spec), background=0.0)


def quad_trapezoid(grid: Grid1D, samples: np.ndarray) -> complex | float:
    """Periodic trapezoid rule h * sum(g_i); exact degree of an FFT grid.

    Returns a float for real input, complex otherwise.
    """
    total = grid.spacing * np.sum(samples)
    if np.iscomplexobj(samples):
        return complex(total)
    return float(total)


def norms(f: ComplexField) -> tuple[float, float, float]:
    """(L2, H1, sup) norms of f - background.

    H1^2 = L2^2 + L2(d/dsigma)^2, all discrete.
    """
    dev = f.values - f.background
    l2sq = float(quad_trapezoid(f.grid, np.abs(dev) ** 2))
    deriv = derivative(f).values
    dl2sq = float(quad_trapezoid(f.grid, np.abs(deriv) ** 2))
    l2 = np.sqrt(l2sq)
    h1 = np.sqrt(l2sq + dl2sq)
    sup = float(np.max(np.abs(dev))) if len(dev) else 0.0
    return (float(l2), float(h1), sup)


def shift_field(f: ComplexField, displacement: float) -> ComplexField:
    """Evaluate f(sigma - displacement) by the exact Fourier shift."""
    xi = f.grid.wavenumbers
    spec = np.fft.fft(f.values - f.background)
    spec *= np.exp(-1j * xi * displacement)
    return ComplexField(
        grid=f.grid,
        values=np.fft.ifft(spec) + f.background,
        background=f.background,
    )


# ---------------------------------------------------------------------------
# Field dumps (shared output format)
# ---------------------------------------------------------------------------

_RAW_MAGIC = b"VFS1"


def write_fields_csv(path, grid: Grid1D, fields: list[ComplexField] | list[np.ndarray]) -> None:
    """Write fields as CSV: sigma,re_0,im_0,...  17 significant digits."""
    arrays = [f.values if isinstance(f, ComplexField) else np.asarray(f) for f in fields]
    header = "sigma," + ",".join(f"re_{j},im_{j}" for j in range(len(arrays)))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(grid.num_points):
            row = [f"{grid.nodes[i]:.17g}"]
            for arr in arrays:
                row.append(f"{arr[i].real:.17g}")
                row.append(f"{arr[i].imag:.17g}")
            fh.write(",".join(row) + "\n")


def read_fields_csv(path) -> tuple[np.ndarray, list[np.ndarray]]:
    """Read a CSV written by write_fields_csv: (sigma nodes, field arrays)."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    sigma = np.asarray(data["sigma"], dtype=float)
    n_fields = (len(names) - 1) // 2
    arrays = []
    for j in range(n_fields):
        arrays.append(
            np.asarray(data[f"re_{j}"], dtype=float)
            + 1j * np.asarray(data[f"im_{j}"], dtype=float)
        )
    return sigma, arrays


def write_fields_raw(path, fields: list[ComplexField] | list[np.ndarray]) -> None:
    """Raw dump: 16-byte header (magic VFS1, uint32 M, uint32 n_fields,
    4 reserved zero bytes), then per field M little-endian float64
    (re, im) pairs."""
    arrays = [f.values if isinstance(f, ComplexField) else np.asarray(f) for f in fields]
    m = len(arrays[0]) if arrays else 0
    with open(path, "wb") as fh:
        fh.write(_RAW_MAGIC)
        fh.write(struct.pack("<III", m, len(arrays), 0))
        for arr in arrays:
            pairs = np.empty((m, 2), dtype="<f8")
            pairs[:, 0] = arr.real
            pairs[:, 1] = arr.imag
            fh.write(pairs.tobytes())


def read_fields_raw(path) -> list[np.ndarray]:
    """Read a raw dump written by write_fields_raw."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _RAW_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_RAW_MAGIC!r}")
        m, n_fields, _reserved = struct.unpack("<III", fh.read(12))
        arrays = []
        for _ in range(n_fields):
            pairs = np.frombuffer(fh.read(16 * m), dtype="<f8").reshape(m, 2)
            arrays.append(pairs[:, 0] + 1j * pairs[:, 1])
    return arrays
