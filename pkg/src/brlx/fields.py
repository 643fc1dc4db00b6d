"""Scalar and vector fields on a :class:`~brlx.grid.TorusGrid`.

A :class:`Field` is an immutable pairing of a grid with real sample values;
the half-spectrum is computed lazily and cached.  Vector fields are thin
tuples of scalar components sharing one grid.

Serialization: a flat little-endian binary format with a 32-byte header
(magic ``BRLX``, dim, n, length) plus a CSV form for small grids.
"""

from __future__ import annotations

import csv
import struct
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ContractError
from .grid import TorusGrid

_MAGIC = b"BRLX"
_HEADER = struct.Struct("<4sIId12x")  # magic, dim, n, length, reserved
assert _HEADER.size == 32


class Field:
    """Real scalar field sampled on the grid lattice.

    Samples are frozen at construction (the array is marked read-only) and
    must be finite.  ``spectrum`` is the unnormalized real-FFT half-spectrum
    and round-trips with the samples at machine precision.
    """

    __slots__ = ("grid", "_samples", "__dict__")

    def __init__(self, grid: TorusGrid, samples: np.ndarray):
        samples = np.asarray(samples, dtype=float)
        if samples.shape != grid.shape:
            raise ContractError(
                f"samples shape {samples.shape} does not match grid shape {grid.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ContractError("field samples must be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        self.grid = grid
        self._samples = samples

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @cached_property
    def spectrum(self) -> np.ndarray:
        spec = self.grid.forward(self._samples)
        spec.flags.writeable = False
        return spec

    def _seed_spectrum(self, spec: np.ndarray) -> "Field":
        spec = np.asarray(spec, dtype=complex)
        if spec.base is not None or spec.flags.writeable:
            spec = spec.copy()
        spec.flags.writeable = False
        self.__dict__["spectrum"] = spec
        return self

    @classmethod
    def from_spectrum(cls, grid: TorusGrid, spectrum: np.ndarray) -> "Field":
        """Build a field from its half-spectrum.

        The spectrum is kept as the cached transform, so multiplier-made
        zeros stay exact.  The caller must pass a spectrum that is the real
        FFT of a real field (every construction in this package is).
        """
        spectrum = np.asarray(spectrum, dtype=complex)
        f = cls(grid, grid.inverse(spectrum))
        return f._seed_spectrum(spectrum)

    def _cached_spec(self) -> np.ndarray | None:
        return self.__dict__.get("spectrum")

    # -- algebra (convenience, same grid enforced; cached spectra combine
    #    linearly so no transform is repeated) --------------------------

    def _check_same_grid(self, other: "Field") -> None:
        if self.grid != other.grid:
            raise ContractError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        out = Field(self.grid, self._samples + other._samples)
        a, b = self._cached_spec(), other._cached_spec()
        if a is not None and b is not None:
            out._seed_spectrum(a + b)
        return out

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        out = Field(self.grid, self._samples - other._samples)
        a, b = self._cached_spec(), other._cached_spec()
        if a is not None and b is not None:
            out._seed_spectrum(a - b)
        return out

    def __mul__(self, c: float) -> "Field":
        out = Field(self.grid, self._samples * float(c))
        a = self._cached_spec()
        if a is not None:
            out._seed_spectrum(a * float(c))
        return out

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.__mul__(-1.0)

    # -- calculus --------------------------------------------------------

    def derivative(self, axis: int) -> "Field":
        spec = self.spectrum * self.grid.derivative_multiplier(axis)
        return Field.from_spectrum(self.grid, spec)

    def gradient(self) -> "VectorField":
        return VectorField(tuple(self.derivative(ax) for ax in range(self.grid.dim)))

    # -- norms -----------------------------------------------------------

    def l2(self) -> float:
        return self.grid.l2_from_spectrum(self.spectrum)

    def lp(self, p: float) -> float:
        return self.grid.lp_norm(self._samples, p)

    def mean(self) -> float:
        return float(np.mean(self._samples))

    def __repr__(self) -> str:
        g = self.grid
        return f"Field(dim={g.dim}, n={g.n}, L={g.length:.6g})"


class VectorField:
    """Tuple of scalar components on a shared grid."""

    __slots__ = ("components",)

    def __init__(self, components: tuple[Field, ...] | list[Field]):
        components = tuple(components)
        if not components:
            raise ContractError("vector field needs at least one component")
        g = components[0].grid
        for c in components[1:]:
            if c.grid != g:
                raise ContractError("vector components live on different grids")
        if len(components) != g.dim:
            raise ContractError(
                f"expected {g.dim} components for dim {g.dim}, got {len(components)}"
            )
        self.components = components

    @property
    def grid(self) -> TorusGrid:
        return self.components[0].grid

    @classmethod
    def zero(cls, grid: TorusGrid) -> "VectorField":
        z = Field(grid, np.zeros(grid.shape))
        return cls(tuple(z for _ in range(grid.dim)))

    def divergence(self) -> Field:
        g = self.grid
        spec = np.zeros(g.spectral_shape, dtype=complex)
        for ax, comp in enumerate(self.components):
            spec = spec + comp.spectrum * g.derivative_multiplier(ax)
        return Field.from_spectrum(g, spec)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a - b for a, b in zip(self.components, other.components)))

    def __mul__(self, c: float) -> "VectorField":
        return VectorField(tuple(comp * c for comp in self.components))

    __rmul__ = __mul__

    def l2(self) -> float:
        return float(np.sqrt(sum(c.l2() ** 2 for c in self.components)))

    def magnitude(self) -> np.ndarray:
        return np.sqrt(sum(c.samples ** 2 for c in self.components))

    def __repr__(self) -> str:
        return f"VectorField({self.grid.dim} components, n={self.grid.n})"


class TimeSeriesField:
    """Snapshots of one scalar field at increasing times, starting at t=0."""

    __slots__ = ("times", "snapshots")

    def __init__(self, times, snapshots):
        times = np.asarray(times, dtype=float)
        snapshots = list(snapshots)
        if times.ndim != 1 or times.size < 2:
            raise ContractError("need at least two time instants")
        if times[0] != 0.0:
            raise ContractError("time axis must start at 0")
        if np.any(np.diff(times) <= 0):
            raise ContractError("times must be strictly increasing")
        if len(snapshots) != times.size:
            raise ContractError("one snapshot per time instant required")
        g = snapshots[0].grid
        for s in snapshots[1:]:
            if s.grid != g:
                raise ContractError("snapshots live on different grids")
        self.times = times
        self.snapshots = snapshots

    @property
    def grid(self) -> TorusGrid:
        return self.snapshots[0].grid

    def __len__(self) -> int:
        return len(self.snapshots)


# -- serialization -------------------------------------------------------


def save_field(field: Field, path: str | Path) -> None:
    """Write the 32-byte header followed by row-major float64 samples."""
    path = Path(path)
    header = _HEADER.pack(_MAGIC, field.grid.dim, field.grid.n, field.grid.length)
    data = np.ascontiguousarray(field.samples, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def load_field(path: str | Path) -> Field:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ContractError(f"{path}: truncated header")
    magic, dim, n, length = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ContractError(f"{path}: bad magic {magic!r}")
    grid = TorusGrid(int(dim), int(n), float(length))
    expected = n ** dim * 8
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise ContractError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    samples = np.frombuffer(payload, dtype="<f8").reshape(grid.shape)
    return Field(grid, samples.astype(float))


def save_field_csv(field: Field, path: str | Path) -> None:
    """CSV form for small grids: integer lattice indices plus the value."""
    g = field.grid
    if g.n ** g.dim > 1 << 20:
        raise ContractError("CSV serialization is meant for small grids")
    path = Path(path)
    idx_names = ["i", "j", "k"][: g.dim]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dim", "n", "length"])
        writer.writerow([g.dim, g.n, repr(g.length)])
        writer.writerow(idx_names + ["value"])
        for idx in np.ndindex(*g.shape):
            writer.writerow(list(idx) + [repr(float(field.samples[idx]))])


def load_field_csv(path: str | Path) -> Field:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader)
        if head[:3] != ["dim", "n", "length"]:
            raise ContractError(f"{path}: not a field CSV")
        dim, n, length = next(reader)
        grid = TorusGrid(int(dim), int(n), float(length))
        next(reader)  # column names
        samples = np.zeros(grid.shape)
        for row in reader:
            idx = tuple(int(v) for v in row[: grid.dim])
            samples[idx] = float(row[grid.dim])
    return Field(grid, samples)
