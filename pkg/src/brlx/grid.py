"""Periodic grid on the d-dimensional torus [0, L)^d.

The grid owns the spectral layout (real FFT along the last axis), the
wavenumber lattice, quadrature, and the 3/2-rule dealiased product.  All
heavier objects (cutoff multiplier tables, dyadic block operators) cache
themselves per grid, so :class:`TorusGrid` is a frozen, hashable value type.

Conventions
-----------
* Forward transform is unnormalized, the inverse carries the 1/N^d factor
  (numpy convention).  Parseval therefore reads

      ||f||_L2^2 = (L^d / N^(2d)) * sum_k w_k |fhat_k|^2

  with the Hermitian weight w_k accounting for the half-spectrum storage.
* Wavenumbers are physical: k_j = (2*pi/L) * n_j with integer n_j.
* Products of band-limited fields are computed on a 3/2-padded grid and are
  exact (no aliasing) as long as both factors live inside the radial
  two-thirds band; the per-axis Nyquist plane is dropped when padding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import transforms
from .errors import ContractError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Uniform N^d grid on the torus of side length L.

    Parameters
    ----------
    dim : spatial dimension, 1, 2 or 3.
    n : points per axis; a power of two, at least 16.
    length : side length L > 0.
    """

    dim: int
    n: int
    length: float = 2.0 * math.pi

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ContractError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not _is_power_of_two(self.n) or self.n < 16:
            raise ContractError(f"n must be a power of two >= 16, got {self.n}")
        if not (self.length > 0.0) or not math.isfinite(self.length):
            raise ContractError(f"length must be positive and finite, got {self.length}")

    # -- basic geometry -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def nyquist(self) -> float:
        """Largest per-axis wavenumber magnitude, pi*N/L."""
        return math.pi * self.n / self.length

    @property
    def band_radius(self) -> float:
        """Radius of the dealiased band, two thirds of Nyquist."""
        return (2.0 / 3.0) * self.nyquist

    @property
    def corner_radius(self) -> float:
        """Largest |k| on the lattice (box corner), sqrt(d) * Nyquist."""
        return math.sqrt(self.dim) * self.nyquist

    @property
    def q_band(self) -> int:
        """Largest shell index q with (3/4)*2^q <= band_radius.

        Fields truncated to the dealiased band have no content in shells
        above this index.
        """
        return int(math.floor(math.log2(self.band_radius * 4.0 / 3.0)))

    @property
    def q_max(self) -> int:
        """Largest shell index whose annulus meets the wavenumber lattice.

        Decompositions run through this index so that reconstruction is
        exact for arbitrary grid fields, band-limited or not.
        """
        q = int(math.floor(math.log2(self.corner_radius * 4.0 / 3.0)))
        while 0.75 * 2.0 ** q >= self.corner_radius:
            q -= 1
        return q

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        x = np.arange(self.n) * self.spacing
        return tuple(x for _ in range(self.dim))

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes, indexing="ij"))

    # -- wavenumber lattice ---------------------------------------------

    @cached_property
    def k_components(self) -> tuple[np.ndarray, ...]:
        """Physical wavenumber along each axis, broadcast to spectral shape."""
        two_pi = 2.0 * math.pi / self.length
        comps = []
        for ax in range(self.dim):
            if ax == self.dim - 1:
                k1 = two_pi * np.arange(self.n // 2 + 1, dtype=float)
            else:
                k1 = two_pi * np.fft.fftfreq(self.n, d=1.0 / self.n)
            shape = [1] * self.dim
            shape[ax] = k1.size
            comps.append(k1.reshape(shape))
        return tuple(comps)

    @cached_property
    def k_sq(self) -> np.ndarray:
        out = np.zeros(self.spectral_shape)
        for c in self.k_components:
            out = out + c * c
        return out

    @cached_property
    def k_mag(self) -> np.ndarray:
        return np.sqrt(self.k_sq)

    @cached_property
    def hermitian_weight(self) -> np.ndarray:
        """Multiplicity weight for sums over the half-spectrum."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        if self.n % 2 == 0:
            w[..., -1] = 1.0
        return w

    @cached_property
    def band_mask(self) -> np.ndarray:
        return self.k_mag <= self.band_radius + 1e-12 * self.nyquist

    def derivative_multiplier(self, axis: int) -> np.ndarray:
        """i*k_axis with the per-axis Nyquist plane zeroed."""
        if not 0 <= axis < self.dim:
            raise ContractError(f"axis {axis} out of range for dim {self.dim}")
        return self._deriv_mults[axis]

    @cached_property
    def _deriv_mults(self) -> tuple[np.ndarray, ...]:
        nyq = self.nyquist
        mults = []
        for ax in range(self.dim):
            kc = np.broadcast_to(self.k_components[ax], self.spectral_shape).copy()
            kc[np.isclose(np.abs(kc), nyq)] = 0.0
            mults.append(1j * kc)
        return tuple(mults)

    # -- transforms ------------------------------------------------------

    def forward(self, samples: np.ndarray) -> np.ndarray:
        if samples.shape != self.shape:
            raise ContractError(f"samples shape {samples.shape} != grid shape {self.shape}")
        return transforms.rfftn(samples)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        if spectrum.shape != self.spectral_shape:
            raise ContractError(
                f"spectrum shape {spectrum.shape} != spectral shape {self.spectral_shape}"
            )
        return transforms.irfftn(spectrum, self.shape)

    # -- quadrature and norms -------------------------------------------

    def integrate(self, samples: np.ndarray) -> float:
        return float(np.sum(samples)) * self.spacing ** self.dim

    def lp_norm(self, samples: np.ndarray, p: float) -> float:
        """Rectangle-rule Lp norm on the lattice; p = inf gives the max."""
        if p == np.inf:
            return float(np.max(np.abs(samples)))
        if p <= 0:
            raise ContractError(f"p must be positive or inf, got {p}")
        a = np.abs(samples)
        return float((np.sum(a ** p) * self.spacing ** self.dim) ** (1.0 / p))

    def l2_from_spectrum(self, spectrum: np.ndarray) -> float:
        """Parseval L2 norm straight from the half-spectrum (no inverse FFT)."""
        s = np.sum(self.hermitian_weight * (spectrum.real ** 2 + spectrum.imag ** 2))
        return float(math.sqrt(s * self.length ** self.dim) / self.n ** self.dim)

    # -- dealiased products ---------------------------------------------

    @property
    def padded_n(self) -> int:
        return (3 * self.n) // 2

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return (self.padded_n,) * self.dim

    @cached_property
    def _pad_index(self) -> tuple[np.ndarray, ...]:
        """Index arrays placing the small half-spectrum inside the padded one.

        The per-axis Nyquist entry of the small grid is skipped, so it is
        implicitly zeroed by every padded round trip.
        """
        n, m = self.n, self.padded_n
        src, dst = [], []
        for ax in range(self.dim):
            if ax == self.dim - 1:
                src.append(np.arange(n // 2))
                dst.append(np.arange(n // 2))
            else:
                s = np.concatenate([np.arange(n // 2), np.arange(n // 2 + 1, n)])
                d = np.concatenate([np.arange(n // 2), np.arange(m - n // 2 + 1, m)])
                src.append(s)
                dst.append(d)
        return tuple(src), tuple(dst)

    def pad_spectrum(self, spectrum: np.ndarray) -> np.ndarray:
        src, dst = self._pad_index
        padded_spec_shape = (self.padded_n,) * (self.dim - 1) + (self.padded_n // 2 + 1,)
        out = np.zeros(padded_spec_shape, dtype=complex)
        out[np.ix_(*dst)] = spectrum[np.ix_(*src)]
        return out

    def truncate_spectrum(self, padded: np.ndarray) -> np.ndarray:
        src, dst = self._pad_index
        out = np.zeros(self.spectral_shape, dtype=complex)
        out[np.ix_(*src)] = padded[np.ix_(*dst)]
        return out

    def to_padded_physical(self, spectrum: np.ndarray) -> np.ndarray:
        """Inverse transform onto the 3/2 grid, preserving pointwise values."""
        scale = (self.padded_n / self.n) ** self.dim
        return transforms.irfftn(self.pad_spectrum(spectrum), self.padded_shape) * scale

    def from_padded_physical(self, samples: np.ndarray) -> np.ndarray:
        """Forward transform from the 3/2 grid, truncated to this grid."""
        scale = (self.n / self.padded_n) ** self.dim
        return self.truncate_spectrum(transforms.rfftn(samples)) * scale

    def dealiased_product(self, spec_a: np.ndarray, spec_b: np.ndarray) -> np.ndarray:
        """Spectrum of the pointwise product a*b via 3/2-rule zero padding.

        Exact (equal to the truncated convolution) whenever both factors
        are supported in the dealiased band.
        """
        a = self.to_padded_physical(spec_a)
        b = self.to_padded_physical(spec_b)
        return self.from_padded_physical(a * b)

    def band_truncate(self, spectrum: np.ndarray) -> np.ndarray:
        """Zero all modes outside the radial two-thirds band."""
        return np.where(self.band_mask, spectrum, 0.0)
