"""Smooth radial cutoff pair generating the dyadic shell decomposition.

``low_pass`` (the ball cutoff) equals 1 below 3/4, vanishes above 4/3, and
ramps with the standard C-infinity transition h(u) = g(u) / (g(u) + g(1-u)),
g(u) = exp(-sharpness/u).  The shell profile is the exact telescoping
difference ``band_pass(t) = low_pass(t/2) - low_pass(t)``, supported in
[3/4, 8/3], so the dyadic partition of unity

    low_pass(t) + sum_{q >= 0} band_pass(t / 2^q) = 1

holds identically (each partial sum collapses to low_pass(t / 2^(Q+1))).
Outside the ramp the profiles evaluate to exactly 0.0 or 1.0, which makes
block supports exact on the wavenumber lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ContractError

RAMP_LO = 0.75
RAMP_HI = 4.0 / 3.0
SHELL_LO = RAMP_LO
SHELL_HI = 2.0 * RAMP_HI


def _bump_ratio(u: np.ndarray, sharpness: float) -> np.ndarray:
    """h(u): 0 for u <= 0, 1 for u >= 1, C-infinity monotone in between."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    lo = u <= 0.0
    hi = u >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    um = u[mid]
    with np.errstate(over="ignore"):
        a = np.exp(-sharpness / um)
        b = np.exp(-sharpness / (1.0 - um))
    out[mid] = a / (a + b)
    return out


@dataclass(frozen=True)
class CutoffPair:
    """Ball and shell profiles plus a tabulation on a fine radius grid."""

    sharpness: float = 1.0

    def __post_init__(self):
        if not self.sharpness > 0.0:
            raise ContractError(f"transition sharpness must be positive, got {self.sharpness}")

    def low_pass(self, t) -> np.ndarray:
        """Ball cutoff: 1 on [0, 3/4], 0 on [4/3, inf)."""
        t = np.asarray(t, dtype=float)
        u = (RAMP_HI - t) / (RAMP_HI - RAMP_LO)
        return _bump_ratio(u, self.sharpness)

    def band_pass(self, t) -> np.ndarray:
        """Shell profile low_pass(t/2) - low_pass(t), supported in [3/4, 8/3]."""
        t = np.asarray(t, dtype=float)
        return self.low_pass(t / 2.0) - self.low_pass(t)

    def partition_defect(self, radii) -> float:
        """Max deviation of the dyadic partition of unity over given radii.

        Enough shell terms are summed for the telescoped tail to sit in the
        flat region of the ball cutoff, so the defect is pure roundoff.
        """
        radii = np.asarray(radii, dtype=float)
        t_max = float(np.max(radii)) if radii.size else 1.0
        q_top = max(0, int(np.ceil(np.log2(max(t_max, 1.0) / RAMP_LO))))
        total = self.low_pass(radii)
        for q in range(q_top + 1):
            total = total + self.band_pass(radii / 2.0 ** q)
        return float(np.max(np.abs(total - 1.0)))

    @property
    def table(self) -> np.ndarray:
        """(radius, ball, shell) rows on a fine grid covering [0, 3]."""
        return _profile_table(self.sharpness)


@lru_cache(maxsize=8)
def _profile_table(sharpness: float) -> np.ndarray:
    pair = CutoffPair(sharpness)
    r = np.linspace(0.0, 3.0, 4097)
    tab = np.column_stack([r, pair.low_pass(r), pair.band_pass(r)])
    tab.flags.writeable = False
    return tab


@lru_cache(maxsize=8)
def build_cutoffs(transition_sharpness: float = 1.0) -> CutoffPair:
    """Shared cutoff pair; cached so block operators can key off identity."""
    return CutoffPair(float(transition_sharpness))
