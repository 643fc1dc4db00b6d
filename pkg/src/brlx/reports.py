"""Shared result records for the verification suites."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FitReport:
    """Per-member ratios LHS/RHS of one inequality over an ensemble.

    ``fitted`` is the smallest constant making the inequality hold for every
    member, i.e. the max ratio.
    """

    label: str
    ratios: np.ndarray
    notes: dict = field(default_factory=dict)

    @property
    def fitted(self) -> float:
        return float(np.max(self.ratios))

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios))

    def summary(self) -> str:
        return (
            f"{self.label}: fitted C = {self.fitted:.6g} "
            f"(mean {self.mean:.6g}, n = {len(self.ratios)})"
        )


def relative_drift(a: float, b: float) -> float:
    """|a - b| relative to the first value; 0 if both vanish."""
    if a == 0.0 and b == 0.0:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))
