"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-9
    psd_clamp: float = 1e-10
    trace: float = 1e-9
    norm: float = 1e-9
    completeness: float = 1e-9
    sqrt_residual: float = 1e-8
    zero_branch: float = 1e-12
    # closed-form vs simulated comparisons
    oracle: float = 1e-9
    optimality: float = 1e-6
    lemma_scalar: float = 1e-12

    def scaled(self, factor: float) -> "Tolerances":
        """Return a copy with every tolerance multiplied by ``factor``."""
        return replace(self, **{k: v * factor for k, v in self.__dict__.items()})


DEFAULT = Tolerances()

PROFILES = {
    "default": DEFAULT,
    "loose": DEFAULT.scaled(100.0),
    "zero": DEFAULT.scaled(0.0),
}
