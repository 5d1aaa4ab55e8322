"""Run configuration: precision selection, degree caps, grid densities."""
from __future__ import annotations

import dataclasses

import mpmath

MAX_DEGREE_DEFAULT = 512
COEFF_DROP_REL = 1e-14  # coefficients below this (relative) are treated as zero
MAX_MATRIX_DIM = 256


@dataclasses.dataclass(frozen=True)
class Precision:
    """Arithmetic precision for root finding and phase synthesis.

    ``standard`` works in IEEE double throughout.  ``extended(bits)``
    switches the refinement stages (root polishing, completion polish,
    layer stripping) to mpmath arithmetic with at least ``bits`` bits.
    """

    extended: bool = False
    bits: int = 256

    def __post_init__(self):
        if self.extended and self.bits < 64:
            raise ValueError("extended precision needs >= 64 bits")

    @property
    def dps(self) -> int:
        return int(self.bits * 0.30103) + 3

    def workdps(self):
        return mpmath.workdps(self.dps)


STANDARD = Precision()


def extended(bits: int = 256) -> Precision:
    return Precision(extended=True, bits=bits)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """CLI-level configuration shared by all subcommands."""

    precision: Precision = STANDARD
    max_degree: int = MAX_DEGREE_DEFAULT
    grid_density: int = 10_000
    seed: int = 0
    output: str = "json"  # json | csv

    def __post_init__(self):
        if self.max_degree > MAX_DEGREE_DEFAULT:
            raise ValueError(f"max_degree capped at {MAX_DEGREE_DEFAULT}")
        if self.output not in ("json", "csv"):
            raise ValueError("output must be json or csv")
