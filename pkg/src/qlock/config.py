"""Shared numerical tolerances and memory budgets.

Every validity check in the package reads its threshold from a
:class:`Tolerances` record so that tests, library calls and the CLI agree.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    state: float = 1e-10
    povm: float = 1e-9
    hermitian: float = 1e-8
    support_cutoff: float = 1e-12  # relative to the largest eigenvalue
    isometry: float = 1e-10

    def with_overrides(self, **kwargs) -> "Tolerances":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


@dataclass(frozen=True)
class Budget:
    # complex entries of any materialized operator (tensor powers etc.)
    max_entries: int = 2**26
    # atoms of an exactly enumerated classical joint law
    max_atoms: int = 2**24
    # cells of a joint table handed to the LP smoothing solver
    max_lp_cells: int = 64 * 64
    # bits of a backward-encoded extractor input
    max_extractor_bits: int = 24
    # (seed, input) pairs visited by an exhaustive protocol enumeration
    max_enumeration: int = 2**34


DEFAULT_TOL = Tolerances()
DEFAULT_BUDGET = Budget()


class BudgetExceeded(RuntimeError):
    """Raised when an explicit computation would exceed a configured size cap."""

    def __init__(self, what: str, required: int, available: int):
        self.what = what
        self.required = int(required)
        self.available = int(available)
        super().__init__(f"{what}: requires {self.required} but budget allows {self.available}")


class ValidationError(ValueError):
    """Input object violates its type invariants."""
