"""Numeric tolerances shared by every module.

One frozen record holds them; ``policy_override`` swaps it for the current
context only (a ``ContextVar``), so concurrent callers never see each
other's settings.
"""

from __future__ import annotations

import contextlib
import dataclasses
from contextvars import ContextVar
from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    rel_tol: float = 1e-10        # rank thresholds, Hermiticity, completeness
    state_tol: float = 1e-12      # norms, orthogonality, trace of states
    prob_floor: float = 1e-12     # below this an outcome gets no post-state
    annihilation_tol: float = 1e-10
    max_dim: int = 4096           # largest total Hilbert-space dimension

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_POLICY: ContextVar[NumericPolicy] = ContextVar("sepdistill_policy", default=NumericPolicy())


def get_policy() -> NumericPolicy:
    return _POLICY.get()


@contextlib.contextmanager
def policy_override(**changes):
    """Temporarily replace fields of the active policy.

    >>> with policy_override(rel_tol=1e-8):
    ...     get_policy().rel_tol
    1e-08
    """
    token = _POLICY.set(dataclasses.replace(_POLICY.get(), **changes))
    try:
        yield _POLICY.get()
    finally:
        _POLICY.reset(token)
