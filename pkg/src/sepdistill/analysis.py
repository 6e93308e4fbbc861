"""Schmidt data, operator product structure, pencil rank drops and dimension bounds."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from sepdistill import numlin
from sepdistill.policy import get_policy
from sepdistill.states import PureState

GRID_POINTS = 64


@dataclass(frozen=True)
class SchmidtData:
    cut: tuple[int, ...]
    coefficients: np.ndarray
    rank: int


def _normalize_cut(cut: Sequence[int], n: int) -> tuple[int, ...]:
    side = tuple(sorted(set(int(c) for c in cut)))
    if not side or len(side) >= n or side[0] < 0 or side[-1] >= n:
        raise ValueError(f"cut {tuple(cut)} is not a proper nonempty subset of {n} parties")
    return side


def cut_matrix(amplitudes, dims: Sequence[int], cut: Sequence[int]) -> np.ndarray:
    """Reshape a state vector into (cut side) x (complement) amplitudes."""
    dims = list(dims)
    side = _normalize_cut(cut, len(dims))
    rest = [k for k in range(len(dims)) if k not in side]
    t = np.asarray(amplitudes, dtype=complex).reshape(dims)
    t = np.transpose(t, list(side) + rest)
    return t.reshape(prod(dims[k] for k in side), prod(dims[k] for k in rest))


def bipartitions(n_parties: int) -> list[tuple[int, ...]]:
    """One side of every bipartition, complements not repeated."""
    cuts = []
    for size in range(1, n_parties // 2 + 1):
        for side in itertools.combinations(range(n_parties), size):
            if 2 * size == n_parties and 0 not in side:
                continue
            cuts.append(side)
    return cuts


def schmidt(psi: PureState, cut: Sequence[int] = (0,), threshold: float | None = None) -> SchmidtData:
    threshold = get_policy().rel_tol if threshold is None else threshold
    side = _normalize_cut(cut, len(psi.dims))
    s = numlin.singular_values(cut_matrix(psi.amplitudes, psi.dims, side))
    rank = 0 if s[0] == 0 else int(np.count_nonzero(s > threshold * s[0]))
    return SchmidtData(side, s, rank)


def cut_ranks(psi: PureState) -> tuple[int, ...]:
    """Schmidt rank on every bipartition; for three parties this is the GHZ-level tuple."""
    return tuple(schmidt(psi, c).rank for c in bipartitions(len(psi.dims)))


def operator_schmidt_rank(op, dims: Sequence[int], cut: Sequence[int] = (0,)) -> int:
    """Rank of ``op`` realigned so that a product ``X (x) Y`` across the cut becomes ``vec(X) vec(Y)^T``."""
    op = numlin.as_matrix(op)
    dims = [int(n) for n in dims]
    total = prod(dims)
    if op.shape != (total, total):
        raise numlin.DimensionError(f"operator {op.shape} does not match dims {dims}")
    side = _normalize_cut(cut, len(dims))
    rest = [k for k in range(len(dims)) if k not in side]
    n = len(dims)
    t = op.reshape(dims + dims)
    order = list(side) + [n + k for k in side] + rest + [n + k for k in rest]
    da = prod(dims[k] for k in side)
    realigned = np.transpose(t, order).reshape(da * da, (total // da) ** 2)
    return numlin.numerical_rank(realigned)


@dataclass(frozen=True)
class PencilResult:
    min_rank: int
    witness: tuple[complex, complex]
    cut: tuple[int, ...]
    n_evaluated: int


def _pencil_rank(m1: np.ndarray, m2: np.ndarray, x: complex, y: complex, tol: float) -> int:
    s = numlin.singular_values(x * m1 + y * m2)
    # absolute scale of the two summands, so exact cancellation gives rank 0
    scale = abs(x) * np.linalg.norm(m1, 2) + abs(y) * np.linalg.norm(m2, 2)
    if scale == 0:
        return 0
    return int(np.count_nonzero(s > tol * scale))


def _det2_roots(m1: np.ndarray, m2: np.ndarray) -> list[tuple[complex, complex]]:
    """Projective roots of det(x m1 + y m2) = a x^2 + b x y + c y^2 for 2x2 blocks."""
    a = np.linalg.det(m1)
    c = np.linalg.det(m2)
    b = np.linalg.det(m1 + m2) - a - c
    eps = 1e-14 * max(1.0, abs(a), abs(b), abs(c))
    if max(abs(a), abs(b), abs(c)) <= eps:
        return []
    roots = []
    if abs(c) > eps:
        roots.extend((1.0, complex(t)) for t in np.roots([c, b, a]))
    else:
        roots.append((0.0, 1.0))
        if abs(b) > eps:
            roots.append((1.0, complex(-a / b)))
    return roots


def pencil_min_rank(psi1: PureState, psi2: PureState, cut: Sequence[int] = (0,),
                    samples: int = 1000, seed: int = 0) -> PencilResult:
    """Smallest Schmidt rank of ``x psi1 + y psi2`` across ``cut`` over a fixed sample set.

    The candidates are, in order: exact determinant roots (2x2 reshapes only),
    the two axis points, a 64-point grid of ratios ``y/x = exp(i theta)``,
    then ``samples`` seeded random complex ratios. Ties keep the earliest
    candidate, so the witness is deterministic.
    """
    if psi1.dims != psi2.dims:
        raise numlin.DimensionError("pencil states must share dims")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    side = _normalize_cut(cut, len(psi1.dims))
    m1 = cut_matrix(psi1.amplitudes, psi1.dims, side)
    m2 = cut_matrix(psi2.amplitudes, psi2.dims, side)
    tol = get_policy().rel_tol

    candidates: list[tuple[complex, complex]] = []
    if m1.shape == (2, 2):
        candidates.extend(_det2_roots(m1, m2))
    candidates.extend([(1.0, 0.0), (0.0, 1.0)])
    candidates.extend((1.0, np.exp(2j * np.pi * j / GRID_POINTS)) for j in range(GRID_POINTS))
    rng = np.random.default_rng(seed)
    z = rng.normal(size=samples) + 1j * rng.normal(size=samples)
    candidates.extend((1.0, complex(t)) for t in z)

    best_rank, best = None, None
    for x, y in candidates:
        norm = np.hypot(abs(x), abs(y))
        x, y = complex(x) / norm, complex(y) / norm
        r = _pencil_rank(m1, m2, x, y, tol)
        if best_rank is None or r < best_rank:
            best_rank, best = r, (x, y)
    return PencilResult(best_rank, best, side, len(candidates))


class BoundKind(str, enum.Enum):
    BIPARTITE_SEP = "bipartite-sep"
    BIPARTITE_LOCC = "bipartite-locc"
    TRIPARTITE_SEP = "tripartite-sep"
    TRIPARTITE_LOCC = "tripartite-locc"
    NPARTITE_SEP = "npartite-sep"


@dataclass(frozen=True)
class BoundQuery:
    kind: BoundKind
    dims: tuple[int, ...]
    d: int


def bound_check(kind: BoundKind | str | BoundQuery, dims: Sequence[int] | None = None, d: int | None = None) -> bool:
    """Whether the dimension bound admits deterministic distillation of a level-``d`` target."""
    if isinstance(kind, BoundQuery):
        kind, dims, d = kind.kind, kind.dims, kind.d
    kind = BoundKind(kind)
    dims = tuple(int(a) for a in dims)
    if not dims or min(dims) < 1 or d is None or d < 2:
        raise ValueError("dims must be positive and d at least 2")
    expected = {BoundKind.BIPARTITE_SEP: 2, BoundKind.BIPARTITE_LOCC: 2,
                BoundKind.TRIPARTITE_SEP: 3, BoundKind.TRIPARTITE_LOCC: 3}.get(kind)
    if expected is not None and len(dims) != expected:
        raise ValueError(f"{kind.value} takes {expected} dimensions, got {len(dims)}")
    if min(dims) < d:
        return False
    if kind in (BoundKind.BIPARTITE_LOCC, BoundKind.TRIPARTITE_LOCC):
        return max(dims) >= 2 * d
    return sum(dims) >= (len(dims) + 1) * d
