"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. The composite basis
``|i1, i2, ...>`` maps to the flat index with the first party varying
slowest, which is what ``np.kron`` and C-order reshapes already do.
Decompositions delegate to LAPACK (deterministic for a fixed build).
"""

from __future__ import annotations

from math import prod
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from sepdistill.policy import get_policy


class DimensionError(ValueError):
    """Shapes or party dimensions do not fit together."""


class NotHermitianError(ValueError):
    pass


class KernelError(RuntimeError):
    """A decomposition failed to converge or produced non-finite output."""


class HermitianSpectrum(NamedTuple):
    eigenvalues: np.ndarray   # real, descending
    eigenvectors: np.ndarray  # columns, orthonormal


class SVDResult(NamedTuple):
    u: np.ndarray
    s: np.ndarray  # descending
    vh: np.ndarray


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise KernelError("non-finite entries in kernel output")


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def max_abs(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    cap = get_policy().max_dim
    if rows > cap or cols > cap:
        raise DimensionError(f"kron result {rows}x{cols} exceeds max dimension {cap}")
    return np.kron(a, b)


def kron_all(ops: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = kron(out, op)
    return out


def embed(op, party: int, dims: Sequence[int]) -> np.ndarray:
    """Lift a local operator on ``party`` to the full space (identities elsewhere)."""
    op = as_matrix(op)
    if op.shape != (dims[party], dims[party]):
        raise DimensionError(f"local operator {op.shape} does not match party dim {dims[party]}")
    return kron_all(op if k == party else np.eye(n) for k, n in enumerate(dims))


def svd(m) -> SVDResult:
    a = as_matrix(m)
    if a.size == 0:
        raise DimensionError("svd of an empty matrix")
    try:
        u, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"svd did not converge: {exc}") from exc
    _check_finite(u, s, vh)
    return SVDResult(u, s, vh)


def singular_values(m) -> np.ndarray:
    a = as_matrix(m)
    if a.size == 0:
        raise DimensionError("svd of an empty matrix")
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"svd did not converge: {exc}") from exc
    _check_finite(s)
    return s


def numerical_rank(m, rel_tol: float | None = None) -> int:
    """Count singular values above ``rel_tol`` times the largest one (0 for the zero matrix)."""
    rel_tol = get_policy().rel_tol if rel_tol is None else rel_tol
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def is_hermitian(h, rel_tol: float | None = None) -> bool:
    h = as_matrix(h)
    rel_tol = get_policy().rel_tol if rel_tol is None else rel_tol
    if h.shape[0] != h.shape[1]:
        return False
    return max_abs(h - h.conj().T) <= rel_tol * max(max_abs(h), 1e-300)


def hermitian_eig(h) -> HermitianSpectrum:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"hermitian_eig needs a square matrix, got {h.shape}")
    if not is_hermitian(h):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    try:
        w, v = np.linalg.eigh((h + h.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"eigh did not converge: {exc}") from exc
    _check_finite(w, v)
    return HermitianSpectrum(w[::-1].copy(), v[:, ::-1].copy())


def is_psd(h, tol: float | None = None) -> bool:
    tol = get_policy().rel_tol if tol is None else tol
    return bool(hermitian_eig(h).eigenvalues[-1] >= -tol)


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every party not in ``keep``; kept parties stay in their original order.

    An empty ``keep`` is rejected; tracing out everything is :func:`trace_all`.
    """
    rho = as_matrix(rho)
    dims = [int(n) for n in dims]
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise DimensionError("keep set must be nonempty")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} parties")
    total = prod(dims)
    if rho.shape != (total, total):
        raise DimensionError(f"rho shape {rho.shape} does not match dims {dims}")
    n = len(dims)
    t = rho.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # einsum subscripts: kets 0..n-1, bras n..2n-1, traced bras reuse the ket label
    ket = list(range(n))
    bra = [k if k in traced else n + k for k in range(n)]
    out = keep + [n + k for k in keep]
    kd = prod(dims[k] for k in keep)
    return np.einsum(t, ket + bra, out).reshape(kd, kd)


def trace_all(rho) -> np.ndarray:
    return np.array([[np.trace(as_matrix(rho))]], dtype=complex)


def permute_parties(vec, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a state vector."""
    t = np.asarray(vec, dtype=complex).reshape(list(dims))
    return np.transpose(t, list(order)).reshape(-1)
