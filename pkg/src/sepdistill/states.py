"""State families: the maximally entangled / GHZ-type ``psi1``, the
shifted-support partner ``psi2`` of each family, and their rank-two mixtures.

Party dimensions are written ``d + k_j``. The mixing weight is called ``w``
so it does not clash with the first tripartite dimension ``p``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import prod, sqrt
from typing import Sequence

import numpy as np

from sepdistill import numlin
from sepdistill.policy import get_policy


class InvalidSpecError(ValueError):
    """The dimension parameters do not fit the requested family."""


class Family(str, enum.Enum):
    THM1_SEP = "thm1-sep"
    THM1_LOCC = "thm1-locc"
    EX_2x4 = "ex-2x4"
    BELL_MIX = "bell-mix"
    THM2_I = "thm2-i"
    THM2_II = "thm2-ii"
    THM2_III = "thm2-iii"
    THREE_QUBIT = "three-qubit"

    @property
    def n_parties(self) -> int:
        return 3 if self in _TRIPARTITE else 2


_TRIPARTITE = {Family.THM2_I, Family.THM2_II, Family.THM2_III, Family.THREE_QUBIT}


@dataclass(frozen=True)
class DimsSpec:
    """Target level ``d`` and per-party offsets; party ``j`` has dimension ``d + k[j]``."""

    d: int
    k: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        if self.d < 1:
            raise InvalidSpecError(f"level d must be positive, got {self.d}")
        if any(x < 0 for x in self.k):
            raise InvalidSpecError(f"offsets must be nonnegative, got {self.k}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.d + x for x in self.k)

    def to_dict(self) -> dict:
        return {"d": self.d, "k": list(self.k), "dims": list(self.dims)}


def spec_for(family: Family | str, d: int | None = None, k1: int | None = None,
             k2: int | None = None, k3: int | None = None) -> DimsSpec:
    """Build the DimsSpec a family expects, filling the parameters it fixes.

    Families with fixed dimensions (2x4 example, Bell mixture, three qubits)
    ignore missing arguments; ``THM1_SEP`` and ``THM2_I`` derive the last
    offset from ``sum k = d`` when it is omitted.
    """
    family = Family(family)
    if family in (Family.EX_2x4, Family.BELL_MIX, Family.THREE_QUBIT):
        base = {Family.EX_2x4: (0, 2), Family.BELL_MIX: (0, 0), Family.THREE_QUBIT: (0, 0, 0)}
        spec = DimsSpec(2, base[family])
        if d is not None and d != 2:
            raise InvalidSpecError(f"{family.value} is fixed at d=2")
        return spec
    if d is None:
        raise InvalidSpecError(f"{family.value} needs d")
    if family is Family.THM1_LOCC:
        return DimsSpec(d, (0, d))
    if family is Family.THM2_III:
        return DimsSpec(d, (0, 0, d))
    if family is Family.THM1_SEP:
        if k1 is None:
            raise InvalidSpecError("thm1-sep needs k1")
        return DimsSpec(d, (k1, d - k1 if k2 is None else k2))
    if family is Family.THM2_I:
        if k2 is None:
            raise InvalidSpecError("thm2-i needs k2")
        return DimsSpec(d, (0 if k1 is None else k1, k2, d - k2 if k3 is None else k3))
    if k1 is None or k2 is None:
        raise InvalidSpecError("thm2-ii needs k1 and k2")
    return DimsSpec(d, (k1, k2, d - k1 - k2 if k3 is None else k3))


def validate_spec(family: Family | str, spec: DimsSpec) -> None:
    family = Family(family)
    d, k = spec.d, spec.k
    if d < 2:
        raise InvalidSpecError("d must be at least 2; a level-1 target is a product state")
    if len(k) != family.n_parties:
        raise InvalidSpecError(f"{family.value} needs {family.n_parties} offsets, got {len(k)}")
    checks = {
        Family.THM1_SEP: lambda: k[0] >= 1 and k[1] >= 1 and sum(k) == d,
        Family.THM1_LOCC: lambda: k == (0, d),
        Family.EX_2x4: lambda: d == 2 and k == (0, 2),
        Family.BELL_MIX: lambda: d == 2 and k == (0, 0),
        Family.THM2_I: lambda: k[0] == 0 and k[1] >= 1 and k[2] >= 1 and sum(k) == d,
        Family.THM2_II: lambda: min(k) >= 1 and sum(k) == d,
        Family.THM2_III: lambda: k == (0, 0, d),
        Family.THREE_QUBIT: lambda: d == 2 and k == (0, 0, 0),
    }
    ok = checks[family]()
    if not ok:
        raise InvalidSpecError(f"spec d={d}, k={k} is not valid for {family.value}")
    if prod(spec.dims) > get_policy().max_dim:
        raise InvalidSpecError(f"total dimension {prod(spec.dims)} exceeds the size cap")


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if amps.size != prod(self.dims):
            raise numlin.DimensionError(f"{amps.size} amplitudes do not fit dims {self.dims}")

    @classmethod
    def from_terms(cls, terms: Sequence[tuple[complex, Sequence[int]]], dims: Sequence[int]) -> "PureState":
        """Build ``sum c |i1,i2,...>`` from (coefficient, index tuple) pairs."""
        t = np.zeros(tuple(dims), dtype=complex)
        for c, idx in terms:
            t[tuple(idx)] += c
        return cls(t.reshape(-1), tuple(dims))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) <= get_policy().state_tol

    def inner(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector(), self.dims)

    def to_dict(self) -> dict:
        return {"dims": list(self.dims),
                "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes]}

    @classmethod
    def from_dict(cls, data: dict) -> "PureState":
        amps = [complex(re, im) for re, im in data["amplitudes"]]
        return cls(np.array(amps), tuple(data["dims"]))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        m = numlin.as_matrix(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        total = prod(self.dims)
        if m.shape != (total, total):
            raise numlin.DimensionError(f"matrix {m.shape} does not fit dims {self.dims}")
        if self.check:
            self.validate()

    def validate(self) -> None:
        pol = get_policy()
        m = self.matrix
        if numlin.max_abs(m - m.conj().T) > pol.state_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > pol.state_tol:
            raise ValueError(f"density matrix trace {np.trace(m).real!r} is not 1")
        if numlin.hermitian_eig(m).eigenvalues[-1] < -pol.rel_tol:
            raise ValueError("density matrix has a negative eigenvalue")

    @property
    def eigenvalues(self) -> np.ndarray:
        return numlin.hermitian_eig(self.matrix).eigenvalues

    def rank(self) -> int:
        ev = self.eigenvalues
        return int(np.count_nonzero(ev > get_policy().rel_tol * max(ev[0], 1e-300)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def reduce(self, keep: Sequence[int]) -> "DensityMatrix":
        keep = sorted(set(keep))
        red = numlin.partial_trace(self.matrix, self.dims, keep)
        return DensityMatrix(red, tuple(self.dims[k] for k in keep))

    def to_dict(self) -> dict:
        return {"dims": list(self.dims),
                "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]}


def _uniform(d: int, index_maps, dims) -> PureState:
    amp = 1.0 / sqrt(d)
    return PureState.from_terms([(amp, tuple(f(i) for f in index_maps)) for i in range(d)], dims)


def make_state_pair(family: Family | str, spec: DimsSpec) -> tuple[PureState, PureState]:
    """Return ``(psi1, psi2)``: psi1 is the level-``d`` maximally entangled
    (or GHZ-type) state, psi2 its partner on shifted basis indices."""
    family = Family(family)
    validate_spec(family, spec)
    d, k, dims = spec.d, spec.k, spec.dims
    same = lambda i: i  # noqa: E731
    psi1 = _uniform(d, [same] * len(dims), dims)
    if family is Family.THM1_SEP:
        n = dims[1]
        maps = [lambda i: k[0] + i, lambda i: (d + i) % n]
    elif family in (Family.THM1_LOCC, Family.EX_2x4):
        maps = [same, lambda i: d + i]
    elif family is Family.BELL_MIX:
        maps = [same, lambda i: 1 - i]
    elif family is Family.THM2_I:
        r = dims[2]
        maps = [same, lambda i: k[1] + i, lambda i: (d + i) % r]
    elif family is Family.THM2_II:
        q, r = dims[1], dims[2]
        maps = [lambda i: k[0] + i, lambda i: (k[0] + k[1] + i) % q, lambda i: (d + i) % r]
    elif family is Family.THM2_III:
        maps = [same, same, lambda i: d + i]
    else:  # THREE_QUBIT
        maps = [same, same, lambda i: 1 - i]
    return psi1, _uniform(d, maps, dims)


def mix_pair(psi1: PureState, psi2: PureState, w: float) -> DensityMatrix:
    """``w |psi1><psi1| + (1 - w) |psi2><psi2|`` for orthogonal unit vectors."""
    if psi1.dims != psi2.dims:
        raise numlin.DimensionError(f"dims differ: {psi1.dims} vs {psi2.dims}")
    if not 0.0 < w < 1.0:
        raise ValueError(f"mixing weight must lie in (0, 1), got {w}")
    tol = get_policy().state_tol
    if abs(psi1.inner(psi2)) > tol:
        raise ValueError("mixed states must be orthogonal")
    if not (psi1.is_normalized() and psi2.is_normalized()):
        raise ValueError("mixed states must be unit vectors")
    return DensityMatrix(w * psi1.projector() + (1.0 - w) * psi2.projector(), psi1.dims)


def ghz(n_parties: int, d: int) -> PureState:
    if n_parties < 2 or d < 2:
        raise InvalidSpecError("ghz needs at least 2 parties and level at least 2")
    if d ** n_parties > get_policy().max_dim:
        raise numlin.DimensionError(f"GHZ dimension {d}^{n_parties} exceeds the size cap")
    return PureState.from_terms([(1.0 / sqrt(d), (i,) * n_parties) for i in range(d)], (d,) * n_parties)


def random_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    """Haar-ish random pure state, for seeded tests."""
    v = rng.normal(size=prod(dims)) + 1j * rng.normal(size=prod(dims))
    return PureState(v / np.linalg.norm(v), tuple(dims))
