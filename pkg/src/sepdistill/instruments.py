"""Product Kraus operators and instruments for every state family.

Each local operator is a square matrix on its party's full space. A filter
such as ``sum_i x_i |i><s(i)|`` therefore leaves the rows ``>= d`` at zero
instead of shrinking the space. The two-element SEP filters come back
exactly as constructed: they are *not* padded out to trace-preserving
channels (see ``channel.completeness_report``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Callable, Sequence

import numpy as np

from sepdistill import numlin
from sepdistill.states import DimsSpec, Family, InvalidSpecError, validate_spec

H = 1.0 / sqrt(2.0)

# Piecewise coefficient tables: (exclusive upper index bound, value) segments
# covering 0..d-1. Bounds are names resolved against the DimsSpec offsets.
COEFFICIENT_TABLES: dict[Family, dict[str, list[tuple[str, float]]]] = {
    Family.THM1_SEP: {
        "eta": [("k1", 1.0), ("d", H)],
        "nu": [("k1", H), ("d", 1.0)],
        "eta'": [("k2", H), ("d", 1.0)],
        "nu'": [("k2", 1.0), ("d", H)],
    },
    Family.THM2_I: {
        "eta": [("k2", 1.0), ("d", H)],
        "nu": [("k2", H), ("d", 1.0)],
        "eta'": [("k3", H), ("d", 1.0)],
        "nu'": [("k3", 1.0), ("d", H)],
    },
    Family.THM2_II: {
        "alpha": [("k1", 1.0), ("d", H)],
        "alpha'": [("k2+k3", H), ("d", 1.0)],
        "beta": [("k1", H), ("k1+k2", 1.0), ("d", H)],
        "beta'": [("k3", H), ("k2+k3", 1.0), ("d", H)],
        "gamma": [("k1+k2", H), ("d", 1.0)],
        "gamma'": [("k3", 1.0), ("d", H)],
    },
}


@dataclass(frozen=True)
class CoefficientTable:
    name: str
    values: np.ndarray


def coefficient_table(family: Family | str, name: str, spec: DimsSpec) -> CoefficientTable:
    family = Family(family)
    k = tuple(spec.k) + (0,) * (3 - len(spec.k))
    env = {"d": spec.d, "k1": k[0], "k2": k[1], "k3": k[2],
           "k1+k2": k[0] + k[1], "k2+k3": k[1] + k[2]}
    values = np.empty(spec.d)
    start = 0
    for bound, value in COEFFICIENT_TABLES[family][name]:
        stop = env[bound]
        values[start:stop] = value
        start = max(start, stop)
    return CoefficientTable(name, values)


def diag_filter(values: Sequence[float], dim: int) -> np.ndarray:
    """``sum_i values[i] |i><i|`` on a ``dim``-dimensional party."""
    return shift_filter(values, lambda i: i, dim)


def shift_filter(values: Sequence[float], source: Callable[[int], int], dim: int) -> np.ndarray:
    """``sum_i values[i] |i><source(i)|`` on a ``dim``-dimensional party."""
    op = np.zeros((dim, dim), dtype=complex)
    for i, v in enumerate(values):
        j = source(i)
        if not (0 <= i < dim and 0 <= j < dim):
            raise InvalidSpecError(f"filter index |{i}><{j}| outside party dimension {dim}")
        op[i, j] = v
    return op


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


@dataclass(frozen=True)
class ProductKraus:
    """One Kraus operator stored as its tensor factors."""

    locals: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = []
        for op in self.locals:
            a = numlin.as_matrix(op).copy()
            if a.shape[0] != a.shape[1]:
                raise numlin.DimensionError(f"local operators must be square, got {a.shape}")
            a.setflags(write=False)
            ops.append(a)
        object.__setattr__(self, "locals", tuple(ops))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(op.shape[0] for op in self.locals)

    def full(self) -> np.ndarray:
        return numlin.kron_all(self.locals)

    def then(self, other: "ProductKraus") -> "ProductKraus":
        """Operator for applying ``self`` first and ``other`` second."""
        return ProductKraus(tuple(b @ a for a, b in zip(self.locals, other.locals)))

    @classmethod
    def local(cls, op, party: int, dims: Sequence[int]) -> "ProductKraus":
        return cls(tuple(op if k == party else np.eye(n) for k, n in enumerate(dims)))

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "ProductKraus":
        return cls(tuple(np.eye(n) for n in dims))


@dataclass(frozen=True)
class Instrument:
    kraus: tuple[ProductKraus, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kraus", tuple(self.kraus))
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        for e in self.kraus:
            if e.dims != self.dims:
                raise numlin.DimensionError(f"Kraus operator dims {e.dims} differ from {self.dims}")

    def __len__(self) -> int:
        return len(self.kraus)

    def full_operators(self) -> list[np.ndarray]:
        return [e.full() for e in self.kraus]

    def effect_sum(self) -> np.ndarray:
        """``sum_k E_k^dagger E_k``."""
        total = None
        for e in self.full_operators():
            term = e.conj().T @ e
            total = term if total is None else total + term
        return total

    def to_dict(self) -> dict:
        return {"dims": list(self.dims),
                "kraus": [[_matrix_to_json(op) for op in e.locals] for e in self.kraus]}

    @classmethod
    def from_dict(cls, data: dict) -> "Instrument":
        kraus = [ProductKraus(tuple(_matrix_from_json(m) for m in e)) for e in data["kraus"]]
        return cls(tuple(kraus), tuple(data["dims"]))


def make_instrument(family: Family | str, spec: DimsSpec) -> Instrument:
    family = Family(family)
    if family in (Family.BELL_MIX, Family.THREE_QUBIT):
        raise InvalidSpecError(f"{family.value} has no single-instrument construction")
    validate_spec(family, spec)
    d, k, dims = spec.d, spec.k, spec.dims

    def table(name):
        return coefficient_table(family, name, spec).values

    if family is Family.THM1_SEP:
        m, n = dims
        e1 = ProductKraus((diag_filter(table("eta"), m), diag_filter(table("nu"), n)))
        e2 = ProductKraus((shift_filter(table("eta'"), lambda i: k[0] + i, m),
                           shift_filter(table("nu'"), lambda i: (d + i) % n, n)))
        kraus = (e1, e2)
    elif family in (Family.THM1_LOCC, Family.EX_2x4, Family.THM2_III):
        party = len(dims) - 1
        kraus = tuple(ProductKraus.local(op, party, dims) for op in locc_measurement(d, dims[party]))
    elif family is Family.THM2_I:
        p, q, r = dims
        a = H * np.eye(p)
        e1 = ProductKraus((a, diag_filter(table("eta"), q), diag_filter(table("nu"), r)))
        e2 = ProductKraus((a, shift_filter(table("eta'"), lambda i: k[1] + i, q),
                           shift_filter(table("nu'"), lambda i: (d + i) % r, r)))
        kraus = (e1, e2)
    else:  # THM2_II
        p, q, r = dims
        e1 = ProductKraus((diag_filter(table("alpha"), p), diag_filter(table("beta"), q),
                           diag_filter(table("gamma"), r)))
        e2 = ProductKraus((shift_filter(table("alpha'"), lambda i: k[0] + i, p),
                           shift_filter(table("beta'"), lambda i: (k[0] + k[1] + i) % q, q),
                           shift_filter(table("gamma'"), lambda i: (d + i) % r, r)))
        kraus = (e1, e2)
    return Instrument(kraus, dims)


def locc_measurement(d: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Local pair ``{sum |i><i|, sum |i><d+i|}`` on a party of dimension ``2d``."""
    if dim != 2 * d:
        raise InvalidSpecError(f"measuring party must have dimension 2d={2 * d}, got {dim}")
    ones = np.ones(d)
    return diag_filter(ones, dim), shift_filter(ones, lambda i: d + i, dim)


SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
PLUS = np.array([1.0, 1.0]) / sqrt(2.0)
MINUS = np.array([1.0, -1.0]) / sqrt(2.0)


def make_protocol(family: Family | str, spec: DimsSpec):
    """LOCC program for a family. Three qubits: Charlie measures in the
    +/- basis, and on ``-`` Bob applies sigma_z; Charlie is traced out and
    the target is Phi+ on AB. The other families are one-round programs."""
    from sepdistill.locc import Outcome, ProtocolProgram, Round
    from sepdistill.states import ghz, make_state_pair

    family = Family(family)
    validate_spec(family, spec)
    if family is Family.THREE_QUBIT:
        meas = (np.outer(PLUS, PLUS).astype(complex), np.outer(MINUS, MINUS).astype(complex))
        root = Round(party=2, operators=meas,
                     outcomes=(Outcome(), Outcome(corrections=((1, SIGMA_Z),))))
        return ProtocolProgram(dims=spec.dims, root=root, target=ghz(2, 2), trace_out=(2,))
    if family not in (Family.THM1_LOCC, Family.EX_2x4, Family.THM2_III):
        raise InvalidSpecError(f"{family.value} is not an LOCC family")
    party = len(spec.dims) - 1
    ops = locc_measurement(spec.d, spec.dims[party])
    root = Round(party=party, operators=ops, outcomes=(Outcome(), Outcome()))
    psi1, _ = make_state_pair(family, spec)
    return ProtocolProgram(dims=spec.dims, root=root, target=psi1, trace_out=())
