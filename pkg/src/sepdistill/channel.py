"""Apply instruments to states and report on completeness and distillation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from sepdistill import numlin
from sepdistill.analysis import cut_ranks
from sepdistill.instruments import Instrument
from sepdistill.policy import get_policy
from sepdistill.states import DensityMatrix, PureState

DETERMINISM_TOL = 1e-10


class Completeness(str, enum.Enum):
    COMPLETE = "COMPLETE"
    SUBNORMALIZED = "SUBNORMALIZED"
    INVALID = "INVALID"


class Verdict(str, enum.Enum):
    DETERMINISTIC = "DETERMINISTIC"
    CONDITIONAL = "CONDITIONAL"
    FAILED = "FAILED"


@dataclass(frozen=True)
class OutcomeRecord:
    index: int | tuple[int, ...]
    probability: float
    state: DensityMatrix | None


@dataclass(frozen=True)
class CompletenessReport:
    verdict: Completeness
    deficiency_spectrum: np.ndarray  # eigenvalues of I - sum E^dag E, descending
    max_overshoot: float             # how far sum E^dag E exceeds I (0 when it does not)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value,
                "deficiency_spectrum": [float(x) for x in self.deficiency_spectrum],
                "max_overshoot": self.max_overshoot}


@dataclass(frozen=True)
class DistillationReport:
    outcomes: tuple[OutcomeRecord, ...]
    transferred: float
    fidelities: tuple[float | None, ...]
    schmidt_ranks: tuple[tuple[int, ...], ...]
    verdict: Verdict
    remainder: float = 0.0  # trace of the state left in the deficiency, for instruments
    completeness: CompletenessReport | None = None

    @property
    def min_fidelity(self) -> float:
        realized = [f for f in self.fidelities if f is not None]
        return min(realized) if realized else 0.0

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "transferred_probability": self.transferred,
            "remainder": self.remainder,
            "min_fidelity": self.min_fidelity,
            "outcomes": [{"outcome": list(o.index) if isinstance(o.index, tuple) else o.index,
                          "probability": o.probability,
                          "fidelity": f,
                          "schmidt_ranks": list(r)}
                         for o, f, r in zip(self.outcomes, self.fidelities, self.schmidt_ranks)],
        }
        if self.completeness is not None:
            out["completeness"] = self.completeness.to_dict()
        return out


def apply_instrument(rho: DensityMatrix, inst: Instrument) -> list[OutcomeRecord]:
    if len(inst) == 0:
        raise ValueError("instrument has no Kraus operators")
    if rho.dims != inst.dims:
        raise numlin.DimensionError(f"state dims {rho.dims} do not match instrument dims {inst.dims}")
    floor = get_policy().prob_floor
    records = []
    for k, e in enumerate(inst.full_operators()):
        sigma = e @ rho.matrix @ e.conj().T
        prob = float(np.real(np.trace(sigma)))
        state = None
        if prob >= floor:
            sigma = sigma / prob
            state = DensityMatrix((sigma + sigma.conj().T) / 2, rho.dims, check=False)
        records.append(OutcomeRecord(k, max(prob, 0.0), state))
    return records


def completeness_report(inst: Instrument) -> CompletenessReport:
    if len(inst) == 0:
        raise ValueError("instrument has no Kraus operators")
    tol = get_policy().rel_tol
    deficiency = np.eye(inst.effect_sum().shape[0]) - inst.effect_sum()
    spectrum = numlin.hermitian_eig(deficiency).eigenvalues
    overshoot = max(0.0, -float(spectrum[-1]))
    if spectrum[-1] < -tol:
        verdict = Completeness.INVALID
    elif numlin.max_abs(deficiency) <= tol:
        verdict = Completeness.COMPLETE
    else:
        verdict = Completeness.SUBNORMALIZED
    return CompletenessReport(verdict, spectrum, overshoot)


def fidelity(state: DensityMatrix, target: PureState) -> float:
    """Squared overlap ``<target| state |target>``."""
    if state.dims != target.dims:
        raise numlin.DimensionError(f"state dims {state.dims} do not match target dims {target.dims}")
    t = target.amplitudes
    return float(np.real(np.vdot(t, state.matrix @ t)))


def _pure_ranks(state: DensityMatrix | None) -> tuple[int, ...]:
    if state is None or len(state.dims) < 2:
        return ()
    spec = numlin.hermitian_eig(state.matrix)
    if spec.eigenvalues[0] < 1.0 - get_policy().rel_tol:
        return ()  # mixed post-state has no Schmidt decomposition
    return cut_ranks(PureState(spec.eigenvectors[:, 0], state.dims))


def _verdict(transferred: float, fidelities) -> Verdict:
    realized = [f for f in fidelities if f is not None]
    if not realized or any(f < 1.0 - DETERMINISM_TOL for f in realized):
        return Verdict.FAILED
    if abs(transferred - 1.0) <= DETERMINISM_TOL:
        return Verdict.DETERMINISTIC
    return Verdict.CONDITIONAL


def distillation_report(rho: DensityMatrix, inst_or_protocol, target: PureState) -> DistillationReport:
    """Outcome statistics, fidelities and verdict for an instrument or an LOCC program."""
    from sepdistill.locc import ProtocolProgram, simulate_protocol

    if not target.is_normalized():
        raise ValueError("target must be a unit vector")
    completeness = None
    remainder = 0.0
    if isinstance(inst_or_protocol, ProtocolProgram):
        leaves = simulate_protocol(rho, inst_or_protocol)
        outcomes = tuple(OutcomeRecord(leaf.label, leaf.probability, leaf.state) for leaf in leaves)
    else:
        inst = inst_or_protocol
        outcomes = tuple(apply_instrument(rho, inst))
        completeness = completeness_report(inst)
        deficiency = np.eye(rho.matrix.shape[0]) - inst.effect_sum()
        remainder = float(np.real(np.trace(deficiency @ rho.matrix)))
    fids = tuple(None if o.state is None else fidelity(o.state, target) for o in outcomes)
    ranks = tuple(_pure_ranks(o.state) for o in outcomes)
    transferred = float(sum(o.probability for o in outcomes))
    return DistillationReport(outcomes, transferred, fids, ranks, _verdict(transferred, fids),
                              remainder, completeness)
