"""Derivative-free search for trace-preserving separable instruments that map
both eigenstates of a rank-two mixture onto one target.

Candidates are ``T`` product operators parameterized by the real and
imaginary parts of their local factors, so separability holds exactly. The
objective sums a completeness penalty, the distance of each ``E_k psi_i``
from its projection onto the target, and how far the captured target
weight falls short of 1. Each restart is an independent Nelder-Mead run
(scipy, standard coefficients); results depend only on the seed.
"""

from __future__ import annotations

import dataclasses
import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from sepdistill import numlin
from sepdistill.channel import Completeness, Verdict, completeness_report, distillation_report
from sepdistill.instruments import Instrument, ProductKraus
from sepdistill.policy import get_policy
from sepdistill.states import PureState, mix_pair


@dataclass(frozen=True)
class SearchConfig:
    n_kraus: int = 2
    restarts: int = 8
    max_iter: int = 20000
    seed: int = 0
    weight_completeness: float = 1.0
    weight_determinism: float = 1.0
    tol: float = 1e-12
    workers: int = 1

    def __post_init__(self):
        if self.n_kraus < 1 or self.restarts < 1 or self.max_iter < 1:
            raise ValueError("n_kraus, restarts and max_iter must be positive")
        if self.weight_completeness <= 0 or self.weight_determinism <= 0 or self.tol <= 0:
            raise ValueError("weights and tolerance must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class SearchVerdict(str, enum.Enum):
    FEASIBLE = "FEASIBLE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SearchResult:
    best_residual: float
    best_candidate: Instrument
    best_restart: int
    restart_residuals: tuple[float, ...]
    traces: tuple[tuple[float, ...], ...]  # best-so-far residual per iteration
    verdict: SearchVerdict
    config: SearchConfig

    def to_dict(self, trace_points: int = 50) -> dict:
        def thin(tr):
            if len(tr) <= trace_points:
                return list(tr)
            idx = np.unique(np.linspace(0, len(tr) - 1, trace_points).round().astype(int))
            return [tr[i] for i in idx]
        return {"verdict": self.verdict.value,
                "best_residual": self.best_residual,
                "best_restart": self.best_restart,
                "restart_residuals": list(self.restart_residuals),
                "trace_lengths": [len(t) for t in self.traces],
                "traces": [thin(t) for t in self.traces],
                "best_candidate": self.best_candidate.to_dict(),
                "config": self.config.to_dict()}


# -- parameterization -------------------------------------------------------

def n_params(dims: Sequence[int], n_kraus: int) -> int:
    return 2 * n_kraus * sum(n * n for n in dims)


def unpack(theta: np.ndarray, dims: Sequence[int], n_kraus: int) -> list[np.ndarray]:
    """Flat real vector -> one (n_kraus, n, n) complex stack per party."""
    stacks, pos = [], 0
    for n in dims:
        size = n_kraus * n * n
        re = theta[pos:pos + size]
        im = theta[pos + size:pos + 2 * size]
        stacks.append((re + 1j * im).reshape(n_kraus, n, n))
        pos += 2 * size
    return stacks


def pack(inst: Instrument) -> np.ndarray:
    parts = []
    for party in range(len(inst.dims)):
        stack = np.stack([e.locals[party] for e in inst.kraus])
        parts.extend([stack.real.ravel(), stack.imag.ravel()])
    return np.concatenate(parts)


def to_instrument(theta: np.ndarray, dims: Sequence[int], n_kraus: int) -> Instrument:
    stacks = unpack(theta, dims, n_kraus)
    kraus = tuple(ProductKraus(tuple(s[k] for s in stacks)) for k in range(n_kraus))
    return Instrument(kraus, tuple(dims))


def pad_instrument(inst: Instrument, n_kraus: int, rng: np.random.Generator | None = None) -> Instrument:
    """Append zero operators (or random ones when ``rng`` is given) up to ``n_kraus``."""
    extra = []
    for _ in range(n_kraus - len(inst)):
        if rng is None:
            locals_ = tuple(np.zeros((n, n)) for n in inst.dims)
        else:
            locals_ = tuple(_random_local(n, n_kraus, len(inst.dims), rng) for n in inst.dims)
        extra.append(ProductKraus(locals_))
    return Instrument(inst.kraus + tuple(extra), inst.dims)


def _random_local(n: int, n_kraus: int, n_parties: int, rng: np.random.Generator) -> np.ndarray:
    scale = n_kraus ** (-0.5 / n_parties) / np.sqrt(n)
    return scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)


def _full_stack(stacks: list[np.ndarray]) -> np.ndarray:
    out = stacks[0]
    for s in stacks[1:]:
        t, m, n = out.shape[0], out.shape[1], s.shape[1]
        out = (out[:, :, None, :, None] * s[:, None, :, None, :]).reshape(t, m * n, m * n)
    return out


# -- objective ----------------------------------------------------------------

class _Objective:
    def __init__(self, psi1: PureState, psi2: PureState, target: PureState,
                 dims: Sequence[int], n_kraus: int, wc: float, wd: float):
        if not (psi1.dims == psi2.dims == target.dims == tuple(dims)):
            raise numlin.DimensionError("states, target and candidate dims must agree")
        self.dims, self.n_kraus, self.wc, self.wd = tuple(dims), n_kraus, wc, wd
        self.psis = np.stack([psi1.amplitudes, psi2.amplitudes], axis=1)  # (D, 2)
        self.t = target.amplitudes
        self.eye = np.eye(prod(dims))

    def operators(self, ops: np.ndarray) -> float:
        t, dim = ops.shape[0], ops.shape[1]
        flat = ops.reshape(t * dim, dim)
        gap = (self.eye - flat.conj().T @ flat).ravel()
        completeness = np.vdot(gap, gap).real
        images = (flat @ self.psis).reshape(t, dim, 2)
        coeffs = self.t.conj() @ images                  # (T, 2)
        off_target = (images - self.t[None, :, None] * coeffs[:, None, :]).ravel()
        deviation = np.vdot(off_target, off_target).real
        captured = (coeffs.real ** 2 + coeffs.imag ** 2).sum(axis=0)
        deficit = ((1.0 - captured) ** 2).sum()
        return float(self.wc * completeness + self.wd * (deviation + deficit))

    def __call__(self, theta: np.ndarray) -> float:
        return self.operators(_full_stack(unpack(theta, self.dims, self.n_kraus)))


def residual(candidate: Instrument, psi1: PureState, psi2: PureState, target: PureState,
             weights: tuple[float, float] = (1.0, 1.0)) -> float:
    """Zero exactly when ``candidate`` is trace preserving and sends both
    eigenstates to the target (up to phase) on every outcome."""
    obj = _Objective(psi1, psi2, target, candidate.dims, len(candidate), *weights)
    return obj.operators(np.stack(candidate.full_operators()))


# -- search -------------------------------------------------------------------

def _run_restart(args) -> tuple[float, np.ndarray, tuple[float, ...]]:
    obj, x0, cfg = args
    trace = [float(obj(x0))]
    floor = cfg.tol * 1e-8

    def callback(intermediate_result):
        trace.append(min(trace[-1], float(intermediate_result.fun)))
        if trace[-1] <= floor:
            raise StopIteration

    if trace[0] <= floor:
        return trace[0], x0, tuple(trace)
    res = minimize(obj, x0, method="Nelder-Mead", callback=callback,
                   options={"maxiter": cfg.max_iter, "maxfev": 2 * cfg.max_iter,
                            "xatol": 1e-12, "fatol": cfg.tol * 1e-3, "adaptive": False})
    x, f = res.x, float(res.fun)
    if f > trace[0]:  # the incumbent is never given up
        x, f = x0, trace[0]
    return f, x, tuple(trace)


def _verify(inst: Instrument, psi1: PureState, psi2: PureState, target: PureState) -> bool:
    if completeness_report(inst).verdict is not Completeness.COMPLETE:
        return False
    if abs(abs(psi1.inner(psi2)) - 1.0) <= get_policy().state_tol:
        rho = psi1.density()
    else:
        rho = mix_pair(psi1, psi2, 0.5)
    return distillation_report(rho, inst, target).verdict is Verdict.DETERMINISTIC


def sep_feasibility_search(psi1: PureState, psi2: PureState, target: PureState, cfg: SearchConfig,
                           warm_start: Instrument | None = None) -> SearchResult:
    dims = psi1.dims
    T = cfg.n_kraus
    obj = _Objective(psi1, psi2, target, dims, T, cfg.weight_completeness, cfg.weight_determinism)
    starts = []
    for r in range(cfg.restarts):
        if r == 0 and warm_start is not None:
            if len(warm_start) > T:
                raise ValueError(f"warm start has {len(warm_start)} operators, config allows {T}")
            starts.append(pack(pad_instrument(warm_start, T)))
            continue
        rng = np.random.default_rng([cfg.seed, r])
        inst = Instrument(tuple(ProductKraus(tuple(_random_local(n, T, len(dims), rng) for n in dims))
                                for _ in range(T)), dims)
        starts.append(pack(inst))

    jobs = [(obj, x0, cfg) for x0 in starts]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(_run_restart, jobs))
    else:
        runs = [_run_restart(j) for j in jobs]

    best = min(range(len(runs)), key=lambda r: (runs[r][0], r))
    best_f, best_x, _ = runs[best]
    candidate = to_instrument(best_x, dims, T)
    feasible = best_f <= cfg.tol and _verify(candidate, psi1, psi2, target)
    return SearchResult(best_f, candidate, best,
                        tuple(r[0] for r in runs), tuple(r[2] for r in runs),
                        SearchVerdict.FEASIBLE if feasible else SearchVerdict.INCONCLUSIVE, cfg)
