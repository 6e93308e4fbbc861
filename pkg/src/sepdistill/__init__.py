"""Single-copy entanglement distillation by separable and LOCC instruments.

Builds the rank-two mixed-state families and the matching Kraus / LOCC
instruments, applies them, and checks filtering identities, completeness,
determinism, Schmidt ranks, dimension bounds and the rank obstructions
behind the no-go results.
"""

from sepdistill.policy import NumericPolicy, get_policy, policy_override
from sepdistill.states import (
    DensityMatrix,
    DimsSpec,
    Family,
    PureState,
    ghz,
    make_state_pair,
    mix_pair,
    spec_for,
)
from sepdistill.instruments import Instrument, ProductKraus, make_instrument, make_protocol
from sepdistill.channel import apply_instrument, completeness_report, distillation_report
from sepdistill.locc import ProtocolProgram, branch_survival_check, simulate_protocol
from sepdistill.analysis import (
    BoundKind,
    bound_check,
    operator_schmidt_rank,
    pencil_min_rank,
    schmidt,
)
from sepdistill.search import SearchConfig, residual, sep_feasibility_search

__all__ = [
    "BoundKind",
    "DensityMatrix",
    "DimsSpec",
    "Family",
    "Instrument",
    "NumericPolicy",
    "ProductKraus",
    "ProtocolProgram",
    "PureState",
    "SearchConfig",
    "apply_instrument",
    "bound_check",
    "branch_survival_check",
    "completeness_report",
    "distillation_report",
    "get_policy",
    "ghz",
    "make_instrument",
    "make_protocol",
    "make_state_pair",
    "mix_pair",
    "operator_schmidt_rank",
    "pencil_min_rank",
    "policy_override",
    "residual",
    "schmidt",
    "sep_feasibility_search",
    "simulate_protocol",
    "spec_for",
]
