from enum import Enum
import logging
from typing import Dict, List, Optional, Tuple, TypedDict, Union

import numpy as np

from cloneflip.constants import ALGEBRAIC_TOLERANCE, QUBIT_A, QUBIT_B, QUBIT_S
from cloneflip.errors import ProtocolError, StateDomainError
from cloneflip.modules.cloner import CloneOutput, clone_flip
from cloneflip.modules.qstate import (
    I_SIGMA_Y,
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    PauliOp,
    PureState,
    bell_state,
    born_probabilities,
    embed,
    fidelity,
    partial_trace,
    projective_measure,
    projector,
)

logger = logging.getLogger(__name__)


class BellOutcome(Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"


class HeraldMode(Enum):
    FULL_BELL = "full-bell"
    PSI_PLUS_ONLY = "psi-plus-only"


BELL_ORDER: List[BellOutcome] = [
    BellOutcome.PHI_PLUS,
    BellOutcome.PHI_MINUS,
    BellOutcome.PSI_PLUS,
    BellOutcome.PSI_MINUS,
]

# Bob's feedforward, keyed by the trit Alice sends
CORRECTIONS: Dict[BellOutcome, PauliOp] = {
    BellOutcome.PHI_PLUS: I_SIGMA_Y,
    BellOutcome.PHI_MINUS: SIGMA_X,
    BellOutcome.PSI_PLUS: SIGMA_Z,
}

RestoreRecord = TypedDict(
    "RestoreRecord",
    {
        "outcome": BellOutcome,
        "heralded": bool,
        "correction": Optional[PauliOp],
        "final_state": Optional[DensityMatrix],
        "restored_fidelity": Optional[float],
    },
)

BellBranch = Tuple[complex, Optional[PureState]]


def bell_projectors() -> List[np.ndarray]:
    return [
        embed(projector(bell_state(outcome.value)), [QUBIT_S, QUBIT_A], 3)
        for outcome in BELL_ORDER
    ]


def _three_qubit(state: Union[CloneOutput, PureState]) -> PureState:
    state = state.state if isinstance(state, CloneOutput) else state
    if state.n_qubits != 3:
        raise StateDomainError(
            "Bell analysis needs the 3-qubit S, A, B state, got {} qubits".format(
                state.n_qubits
            )
        )
    return state


def bell_decompose(
    state: Union[CloneOutput, PureState]
) -> Dict[BellOutcome, BellBranch]:
    """
    Write the S, A, B state as sum_k amplitude_k |Bell_k>_SA |b_k>_B.

    Conditional states are canonical (first nonzero amplitude real positive)
    and the phase is carried by the amplitude. An empty branch maps to (0, None).
    """
    amplitudes = _three_qubit(state).amplitudes.reshape(4, 2)

    result: Dict[BellOutcome, BellBranch] = {}
    for outcome in BELL_ORDER:
        bell = bell_state(outcome.value).amplitudes
        branch = bell.conj() @ amplitudes
        weight = float(np.linalg.norm(branch))
        if weight < ALGEBRAIC_TOLERANCE:
            result[outcome] = (0j, None)
            continue
        conditional = PureState.normalized(branch).canonical()
        amplitude = complex(np.vdot(conditional.amplitudes, branch))
        result[outcome] = (amplitude, conditional)

    return result


def bell_outcome_probs(
    state: Union[CloneOutput, PureState, DensityMatrix]
) -> Tuple[float, float, float, float]:
    """
    Outcome probabilities in BELL_ORDER.
    """
    if isinstance(state, DensityMatrix):
        if state.n_qubits != 3:
            raise StateDomainError("Bell analysis needs a 3-qubit state")
        rho = state
    else:
        rho = _three_qubit(state).density()
    probabilities = born_probabilities(rho, bell_projectors())
    return tuple(float(p) for p in probabilities)


def correction_for(outcome: BellOutcome) -> PauliOp:
    """
    :raises: ProtocolError for PsiMinus, which an ideal cloner never produces
    """
    correction = CORRECTIONS.get(outcome)
    if correction is None:
        raise ProtocolError(
            "No correction for {}: the antisymmetric outcome cannot follow an "
            "ideal cloner".format(outcome.value)
        )
    return correction


def restore(
    phi: PureState,
    rng: np.random.Generator,
    herald: HeraldMode = HeraldMode.FULL_BELL,
    outcome: Optional[BellOutcome] = None,
) -> RestoreRecord:
    """
    Clone, let Alice measure S and A in the Bell basis, send the trit and let
    Bob correct B.

    :param outcome: optional, forces Alice's result instead of sampling it
    """
    out = clone_flip(phi)

    if outcome is None:
        index, collapsed = projective_measure(out.state, bell_projectors(), rng)
        outcome = BELL_ORDER[index]
    else:
        amplitude, conditional = bell_decompose(out)[outcome]
        if conditional is None:
            raise ProtocolError(
                "Outcome {} has zero probability".format(outcome.value)
            )
        collapsed = PureState(
            np.kron(bell_state(outcome.value).amplitudes, conditional.amplitudes)
        )

    if herald == HeraldMode.PSI_PLUS_ONLY and outcome != BellOutcome.PSI_PLUS:
        return {
            "outcome": outcome,
            "heralded": False,
            "correction": None,
            "final_state": None,
            "restored_fidelity": None,
        }

    correction = correction_for(outcome)
    rho_b = partial_trace(collapsed.density(), [QUBIT_B])
    final_state = rho_b.conjugate_by(correction.matrix)

    return {
        "outcome": outcome,
        "heralded": True,
        "correction": correction,
        "final_state": final_state,
        "restored_fidelity": fidelity(final_state, phi),
    }


def sample_outcomes(
    phi: PureState, trials: int, rng: np.random.Generator
) -> Dict[BellOutcome, int]:
    if trials <= 0:
        raise ValueError("trials must be positive, got {}".format(trials))
    probabilities = np.array(bell_outcome_probs(clone_flip(phi)))
    counts = rng.multinomial(trials, probabilities / probabilities.sum())
    if counts[BELL_ORDER.index(BellOutcome.PSI_MINUS)]:
        logger.warning("Antisymmetric Bell outcome observed in sampled statistics")
    return {outcome: int(n) for outcome, n in zip(BELL_ORDER, counts)}


def no_feedforward_state(phi: PureState) -> DensityMatrix:
    """
    Bob's qubit averaged over Alice's results when her trit is ignored.
    """
    branches = bell_decompose(clone_flip(phi))
    entries = np.zeros((2, 2), dtype=complex)
    for amplitude, conditional in branches.values():
        if conditional is not None:
            entries = entries + abs(amplitude) ** 2 * projector(conditional)
    return DensityMatrix((entries + entries.conj().T) / 2)
