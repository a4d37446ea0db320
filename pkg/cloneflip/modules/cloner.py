"""
Combined 1 -> 2 universal cloner and 1 -> 1 universal NOT.

The machine is the exact state map

    |phi>_S |0>_A |0>_B  ->  sqrt(2/3) |phi, phi, phi_perp>
                             - (|phi, phi_perp> + |phi_perp, phi>) |phi> / sqrt(6)

built from the input amplitudes; amplifier dynamics are not modelled.
"""
import math
from typing import Dict, Tuple, TypedDict

import numpy as np

from cloneflip.constants import QUBIT_A, QUBIT_B, QUBIT_S
from cloneflip.errors import StateDomainError
from cloneflip.modules.qstate import (
    KET_0,
    KET_1,
    DensityMatrix,
    PureState,
    concurrence,
    fidelity,
    orthogonal,
    partial_trace,
)

CLONE_WEIGHT = math.sqrt(2.0 / 3.0)
MIXED_WEIGHT = 1.0 / math.sqrt(6.0)

QUBIT_NAMES = {QUBIT_S: "S", QUBIT_A: "A", QUBIT_B: "B"}

MachineFidelities = TypedDict(
    "MachineFidelities",
    {
        "clone_s": float,
        "clone_a": float,
        "anticlone": float,
        "flip": float,
    },
)


class CloneOutput(object):
    def __init__(self, state: PureState, input: PureState):
        if state.n_qubits != 3:
            raise StateDomainError(
                "Cloner output lives on 3 qubits, got {}".format(state.n_qubits)
            )
        if input.n_qubits != 1:
            raise StateDomainError("Cloner input must be a single qubit")
        self.state = state
        self.input = input

    def density(self) -> DensityMatrix:
        return self.state.density()

    def __repr__(self):
        return "CloneOutput(input={}, state={})".format(self.input, self.state)


def _three(a: PureState, b: PureState, c: PureState) -> np.ndarray:
    return np.kron(np.kron(a.amplitudes, b.amplitudes), c.amplitudes)


def clone_flip(phi: PureState) -> CloneOutput:
    if phi.n_qubits != 1:
        raise StateDomainError(
            "The cloner takes one qubit, got {}".format(phi.n_qubits)
        )
    perp = orthogonal(phi)

    amplitudes = CLONE_WEIGHT * _three(phi, phi, perp) - MIXED_WEIGHT * (
        _three(phi, perp, phi) + _three(perp, phi, phi)
    )
    return CloneOutput(PureState.normalized(amplitudes), phi)


def sigma_components(phi: PureState) -> Tuple[complex, complex, PureState, PureState]:
    """
    Split the output as alpha |Sigma(0)> + beta |Sigma(1)>.

    Sigma(0) and Sigma(1) are the machine outputs for |0> and |1> under the
    same phi_perp convention, which keeps the map linear in (alpha, beta).
    """
    if phi.n_qubits != 1:
        raise StateDomainError("The cloner takes one qubit")
    alpha, beta = phi.amplitudes
    return (
        complex(alpha),
        complex(beta),
        clone_flip(KET_0).state,
        clone_flip(KET_1).state,
    )


def recombine(alpha: complex, beta: complex, sigma0: PureState, sigma1: PureState):
    return PureState.normalized(alpha * sigma0.amplitudes + beta * sigma1.amplitudes)


def reduced_states(out: CloneOutput) -> Tuple[DensityMatrix, DensityMatrix, DensityMatrix]:
    rho = out.density()
    return (
        partial_trace(rho, [QUBIT_S]),
        partial_trace(rho, [QUBIT_A]),
        partial_trace(rho, [QUBIT_B]),
    )


def machine_fidelities(out: CloneOutput) -> MachineFidelities:
    rho_s, rho_a, rho_b = reduced_states(out)
    return {
        "clone_s": fidelity(rho_s, out.input),
        "clone_a": fidelity(rho_a, out.input),
        "anticlone": fidelity(rho_b, out.input),
        "flip": fidelity(rho_b, orthogonal(out.input)),
    }


def pairwise_concurrence(out: CloneOutput) -> Dict[Tuple[str, str], float]:
    rho = out.density()
    result: Dict[Tuple[str, str], float] = {}
    for first, second in ((QUBIT_S, QUBIT_A), (QUBIT_S, QUBIT_B), (QUBIT_A, QUBIT_B)):
        pair = (QUBIT_NAMES[first], QUBIT_NAMES[second])
        result[pair] = concurrence(partial_trace(rho, [first, second]))
    return result
