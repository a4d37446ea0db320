"""
Dense state algebra for one to three polarization qubits.

Basis convention is |0> = |H>, |1> = |V>; multi-qubit states are ordered
S x A x B, qubit 0 being the most significant index.
"""
from enum import Enum
import math
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from cloneflip.constants import (
    ALGEBRAIC_TOLERANCE,
    BLOCH_TOLERANCE,
    EIGENVALUE_TOLERANCE,
    MAX_QUBITS,
    STATE_H,
    STATE_L,
    STATE_MINUS,
    STATE_PLUS,
    STATE_R,
    STATE_V,
)
from cloneflip.errors import ProtocolError, StateDomainError


class BlochPoint(NamedTuple):
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)


LABELED_BLOCH_POINTS = {
    STATE_H: BlochPoint(0.0, 0.0, 1.0),
    STATE_V: BlochPoint(0.0, 0.0, -1.0),
    STATE_PLUS: BlochPoint(1.0, 0.0, 0.0),
    STATE_MINUS: BlochPoint(-1.0, 0.0, 0.0),
    STATE_R: BlochPoint(0.0, 1.0, 0.0),
    STATE_L: BlochPoint(0.0, -1.0, 0.0),
}


def _n_qubits_for(dim: int) -> int:
    n_qubits = int(round(math.log2(dim))) if dim > 0 else 0
    if dim < 2 or 2**n_qubits != dim:
        raise StateDomainError("Dimension {} is not a power of two".format(dim))
    if n_qubits > MAX_QUBITS:
        raise StateDomainError(
            "{} qubits requested, at most {} are supported".format(
                n_qubits, MAX_QUBITS
            )
        )
    return n_qubits


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


class PureState(object):
    def __init__(self, amplitudes: Union[Sequence[complex], np.ndarray]):
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        self.n_qubits = _n_qubits_for(amplitudes.size)

        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > ALGEBRAIC_TOLERANCE:
            raise StateDomainError(
                "Amplitudes are not normalized, squared norm is {}".format(norm)
            )
        self.amplitudes = _frozen(amplitudes)

    @classmethod
    def normalized(cls, amplitudes: Union[Sequence[complex], np.ndarray]):
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amplitudes)
        if norm < ALGEBRAIC_TOLERANCE:
            raise StateDomainError("Cannot normalize a null vector")
        return cls(amplitudes / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def canonical(self) -> "PureState":
        """
        Same ray with the first nonzero amplitude made real and positive.
        """
        for amplitude in self.amplitudes:
            if abs(amplitude) > ALGEBRAIC_TOLERANCE:
                phase = amplitude / abs(amplitude)
                return PureState(self.amplitudes / phase)
        return self

    def apply(self, operator: np.ndarray) -> "PureState":
        operator = np.asarray(operator, dtype=complex)
        if operator.shape != (self.dim, self.dim):
            raise StateDomainError(
                "Operator of shape {} cannot act on {} qubits".format(
                    operator.shape, self.n_qubits
                )
            )
        return PureState.normalized(operator @ self.amplitudes)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return "PureState(n_qubits={}, amplitudes={})".format(
            self.n_qubits, np.round(self.amplitudes, 12).tolist()
        )


class DensityMatrix(object):
    def __init__(self, entries: np.ndarray):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise StateDomainError(
                "Density matrix must be square, got shape {}".format(entries.shape)
            )
        self.n_qubits = _n_qubits_for(entries.shape[0])

        asymmetry = float(np.max(np.abs(entries - entries.conj().T)))
        if asymmetry > ALGEBRAIC_TOLERANCE:
            raise StateDomainError(
                "Density matrix is not Hermitian, deviation {}".format(asymmetry)
            )
        trace = complex(np.trace(entries))
        if abs(trace - 1.0) > ALGEBRAIC_TOLERANCE:
            raise StateDomainError("Density matrix trace is {}".format(trace))
        min_eigenvalue = float(np.min(np.linalg.eigvalsh(entries)))
        if min_eigenvalue < -EIGENVALUE_TOLERANCE:
            raise StateDomainError(
                "Density matrix has negative eigenvalue {}".format(min_eigenvalue)
            )
        self.entries = _frozen(entries)

    @classmethod
    def maximally_mixed(cls, n_qubits: int):
        dim = 2**n_qubits
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def mixture(cls, weights: Sequence[float], states: Sequence["DensityMatrix"]):
        if len(weights) != len(states) or not states:
            raise StateDomainError("Mixture needs one weight per state")
        if any(w < 0 for w in weights):
            raise StateDomainError("Mixture weights must be non-negative")
        entries = sum(w * rho.entries for w, rho in zip(weights, states))
        return cls(entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def conjugate_by(self, operator: np.ndarray) -> "DensityMatrix":
        operator = np.asarray(operator, dtype=complex)
        entries = operator @ self.entries @ operator.conj().T
        return DensityMatrix((entries + entries.conj().T) / 2)

    def __repr__(self):
        return "DensityMatrix(n_qubits={}, entries={})".format(
            self.n_qubits, np.round(self.entries, 12).tolist()
        )


class PauliLabel(Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"


PAULI_MATRICES = {
    PauliLabel.I: np.array([[1, 0], [0, 1]], dtype=complex),
    PauliLabel.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliLabel.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliLabel.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliOp(object):
    def __init__(self, label: PauliLabel, phase: complex = 1.0):
        if abs(abs(phase) - 1.0) > ALGEBRAIC_TOLERANCE:
            raise StateDomainError("Pauli phase {} is not unimodular".format(phase))
        self.label = label
        self.phase = complex(phase)

    @property
    def matrix(self) -> np.ndarray:
        return self.phase * PAULI_MATRICES[self.label]

    def apply(self, state: PureState) -> PureState:
        return state.apply(self.matrix)

    def __eq__(self, other):
        return (
            isinstance(other, PauliOp)
            and self.label == other.label
            and abs(self.phase - other.phase) < ALGEBRAIC_TOLERANCE
        )

    def __hash__(self):
        return hash((self.label, round(self.phase.real, 9), round(self.phase.imag, 9)))

    def __repr__(self):
        prefix = "" if self.phase == 1 else "{}*".format(self.phase)
        return "PauliOp({}sigma_{})".format(prefix, self.label.value)


SIGMA_X = PauliOp(PauliLabel.X)
SIGMA_Y = PauliOp(PauliLabel.Y)
SIGMA_Z = PauliOp(PauliLabel.Z)
I_SIGMA_Y = PauliOp(PauliLabel.Y, 1j)

KET_0 = PureState([1, 0])
KET_1 = PureState([0, 1])

# names match restorer.BellOutcome values
BELL_AMPLITUDES = {
    "PhiPlus": np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2),
    "PhiMinus": np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2),
    "PsiPlus": np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2),
    "PsiMinus": np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2),
}


def bell_state(name: str) -> PureState:
    amplitudes = BELL_AMPLITUDES.get(name)
    if amplitudes is None:
        raise StateDomainError("Unknown Bell state {}".format(name))
    return PureState(amplitudes)


# ============ Construction ============
def state_from_bloch(p: BlochPoint) -> PureState:
    """
    alpha = cos(theta / 2), beta = exp(i phi) sin(theta / 2), so the |0>
    amplitude is real and non-negative.

    :raises: StateDomainError if p is not on the unit sphere
    """
    norm = p.norm()
    if abs(norm - 1.0) > BLOCH_TOLERANCE:
        raise StateDomainError(
            "Bloch point {} has norm {}, a pure state needs 1".format(tuple(p), norm)
        )
    theta = math.acos(max(-1.0, min(1.0, p.z / norm)))
    phi = math.atan2(p.y, p.x)
    alpha = math.cos(theta / 2)
    beta = complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)
    return PureState.normalized([alpha, beta])


def state_from_angles(theta: float, phi: float) -> PureState:
    return state_from_bloch(
        BlochPoint(
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        )
    )


def state_from_label(label: str) -> PureState:
    point = LABELED_BLOCH_POINTS.get(label)
    if point is None:
        raise StateDomainError("State label {} is not supported".format(label))
    return state_from_bloch(point)


def bloch_from_state(state: Union[PureState, DensityMatrix]) -> BlochPoint:
    rho = state.density() if isinstance(state, PureState) else state
    if rho.n_qubits != 1:
        raise StateDomainError("Bloch coordinates need a single qubit")
    return BlochPoint(
        float(np.trace(rho.entries @ PAULI_MATRICES[PauliLabel.X]).real),
        float(np.trace(rho.entries @ PAULI_MATRICES[PauliLabel.Y]).real),
        float(np.trace(rho.entries @ PAULI_MATRICES[PauliLabel.Z]).real),
    )


def orthogonal(phi: PureState) -> PureState:
    """
    |phi_perp> = beta* |0> - alpha* |1>
    """
    if phi.n_qubits != 1:
        raise StateDomainError("Orthogonal complement is defined for one qubit")
    alpha, beta = phi.amplitudes
    return PureState([np.conj(beta), -np.conj(alpha)])


def tensor(a: PureState, b: PureState) -> PureState:
    if a.n_qubits + b.n_qubits > MAX_QUBITS:
        raise StateDomainError(
            "Tensor product of {} and {} qubits exceeds {}".format(
                a.n_qubits, b.n_qubits, MAX_QUBITS
            )
        )
    return PureState.normalized(np.kron(a.amplitudes, b.amplitudes))


def random_bloch_point(rng: np.random.Generator) -> BlochPoint:
    vector = rng.normal(size=3)
    vector = vector / np.linalg.norm(vector)
    return BlochPoint(float(vector[0]), float(vector[1]), float(vector[2]))


def random_state(rng: np.random.Generator) -> PureState:
    return state_from_bloch(random_bloch_point(rng))


def random_mixed_state(rng: np.random.Generator) -> DensityMatrix:
    # uniform in the Bloch ball
    direction = random_bloch_point(rng)
    radius = float(rng.uniform()) ** (1.0 / 3.0)
    return density_from_bloch(
        BlochPoint(radius * direction.x, radius * direction.y, radius * direction.z)
    )


def density_from_bloch(p: BlochPoint) -> DensityMatrix:
    if p.norm() > 1.0 + ALGEBRAIC_TOLERANCE:
        raise StateDomainError("Bloch vector {} lies outside the ball".format(p))
    entries = (
        PAULI_MATRICES[PauliLabel.I]
        + p.x * PAULI_MATRICES[PauliLabel.X]
        + p.y * PAULI_MATRICES[PauliLabel.Y]
        + p.z * PAULI_MATRICES[PauliLabel.Z]
    ) / 2
    return DensityMatrix(entries)


# ============ Operators ============
def embed(operator: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """
    Lift an operator on `targets` to the full n-qubit space, identity elsewhere.
    """
    targets = list(targets)
    if len(set(targets)) != len(targets) or any(
        q < 0 or q >= n_qubits for q in targets
    ):
        raise StateDomainError(
            "Invalid targets {} for {} qubits".format(targets, n_qubits)
        )
    operator = np.asarray(operator, dtype=complex)
    if operator.shape != (2 ** len(targets), 2 ** len(targets)):
        raise StateDomainError(
            "Operator of shape {} does not act on {} qubits".format(
                operator.shape, len(targets)
            )
        )

    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(operator, np.eye(2 ** len(rest), dtype=complex))
    inverse = list(np.argsort(targets + rest))
    permutation = inverse + [n_qubits + axis for axis in inverse]
    dim = 2**n_qubits
    return (
        full.reshape([2] * (2 * n_qubits)).transpose(permutation).reshape(dim, dim)
    )


def projector(state: PureState) -> np.ndarray:
    return np.outer(state.amplitudes, state.amplitudes.conj())


def swap_qubits(state: PureState, first: int, second: int) -> PureState:
    axes = list(range(state.n_qubits))
    axes[first], axes[second] = axes[second], axes[first]
    amplitudes = state.amplitudes.reshape([2] * state.n_qubits).transpose(axes)
    return PureState(amplitudes.reshape(-1))


# ============ Reductions and Metrics ============
def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = sorted(set(keep))
    n_qubits = rho.n_qubits
    if not keep or any(q < 0 or q >= n_qubits for q in keep):
        raise StateDomainError(
            "Invalid qubit set {} for a {}-qubit state".format(keep, n_qubits)
        )

    traced = [q for q in range(n_qubits) if q not in keep]
    reshaped = rho.entries.reshape([2] * (2 * n_qubits))
    remaining = n_qubits
    # highest index first so lower axes keep their position
    for qubit in reversed(traced):
        reshaped = np.trace(reshaped, axis1=qubit, axis2=qubit + remaining)
        remaining -= 1

    dim = 2 ** len(keep)
    return DensityMatrix(reshaped.reshape(dim, dim))


def fidelity(rho: DensityMatrix, phi: PureState) -> float:
    if rho.dim != phi.dim:
        raise StateDomainError(
            "Cannot compare a {}-qubit matrix with a {}-qubit state".format(
                rho.n_qubits, phi.n_qubits
            )
        )
    value = complex(np.vdot(phi.amplitudes, rho.entries @ phi.amplitudes))
    return float(min(1.0, max(0.0, value.real)))


def state_fidelity(a: PureState, b: PureState) -> float:
    if a.dim != b.dim:
        raise StateDomainError("States have different dimensions")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.dim != sigma.dim:
        raise StateDomainError("Matrices have different dimensions")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho.entries - sigma.entries))))


def concurrence(rho: DensityMatrix) -> float:
    if rho.n_qubits != 2:
        raise StateDomainError("Concurrence is defined for two qubits")
    yy = np.kron(PAULI_MATRICES[PauliLabel.Y], PAULI_MATRICES[PauliLabel.Y])
    flipped = yy @ rho.entries.conj() @ yy
    weights, vectors = np.linalg.eigh(rho.entries)
    root_rho = vectors @ np.diag(np.sqrt(np.clip(weights, 0.0, None))) @ vectors.conj().T
    # Hermitian form of rho * flipped, same spectrum
    eigenvalues = np.linalg.eigvalsh(root_rho @ flipped @ root_rho)
    roots = np.sort(np.sqrt(np.clip(eigenvalues, 0.0, None)))[::-1]
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


def change_basis(rho: DensityMatrix, basis: Sequence[PureState]) -> DensityMatrix:
    """
    Matrix elements <b_i| rho |b_j> in an orthonormal basis.
    """
    columns = np.column_stack([b.amplitudes for b in basis])
    if columns.shape != (rho.dim, rho.dim):
        raise StateDomainError("Basis does not span the state space")
    if not np.allclose(
        columns.conj().T @ columns, np.eye(rho.dim), atol=ALGEBRAIC_TOLERANCE
    ):
        raise StateDomainError("Basis is not orthonormal")
    return rho.conjugate_by(columns.conj().T)


# ============ Measurement ============
def born_probabilities(
    state: Union[PureState, DensityMatrix], projectors: Sequence[np.ndarray]
) -> np.ndarray:
    rho = state.density() if isinstance(state, PureState) else state
    if not projectors:
        raise ProtocolError("Empty projector set")
    total = np.zeros((rho.dim, rho.dim), dtype=complex)
    for p in projectors:
        if np.shape(p) != (rho.dim, rho.dim):
            raise StateDomainError(
                "Projector of shape {} does not match {} qubits".format(
                    np.shape(p), rho.n_qubits
                )
            )
        total = total + p
    if not np.allclose(total, np.eye(rho.dim), atol=EIGENVALUE_TOLERANCE):
        raise ProtocolError("Projectors do not sum to the identity")

    probabilities = np.array(
        [np.trace(p @ rho.entries).real for p in projectors], dtype=float
    )
    return np.clip(probabilities, 0.0, 1.0)


def projective_measure(
    state: PureState,
    projectors: Sequence[np.ndarray],
    rng: np.random.Generator,
) -> Tuple[int, PureState]:
    probabilities = born_probabilities(state, projectors)
    outcome = int(rng.choice(len(projectors), p=probabilities / probabilities.sum()))
    collapsed = np.asarray(projectors[outcome], dtype=complex) @ state.amplitudes
    return outcome, PureState.normalized(collapsed)


def basis_projectors(states: Sequence[PureState]) -> List[np.ndarray]:
    return [projector(s) for s in states]

