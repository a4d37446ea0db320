from enum import Enum
import logging
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, TypedDict, Union

import numpy as np

from cloneflip.constants import (
    COUNTS_CSV_COLUMNS,
    DEFAULT_WORKERS,
    MIN_BOOTSTRAP_N,
    SEED_LABEL_BOOTSTRAP,
    STATE_H,
    STATE_L,
    STATE_MINUS,
    STATE_PLUS,
    STATE_R,
    STATE_V,
    TOMOGRAPHY_ACQUISITION_S,
)
from cloneflip.errors import StateDomainError
from cloneflip.helpers.trial_helpers import derive_rng, map_trials, spawn_seed
from cloneflip.modules.qstate import (
    PAULI_MATRICES,
    DensityMatrix,
    PauliLabel,
    PureState,
    change_basis,
    fidelity,
    orthogonal,
    state_from_label,
)

logger = logging.getLogger(__name__)


class MeasurementSetting(Enum):
    Z = "Z"  # H / V
    X = "X"  # + / -
    Y = "Y"  # R / L


# analyzer eigenstates (D2, D2*) per waveplate setting
SETTING_STATES = {
    MeasurementSetting.Z: (STATE_H, STATE_V),
    MeasurementSetting.X: (STATE_PLUS, STATE_MINUS),
    MeasurementSetting.Y: (STATE_R, STATE_L),
}

# S1 <-> H/V, S2 <-> diagonal, S3 <-> circular
STOKES_ORDER = [MeasurementSetting.Z, MeasurementSetting.X, MeasurementSetting.Y]
STOKES_PAULI = {
    MeasurementSetting.Z: PauliLabel.Z,
    MeasurementSetting.X: PauliLabel.X,
    MeasurementSetting.Y: PauliLabel.Y,
}


class StokesVector(NamedTuple):
    s0: float
    s1: float
    s2: float
    s3: float

    def polarization(self) -> float:
        return float(np.sqrt(self.s1**2 + self.s2**2 + self.s3**2))


CountRecord = TypedDict(
    "CountRecord",
    {
        "setting": MeasurementSetting,
        "n_plus": Union[int, float],
        "n_minus": Union[int, float],
        "duration": float,
    },
)


def _analyzer(setting: Union[MeasurementSetting, PureState]) -> Tuple[PureState, PureState]:
    if isinstance(setting, PureState):
        if setting.n_qubits != 1:
            raise StateDomainError("Analyzer state must be a single qubit")
        return setting, orthogonal(setting)
    plus, minus = SETTING_STATES[setting]
    return state_from_label(plus), state_from_label(minus)


def outcome_prob(
    rho: DensityMatrix, setting: Union[MeasurementSetting, PureState]
) -> Tuple[float, float]:
    """
    Born probabilities for D2 and D2*. A PureState setting analyzes along
    that state and its orthogonal complement.
    """
    if rho.n_qubits != 1:
        raise StateDomainError(
            "Tomography acts on one qubit, got {}".format(rho.n_qubits)
        )
    plus, _ = _analyzer(setting)
    p_plus = fidelity(rho, plus)
    return p_plus, 1.0 - p_plus


def simulate_counts(
    rho: DensityMatrix,
    setting: MeasurementSetting,
    mean_total: float,
    rng: np.random.Generator,
    duration: float = TOMOGRAPHY_ACQUISITION_S / 3,
) -> CountRecord:
    if mean_total <= 0:
        raise ValueError("mean_total must be positive, got {}".format(mean_total))
    p_plus, p_minus = outcome_prob(rho, setting)
    n_plus, n_minus = rng.poisson([mean_total * p_plus, mean_total * p_minus])
    return {
        "setting": setting,
        "n_plus": int(n_plus),
        "n_minus": int(n_minus),
        "duration": duration,
    }


def exact_records(
    rho: DensityMatrix,
    mean_total: float,
    duration: float = TOMOGRAPHY_ACQUISITION_S / 3,
) -> List[CountRecord]:
    records: List[CountRecord] = []
    for setting in STOKES_ORDER:
        p_plus, p_minus = outcome_prob(rho, setting)
        records.append(
            {
                "setting": setting,
                "n_plus": mean_total * p_plus,
                "n_minus": mean_total * p_minus,
                "duration": duration,
            }
        )
    return records


def simulate_records(
    rho: DensityMatrix,
    mean_total: float,
    rng: np.random.Generator,
    duration: float = TOMOGRAPHY_ACQUISITION_S / 3,
) -> List[CountRecord]:
    return [
        simulate_counts(rho, setting, mean_total, rng, duration)
        for setting in STOKES_ORDER
    ]


def _by_setting(records: Sequence[CountRecord]) -> Dict[MeasurementSetting, CountRecord]:
    by_setting = {record["setting"]: record for record in records}
    if len(records) != len(STOKES_ORDER) or set(by_setting) != set(STOKES_ORDER):
        raise ValueError(
            "Need exactly one record per basis {}, got {}".format(
                [s.value for s in STOKES_ORDER],
                [r["setting"].value for r in records],
            )
        )
    return by_setting


def stokes_from_counts(records: Sequence[CountRecord]) -> StokesVector:
    by_setting = _by_setting(records)

    parameters = []
    for setting in STOKES_ORDER:
        record = by_setting[setting]
        total = record["n_plus"] + record["n_minus"]
        if total <= 0:
            raise ValueError("No counts recorded in basis {}".format(setting.value))
        parameters.append((record["n_plus"] - record["n_minus"]) / total)

    return StokesVector(1.0, *[float(s) for s in parameters])


def stokes_from_state(rho: DensityMatrix) -> StokesVector:
    parameters = []
    for setting in STOKES_ORDER:
        p_plus, p_minus = outcome_prob(rho, setting)
        parameters.append(p_plus - p_minus)
    return StokesVector(1.0, *parameters)


def reconstruct(s: StokesVector) -> DensityMatrix:
    """
    Linear inversion followed by projection onto the physical states:
    negative eigenvalues are clipped and the trace renormalized.
    """
    if s.s0 <= 0:
        raise StateDomainError("S0 must be positive, got {}".format(s.s0))
    entries = PAULI_MATRICES[PauliLabel.I].copy()
    for value, setting in zip((s.s1, s.s2, s.s3), STOKES_ORDER):
        entries = entries + (value / s.s0) * PAULI_MATRICES[STOKES_PAULI[setting]]
    entries = entries / 2

    eigenvalues, eigenvectors = np.linalg.eigh(entries)
    if eigenvalues.min() < 0:
        logger.debug(
            "Clipping unphysical eigenvalue {:.3e} (polarization {:.4f})".format(
                eigenvalues.min(), s.polarization() / s.s0
            )
        )
        eigenvalues = np.clip(eigenvalues, 0.0, 1.0)
        eigenvalues = eigenvalues / eigenvalues.sum()
        entries = eigenvectors @ np.diag(eigenvalues) @ eigenvectors.conj().T

    return DensityMatrix((entries + entries.conj().T) / 2)


def reconstruct_from_counts(records: Sequence[CountRecord]) -> DensityMatrix:
    return reconstruct(stokes_from_counts(records))


def resample_records(
    records: Sequence[CountRecord], rng: np.random.Generator
) -> List[CountRecord]:
    resampled: List[CountRecord] = []
    for record in records:
        n_plus, n_minus = rng.poisson([record["n_plus"], record["n_minus"]])
        resampled.append(
            {
                "setting": record["setting"],
                "n_plus": int(n_plus),
                "n_minus": int(n_minus),
                "duration": record["duration"],
            }
        )
    return resampled


def fidelity_with_error(
    records: Sequence[CountRecord],
    phi: PureState,
    bootstrap_n: int,
    rng: np.random.Generator,
    workers: int = DEFAULT_WORKERS,
) -> Tuple[float, float]:
    """
    Fidelity of the reconstructed state with phi, with a parametric bootstrap
    error: every count is redrawn from a Poisson law centred on the observed
    value and the whole pipeline is rerun.
    """
    if bootstrap_n < MIN_BOOTSTRAP_N:
        raise ValueError(
            "bootstrap_n must be at least {}, got {}".format(MIN_BOOTSTRAP_N, bootstrap_n)
        )
    _by_setting(records)
    estimate = fidelity(reconstruct_from_counts(records), phi)

    base_seed = spawn_seed(rng)

    def resampled_fidelity(index: int) -> Optional[float]:
        stream = derive_rng(base_seed, SEED_LABEL_BOOTSTRAP, index)
        resampled = resample_records(records, stream)
        if any(r["n_plus"] + r["n_minus"] == 0 for r in resampled):
            return None
        return fidelity(reconstruct_from_counts(resampled), phi)

    samples = [
        f
        for f in map_trials(resampled_fidelity, range(bootstrap_n), workers)
        if f is not None
    ]
    if len(samples) < bootstrap_n:
        logger.debug(
            "Dropped {} empty bootstrap resamples".format(bootstrap_n - len(samples))
        )
    sigma = float(np.std(samples, ddof=1)) if len(samples) > 1 else 0.0

    logger.debug(
        "Bootstrap over {} resamples: F = {:.6f} +/- {:.6f}".format(
            len(samples), estimate, sigma
        )
    )
    return estimate, sigma


def in_input_basis(rho: DensityMatrix, phi: PureState) -> DensityMatrix:
    """
    rho written in the {|phi>, |phi_perp>} basis.
    """
    return change_basis(rho, [phi, orthogonal(phi)])


# ============ Serialization ============
def records_to_rows(records: Sequence[CountRecord]) -> List[Dict[str, str]]:
    basis, n_plus, n_minus, duration = COUNTS_CSV_COLUMNS
    return [
        {
            basis: record["setting"].value,
            n_plus: str(record["n_plus"]),
            n_minus: str(record["n_minus"]),
            duration: "{:.1f}".format(record["duration"]),
        }
        for record in records
    ]


def records_from_rows(rows: Sequence[Dict[str, str]]) -> List[CountRecord]:
    basis, n_plus, n_minus, duration = COUNTS_CSV_COLUMNS

    def number(text: str) -> Union[int, float]:
        value = float(text)
        return int(value) if value.is_integer() and "." not in text else value

    records: List[CountRecord] = []
    for row in rows:
        try:
            records.append(
                {
                    "setting": MeasurementSetting(row[basis]),
                    "n_plus": number(row[n_plus]),
                    "n_minus": number(row[n_minus]),
                    "duration": float(row[duration]),
                }
            )
        except (KeyError, ValueError) as error:
            raise ValueError("Malformed count row {}: {}".format(row, error))
        if records[-1]["n_plus"] < 0 or records[-1]["n_minus"] < 0:
            raise ValueError("Counts must be non-negative in row {}".format(row))
    return records


def matrix_to_json(rho: DensityMatrix, basis_labels: Optional[Sequence[str]] = None) -> dict:
    entries = [
        [
            [float(value.real) + 0.0, float(value.imag) + 0.0]
            for value in row
        ]
        for row in rho.entries
    ]
    return {
        "basis": list(basis_labels) if basis_labels else None,
        "entries": entries,
        "trace": float(np.trace(rho.entries).real),
        "min_eigenvalue": float(rho.eigenvalues().min()) + 0.0,
    }


def matrix_from_json(payload: dict) -> DensityMatrix:
    entries = np.array(
        [[complex(re, im) for re, im in row] for row in payload["entries"]],
        dtype=complex,
    )
    return DensityMatrix(entries)
