"""
Experimental imperfections of the cloning + restoring chain.

The heralded qubit B is depolarized towards I/2 with a per-input visibility,
scaled by the Gaussian overlap between injected photon and pump pulse as the
pump mirror moves by Z.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, TypedDict

import numpy as np

from cloneflip.constants import (
    ALGEBRAIC_TOLERANCE,
    DEFAULT_ACQUISITION_S,
    DEFAULT_BACKGROUND_RATE,
    DEFAULT_COHERENCE_LEN_UM,
    DEFAULT_MEAN_FOURFOLD_RATE,
    DEFAULT_WORKERS,
    DEFAULT_Z_UM,
    MIN_BOUND_TRIALS,
    MEASURED_FIDELITY_TARGETS,
    SEED_LABEL_BOUND,
    SEED_LABEL_SWEEP,
    STATE_H,
    STATE_PLUS,
    STATE_R,
)
from cloneflip.errors import ConfigError, StateDomainError
from cloneflip.helpers.io_helpers import format_key_values, read_key_value_file
from cloneflip.helpers.trial_helpers import derive_rng, map_trials, spawn_seed
from cloneflip.modules.qstate import (
    DensityMatrix,
    PureState,
    bloch_from_state,
    state_fidelity,
    state_from_label,
)
from cloneflip.modules.tomography import outcome_prob

logger = logging.getLogger(__name__)

BOUND_CHUNK_SIZE = 100000

SweepPoint = TypedDict(
    "SweepPoint",
    {
        "z_um": float,
        "counts_d2": int,
        "counts_d2star": int,
    },
)


def calibrate_visibilities(target_fidelities: Mapping[str, float]) -> Dict[str, float]:
    """
    Invert F = (1 + v) / 2 for every labelled input state.

    :raises: StateDomainError for a target below 1/2, which no visibility reaches
    """
    visibilities: Dict[str, float] = {}
    for label, target in target_fidelities.items():
        if not 0.5 <= target <= 1.0:
            raise StateDomainError(
                "Target fidelity {} for state {} is outside [0.5, 1]".format(
                    target, label
                )
            )
        visibilities[label] = 2.0 * target - 1.0
    return visibilities


def _default_visibility() -> Dict[str, float]:
    return calibrate_visibilities(MEASURED_FIDELITY_TARGETS)


@dataclass(frozen=True)
class ExperimentConfig:
    z_um: float = DEFAULT_Z_UM
    coherence_len_um: float = DEFAULT_COHERENCE_LEN_UM
    visibility: Mapping[str, float] = field(default_factory=_default_visibility)
    mean_fourfold_rate: float = DEFAULT_MEAN_FOURFOLD_RATE
    acquisition_s: float = DEFAULT_ACQUISITION_S
    background_rate: float = DEFAULT_BACKGROUND_RATE

    def __post_init__(self):
        scalars = {
            "z_um": self.z_um,
            "coherence_len_um": self.coherence_len_um,
            "mean_fourfold_rate": self.mean_fourfold_rate,
            "acquisition_s": self.acquisition_s,
            "background_rate": self.background_rate,
        }
        scalars.update(("visibility_" + label, v) for label, v in self.visibility.items())
        for name, value in scalars.items():
            if not math.isfinite(value):
                raise StateDomainError("{} must be finite, got {}".format(name, value))
        if self.coherence_len_um <= 0:
            raise StateDomainError(
                "coherence_len_um must be positive, got {}".format(
                    self.coherence_len_um
                )
            )
        for label, v in self.visibility.items():
            if not 0.0 <= v <= 1.0:
                raise StateDomainError(
                    "Visibility {} for state {} is outside [0, 1]".format(v, label)
                )
        if self.mean_fourfold_rate < 0 or self.background_rate < 0:
            raise StateDomainError("Count rates must be non-negative")
        if self.acquisition_s <= 0:
            raise StateDomainError("acquisition_s must be positive")

    def visibility_for(self, phi: PureState) -> float:
        """
        Calibrated visibility of a labelled input; other inputs get the mean
        of the calibrated values.
        """
        for label, v in self.visibility.items():
            if state_fidelity(state_from_label(label), phi) > 1.0 - 1e-9:
                return v
        mean = float(np.mean(list(self.visibility.values()))) if self.visibility else 1.0
        logger.debug("Unlabelled input, using mean visibility {:.4f}".format(mean))
        return mean

    def to_text(self) -> str:
        return format_key_values(
            {
                "z_um": self.z_um,
                "coherence_len_um": self.coherence_len_um,
                "visibility_h": self.visibility.get(STATE_H),
                "visibility_plus": self.visibility.get(STATE_PLUS),
                "visibility_r": self.visibility.get(STATE_R),
                "mean_fourfold_rate": self.mean_fourfold_rate,
                "acquisition_s": self.acquisition_s,
                "background_rate": self.background_rate,
            }
        )


SCALAR_KEYS = (
    "z_um",
    "coherence_len_um",
    "mean_fourfold_rate",
    "acquisition_s",
    "background_rate",
)
STATE_KEYS = {"h": STATE_H, "plus": STATE_PLUS, "r": STATE_R}


def config_from_mapping(values: Mapping[str, str], path: Optional[str] = None) -> ExperimentConfig:
    known = set(SCALAR_KEYS)
    for suffix in STATE_KEYS:
        known.add("visibility_" + suffix)
        known.add("fidelity_" + suffix)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(path, "unknown keys {}".format(", ".join(unknown)))

    def number(key: str) -> float:
        try:
            value = float(values[key])
        except ValueError:
            raise ConfigError(path, "{} = {} is not a number".format(key, values[key]))
        if not math.isfinite(value):
            raise ConfigError(path, "{} = {} is not finite".format(key, values[key]))
        return value

    kwargs = {key: number(key) for key in SCALAR_KEYS if key in values}

    try:
        visibility = _default_visibility()
        for suffix, label in STATE_KEYS.items():
            if "visibility_" + suffix in values:
                visibility[label] = number("visibility_" + suffix)
            elif "fidelity_" + suffix in values:
                target = number("fidelity_" + suffix)
                visibility.update(calibrate_visibilities({label: target}))
        return ExperimentConfig(visibility=visibility, **kwargs)
    except StateDomainError as error:
        raise ConfigError(path, str(error))


def load_config(path: str) -> ExperimentConfig:
    return config_from_mapping(read_key_value_file(path), path)


# ============ Noise Model ============
def mode_overlap(z_um: float, coherence_len_um: float) -> float:
    if coherence_len_um <= 0:
        raise StateDomainError(
            "coherence_len_um must be positive, got {}".format(coherence_len_um)
        )
    return math.exp(-(z_um**2) / (2.0 * coherence_len_um**2))


def heralded_output_state(phi: PureState, v: float) -> DensityMatrix:
    """
    rho = v |phi><phi| + (1 - v) I / 2, so that F = (1 + v) / 2.
    """
    if not -ALGEBRAIC_TOLERANCE <= v <= 1.0 + ALGEBRAIC_TOLERANCE:
        raise StateDomainError("Visibility {} is outside [0, 1]".format(v))
    if phi.n_qubits != 1:
        raise StateDomainError("Heralded output is a single qubit")
    v = min(1.0, max(0.0, v))
    return DensityMatrix.mixture(
        [v, 1.0 - v], [phi.density(), DensityMatrix.maximally_mixed(1)]
    )


def effective_visibility(
    phi: PureState, config: ExperimentConfig, z_um: float, visibility: Optional[float] = None
) -> float:
    v = config.visibility_for(phi) if visibility is None else visibility
    return v * mode_overlap(z_um, config.coherence_len_um)


def expected_counts(
    phi: PureState,
    config: ExperimentConfig,
    z_um: float,
    visibility: Optional[float] = None,
) -> Tuple[float, float]:
    """
    Mean fourfold coincidences for D2 (along phi) and D2* (along phi_perp).
    """
    rho = heralded_output_state(phi, effective_visibility(phi, config, z_um, visibility))
    p_d2, p_d2star = outcome_prob(rho, phi)
    return (
        config.mean_fourfold_rate * p_d2 + config.background_rate,
        config.mean_fourfold_rate * p_d2star + config.background_rate,
    )


def z_sweep(
    phi: PureState,
    config: ExperimentConfig,
    z_grid: Sequence[float],
    rng: np.random.Generator,
    visibility: Optional[float] = None,
    workers: int = DEFAULT_WORKERS,
) -> List[SweepPoint]:
    if len(z_grid) == 0:
        raise ValueError("z_grid is empty")
    base_seed = spawn_seed(rng)

    def measure(indexed: Tuple[int, float]) -> SweepPoint:
        index, z = indexed
        mean_d2, mean_d2star = expected_counts(phi, config, z, visibility)
        stream = derive_rng(base_seed, SEED_LABEL_SWEEP, index)
        counts_d2, counts_d2star = stream.poisson([mean_d2, mean_d2star])
        logger.debug(
            "z = {:.3f} um: means ({:.2f}, {:.2f}) counts ({}, {})".format(
                z, mean_d2, mean_d2star, counts_d2, counts_d2star
            )
        )
        return {
            "z_um": float(z),
            "counts_d2": int(counts_d2),
            "counts_d2star": int(counts_d2star),
        }

    return map_trials(measure, list(enumerate(z_grid)), workers)


# ============ Classical Benchmark ============
def measure_prepare_fidelity(phi: PureState, axis: Sequence[float]) -> float:
    """
    Expected fidelity of measuring phi along `axis` and preparing the
    eigenstate found.
    """
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    c = float(np.dot(np.array(bloch_from_state(phi)), axis))
    return (1.0 + c**2) / 2.0


def _unit_vectors(rng: np.random.Generator, size: int) -> np.ndarray:
    vectors = rng.normal(size=(size, 3))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def classical_bound_mc(
    trials: int, rng: np.random.Generator, workers: int = DEFAULT_WORKERS
) -> float:
    """
    Average fidelity of measure-and-prepare over Haar-uniform inputs, each
    measured along a random axis.
    """
    if trials < MIN_BOUND_TRIALS:
        raise ValueError(
            "trials must be at least {}, got {}".format(MIN_BOUND_TRIALS, trials)
        )
    base_seed = spawn_seed(rng)
    chunks = [
        (index, min(BOUND_CHUNK_SIZE, trials - start))
        for index, start in enumerate(range(0, trials, BOUND_CHUNK_SIZE))
    ]

    def run_chunk(chunk: Tuple[int, int]) -> float:
        index, size = chunk
        stream = derive_rng(base_seed, SEED_LABEL_BOUND, index)
        inputs = _unit_vectors(stream, size)
        axes = _unit_vectors(stream, size)
        cosines = np.sum(inputs * axes, axis=1)
        # outcome +axis with probability (1 + cos) / 2
        signs = np.where(stream.uniform(size=size) < (1.0 + cosines) / 2.0, 1.0, -1.0)
        return float(np.sum((1.0 + signs * cosines) / 2.0))

    total = sum(map_trials(run_chunk, chunks, workers))
    estimate = total / trials
    logger.debug("Measure-and-prepare over {} trials: {:.6f}".format(trials, estimate))
    return estimate


def average_fidelity(fidelities: Mapping[str, float]) -> float:
    if not fidelities:
        raise ValueError("No fidelities to average")
    return float(np.mean(list(fidelities.values())))


def separation(bound: float, fidelities: Sequence[float]) -> bool:
    return all(bound < f for f in fidelities)
