import logging
from typing import Dict, List, Optional, Sequence, TypedDict

import numpy as np

from cloneflip.constants import (
    ALGEBRAIC_TOLERANCE,
    ANTICLONE_FIDELITY,
    BELL_BRANCH_PROBABILITY,
    CLASSICAL_BOUND,
    CLONE_FIDELITY,
    COUNTS_CSV_COLUMNS,
    DEFAULT_BOOTSTRAP_N,
    DEFAULT_COUNTS_PER_BASIS,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    FLIP_FIDELITY,
    MANIFEST_FILE_NAME,
    MIN_COUNTS_PER_BASIS,
    MEASURED_FIDELITY_TARGETS,
    SEED_LABEL_BOOTSTRAP,
    SEED_LABEL_BOUND,
    SEED_LABEL_RESTORE,
    SEED_LABEL_SWEEP,
    SEED_LABEL_TOMOGRAPHY,
    SWEEP_CSV_COLUMNS,
    TARGET_FIDELITY_AVERAGE,
    TOOL_VERSION,
)
from cloneflip.errors import InvariantViolation
from cloneflip.helpers.io_helpers import output_path, write_csv, write_json
from cloneflip.helpers.trial_helpers import derive_rng
from cloneflip.modules.cloner import clone_flip, machine_fidelities
from cloneflip.modules.emulator import (
    ExperimentConfig,
    SweepPoint,
    average_fidelity,
    classical_bound_mc,
    effective_visibility,
    heralded_output_state,
    load_config,
    separation,
    z_sweep,
)
from cloneflip.modules.qstate import PureState, state_from_label
from cloneflip.modules.restorer import (
    BELL_ORDER,
    BellOutcome,
    HeraldMode,
    bell_outcome_probs,
    restore,
)
from cloneflip.modules.tomography import (
    exact_records,
    fidelity_with_error,
    in_input_basis,
    matrix_to_json,
    records_to_rows,
    reconstruct_from_counts,
    simulate_records,
)

logger = logging.getLogger(__name__)

RunManifest = TypedDict(
    "RunManifest",
    {
        "command": str,
        "master_seed": int,
        "config_path": Optional[str],
        "outputs": List[str],
        "versions": str,
    },
)

IdealReport = TypedDict(
    "IdealReport",
    {
        "clone_fidelity": float,
        "flip_fidelity": float,
        "anticlone_fidelity": float,
        "bell_probabilities": Dict[str, float],
        "outcome": BellOutcome,
        "restored_fidelity": float,
        "branch_fidelities": Dict[str, float],
    },
)

TomoReport = TypedDict(
    "TomoReport",
    {
        "state": str,
        "visibility": float,
        "fidelity": float,
        "sigma": float,
        "matrix_path": str,
        "counts_path": str,
    },
)

BoundReport = TypedDict(
    "BoundReport",
    {
        "trials": int,
        "estimate": float,
        "exact": float,
        "separated": bool,
    },
)


class Simulator(object):
    def __init__(
        self,
        master_seed: int = DEFAULT_SEED,
        config_path: Optional[str] = None,
        out_dir: Optional[str] = None,
        workers: Optional[int] = None,
        config: Optional[ExperimentConfig] = None,
    ):
        self.master_seed = master_seed
        self.config_path = config_path
        self.out_dir = out_dir or "."
        self.workers = workers or DEFAULT_WORKERS

        self._config = config
        self._outputs: List[str] = []

    @property
    def config(self) -> ExperimentConfig:
        """
        Get the experiment configuration, read from config_path on first use.
        """
        if self._config is None:
            if self.config_path:
                self._config = load_config(self.config_path)
            else:
                self._config = ExperimentConfig()
        return self._config

    @property
    def outputs(self) -> List[str]:
        return list(self._outputs)

    def rng(self, label: str, index: int = 0) -> np.random.Generator:
        return derive_rng(self.master_seed, label, index)

    def _record(self, path: str) -> str:
        self._outputs.append(path)
        return path

    # -----------------------------------------------------------
    # Pipelines
    # -----------------------------------------------------------
    def ideal(self, phi: PureState) -> IdealReport:
        """
        Run the noiseless clone -> Bell measurement -> feedforward chain and
        check every closed-form value.

        :raises: InvariantViolation
        """
        out = clone_flip(phi)
        fidelities = machine_fidelities(out)
        probabilities = bell_outcome_probs(out)
        record = restore(phi, self.rng(SEED_LABEL_RESTORE), HeraldMode.FULL_BELL)

        expected = {
            "clone_s": CLONE_FIDELITY,
            "clone_a": CLONE_FIDELITY,
            "anticlone": ANTICLONE_FIDELITY,
            "flip": FLIP_FIDELITY,
        }
        for check, value in expected.items():
            _check(check, fidelities[check], value)
        for outcome, p in zip(BELL_ORDER, probabilities):
            target = 0.0 if outcome == BellOutcome.PSI_MINUS else BELL_BRANCH_PROBABILITY
            _check("p_" + outcome.value, p, target)
        _check("restored", record["restored_fidelity"], 1.0)

        branch_fidelities: Dict[str, float] = {}
        for outcome in BELL_ORDER:
            if outcome == BellOutcome.PSI_MINUS:
                continue
            forced = restore(phi, self.rng(SEED_LABEL_RESTORE), outcome=outcome)
            branch_fidelities[outcome.value] = forced["restored_fidelity"]
            _check("restored_" + outcome.value, forced["restored_fidelity"], 1.0)

        return {
            "clone_fidelity": fidelities["clone_s"],
            "flip_fidelity": fidelities["flip"],
            "anticlone_fidelity": fidelities["anticlone"],
            "bell_probabilities": {
                outcome.value: p for outcome, p in zip(BELL_ORDER, probabilities)
            },
            "outcome": record["outcome"],
            "restored_fidelity": record["restored_fidelity"],
            "branch_fidelities": branch_fidelities,
        }

    def sweep(
        self,
        phi: PureState,
        z_grid: Sequence[float],
        file_name: str = "sweep.csv",
    ) -> List[SweepPoint]:
        points = z_sweep(
            phi,
            self.config,
            z_grid,
            self.rng(SEED_LABEL_SWEEP),
            workers=self.workers,
        )
        rows = [
            {
                "z_um": "{:.6f}".format(p["z_um"]),
                "counts_d2": p["counts_d2"],
                "counts_d2star": p["counts_d2star"],
            }
            for p in points
        ]
        self._record(write_csv(output_path(self.out_dir, file_name), SWEEP_CSV_COLUMNS, rows))
        return points

    def tomo(
        self,
        label: str,
        counts_per_basis: int = DEFAULT_COUNTS_PER_BASIS,
        bootstrap_n: int = DEFAULT_BOOTSTRAP_N,
        exact: bool = False,
        visibility: Optional[float] = None,
    ) -> TomoReport:
        if counts_per_basis < MIN_COUNTS_PER_BASIS:
            raise ValueError(
                "counts_per_basis must be at least {}, got {}".format(
                    MIN_COUNTS_PER_BASIS, counts_per_basis
                )
            )
        phi = state_from_label(label)
        # a forced visibility is taken as is, without the mode overlap
        if visibility is None:
            v = effective_visibility(phi, self.config, self.config.z_um)
        else:
            v = visibility
        rho = heralded_output_state(phi, v)

        if exact:
            records = exact_records(rho, counts_per_basis)
        else:
            records = simulate_records(
                rho, counts_per_basis, self.rng(SEED_LABEL_TOMOGRAPHY + ":" + label)
            )

        estimate, sigma = fidelity_with_error(
            records,
            phi,
            bootstrap_n,
            self.rng(SEED_LABEL_BOOTSTRAP + ":" + label),
            workers=self.workers,
        )
        reconstructed = in_input_basis(reconstruct_from_counts(records), phi)
        logger.info(
            "State {}: v = {:.4f}, F = {:.4f} +/- {:.4f}".format(label, v, estimate, sigma)
        )

        matrix_path = self._record(
            write_json(
                output_path(self.out_dir, "tomo_{}.json".format(label)),
                matrix_to_json(reconstructed, ["phi", "phi_perp"]),
            )
        )
        counts_path = self._record(
            write_csv(
                output_path(self.out_dir, "tomo_{}_counts.csv".format(label)),
                COUNTS_CSV_COLUMNS,
                records_to_rows(records),
            )
        )
        return {
            "state": label,
            "visibility": v,
            "fidelity": estimate,
            "sigma": sigma,
            "matrix_path": matrix_path,
            "counts_path": counts_path,
        }

    def tomo_average(self, reports: Sequence[TomoReport]) -> float:
        return average_fidelity({r["state"]: r["fidelity"] for r in reports})

    def bound(self, trials: int) -> BoundReport:
        estimate = classical_bound_mc(trials, self.rng(SEED_LABEL_BOUND), self.workers)
        report: BoundReport = {
            "trials": trials,
            "estimate": estimate,
            "exact": CLASSICAL_BOUND,
            "separated": separation(
                estimate,
                [TARGET_FIDELITY_AVERAGE] + list(MEASURED_FIDELITY_TARGETS.values()),
            ),
        }
        self._record(write_json(output_path(self.out_dir, "bound.json"), report))
        return report

    def write_manifest(self, command: str) -> RunManifest:
        manifest: RunManifest = {
            "command": command,
            "master_seed": self.master_seed,
            "config_path": self.config_path,
            "outputs": self.outputs,
            "versions": TOOL_VERSION,
        }
        write_json(output_path(self.out_dir, MANIFEST_FILE_NAME), manifest)
        return manifest


def _check(name: str, observed: float, expected: float) -> None:
    if abs(observed - expected) > ALGEBRAIC_TOLERANCE:
        raise InvariantViolation(name, observed, expected)
