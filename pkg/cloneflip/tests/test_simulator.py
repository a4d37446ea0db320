import json
import os

import numpy as np
import pytest

from cloneflip.constants import MEASURED_FIDELITY_TARGETS
from cloneflip.errors import InvariantViolation
from cloneflip.helpers.io_helpers import read_csv
from cloneflip.helpers.trial_helpers import derive_rng
from cloneflip.modules.emulator import (
    ExperimentConfig,
    effective_visibility,
    heralded_output_state,
)
from cloneflip.modules.qstate import random_state, state_from_label
from cloneflip.modules.restorer import BellOutcome
from cloneflip.modules.tomography import (
    fidelity_with_error,
    matrix_from_json,
    simulate_records,
)
from cloneflip.simulator import Simulator


@pytest.fixture
def simulator(tmp_path) -> Simulator:
    return Simulator(master_seed=42, out_dir=str(tmp_path))


def test_ideal_report(simulator: Simulator):
    result = simulator.ideal(state_from_label("plus"))

    assert result["clone_fidelity"] == pytest.approx(5 / 6, abs=1e-12)
    assert result["flip_fidelity"] == pytest.approx(2 / 3, abs=1e-12)
    assert result["anticlone_fidelity"] == pytest.approx(1 / 3, abs=1e-12)
    assert result["bell_probabilities"]["PsiMinus"] == pytest.approx(0.0, abs=1e-12)
    assert result["outcome"] != BellOutcome.PSI_MINUS
    assert result["restored_fidelity"] == pytest.approx(1.0, abs=1e-12)
    assert sorted(result["branch_fidelities"]) == ["PhiMinus", "PhiPlus", "PsiPlus"]


def test_ideal_holds_for_random_inputs(simulator: Simulator):
    rng = np.random.default_rng(1)
    for _ in range(20):
        simulator.ideal(random_state(rng))


def test_ideal_should_raise_on_broken_machine(mocker, simulator: Simulator):
    mocker.patch(
        "cloneflip.simulator.machine_fidelities",
        return_value={"clone_s": 0.8, "clone_a": 5 / 6, "anticlone": 1 / 3, "flip": 2 / 3},
    )

    with pytest.raises(InvariantViolation) as error:
        simulator.ideal(state_from_label("H"))

    assert error.value.check == "clone_s"
    assert error.value.observed == 0.8


def test_config_is_loaded_lazily_once(mocker, tmp_path):
    load_config = mocker.patch(
        "cloneflip.simulator.load_config", return_value=ExperimentConfig(z_um=4.0)
    )
    simulator = Simulator(config_path="experiment.conf", out_dir=str(tmp_path))

    load_config.assert_not_called()
    assert simulator.config.z_um == 4.0
    assert simulator.config.z_um == 4.0
    load_config.assert_called_once_with("experiment.conf")


def test_sweep_writes_csv(simulator: Simulator):
    points = simulator.sweep(state_from_label("R"), np.linspace(-50.0, 50.0, 5))

    path = simulator.outputs[0]
    rows = read_csv(path)
    assert os.path.basename(path) == "sweep.csv"
    assert list(rows[0]) == ["z_um", "counts_d2", "counts_d2star"]
    assert [int(r["counts_d2"]) for r in rows] == [p["counts_d2"] for p in points]
    assert rows[2]["z_um"] == "0.000000"


def test_tomo_exact_pure_output(simulator: Simulator):
    result = simulator.tomo("plus", counts_per_basis=10**4, exact=True, visibility=1.0)

    with open(result["matrix_path"]) as f:
        payload = json.load(f)
    assert payload["basis"] == ["phi", "phi_perp"]
    assert np.allclose(matrix_from_json(payload).entries, np.diag([1, 0]), atol=1e-9)
    assert result["fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert simulator.outputs == [result["matrix_path"], result["counts_path"]]


def test_tomo_calibrated_fidelities(simulator: Simulator):
    reports = [simulator.tomo(label, bootstrap_n=100) for label in ("H", "plus", "R")]

    assert reports[0]["fidelity"] == pytest.approx(0.98, abs=0.02)
    assert reports[1]["fidelity"] == pytest.approx(0.78, abs=0.02)
    assert reports[2]["fidelity"] == pytest.approx(0.76, abs=0.02)
    assert simulator.tomo_average(reports) == pytest.approx(0.84, abs=0.02)


def test_tomo_exact_matches_calibration(simulator: Simulator):
    result = simulator.tomo("R", exact=True, bootstrap_n=100)

    assert result["visibility"] == pytest.approx(0.52)
    assert result["fidelity"] == pytest.approx(0.76, abs=1e-12)


def test_tomo_forced_visibility_ignores_mode_overlap(tmp_path):
    simulator = Simulator(out_dir=str(tmp_path), config=ExperimentConfig(z_um=30.0))

    result = simulator.tomo("R", exact=True, visibility=1.0, bootstrap_n=100)

    with open(result["matrix_path"]) as f:
        payload = json.load(f)
    assert result["visibility"] == 1.0
    assert np.allclose(matrix_from_json(payload).entries, np.diag([1, 0]), atol=1e-9)


@pytest.mark.parametrize("given_label", ["H", "plus", "R"])
def test_heralded_states_recover_target_within_two_sigma(given_label: str):
    config = ExperimentConfig()
    phi = state_from_label(given_label)
    rho = heralded_output_state(phi, effective_visibility(phi, config, 0.0))
    target = MEASURED_FIDELITY_TARGETS[given_label]

    inside = 0
    for index in range(60):
        records = simulate_records(rho, 10**4, derive_rng(3, "tomography", index))
        estimate, sigma = fidelity_with_error(
            records, phi, 100, derive_rng(3, "bootstrap", index)
        )
        inside += abs(estimate - target) < 2 * sigma

    # about 95% of runs land within 2 sigma, 51 of 60 sits 3.5 sd below that
    assert inside >= 51


def test_tomo_should_raise_with_few_counts(simulator: Simulator):
    with pytest.raises(ValueError):
        simulator.tomo("H", counts_per_basis=50)


def test_bound_report(simulator: Simulator):
    result = simulator.bound(10**5)

    assert result["estimate"] == pytest.approx(2 / 3, abs=0.006)
    assert result["exact"] == pytest.approx(2 / 3)
    assert result["separated"]
    assert os.path.basename(simulator.outputs[-1]) == "bound.json"


def test_manifest_lists_outputs(simulator: Simulator, tmp_path):
    simulator.bound(10**4)

    result = simulator.write_manifest("cloneflip bound --trials 10000")

    with open(os.path.join(str(tmp_path), "manifest.json")) as f:
        assert json.load(f) == result
    assert result["master_seed"] == 42
    assert result["config_path"] is None
    assert result["outputs"] == simulator.outputs
    assert result["versions"].startswith("cloneflip")


def test_outputs_are_reproducible(tmp_path):
    contents = []
    for name, workers in (("first", 1), ("second", 4)):
        simulator = Simulator(master_seed=9, out_dir=str(tmp_path / name), workers=workers)
        simulator.sweep(state_from_label("plus"), np.linspace(-40.0, 40.0, 9))
        simulator.tomo("H", counts_per_basis=1000, bootstrap_n=100)
        files = []
        for path in simulator.outputs:
            with open(path, "rb") as f:
                files.append(f.read())
        contents.append(files)

    assert contents[0] == contents[1]
