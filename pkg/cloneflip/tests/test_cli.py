import json
import logging
import os
import re
from typing import Tuple

import pytest

from cloneflip.cli import main, parse_state_spec
from cloneflip.constants import EXIT_INVARIANT, EXIT_OK, EXIT_USAGE
from cloneflip.errors import InvariantViolation, StateDomainError
from cloneflip.modules.qstate import state_fidelity, state_from_label
from cloneflip.simulator import Simulator


def run(capsys, *argv) -> Tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def out_dir(tmp_path) -> str:
    return str(tmp_path / "run")


@pytest.fixture
def bright_config(tmp_path) -> str:
    path = tmp_path / "bright.conf"
    path.write_text("mean_fourfold_rate = 1e7\n")
    return str(path)


def test_parse_state_spec_labels_and_angles():
    label, phi = parse_state_spec("bloch:1.5707963267948966,0")

    assert label == "bloch:1.5707963267948966,0"
    assert state_fidelity(phi, state_from_label("plus")) == pytest.approx(1.0, abs=1e-12)
    assert parse_state_spec("minus")[0] == "minus"


@pytest.mark.parametrize("given_spec", ["bloch:1", "bloch:a,b", "bloch:nan,0", "D"])
def test_parse_state_spec_should_raise_when_malformed(given_spec: str):
    with pytest.raises(StateDomainError):
        parse_state_spec(given_spec)


def test_ideal_reports_closed_form_values(capsys, out_dir: str):
    code, out = run(capsys, "--out-dir", out_dir, "ideal", "--state", "R")

    assert code == EXIT_OK
    assert "restored F = 1.000000" in out
    assert "clone F = 0.833333" in out
    assert "anticlone flip F = 0.666667" in out
    assert "PsiMinus 0.000000" in out


def test_ideal_bloch_pole_matches_h(capsys, out_dir: str):
    _, pole = run(capsys, "--out-dir", out_dir, "ideal", "--state", "bloch:0,0")
    _, label = run(capsys, "--out-dir", out_dir, "ideal", "--state", "H")

    assert pole.splitlines()[1:] == label.splitlines()[1:]


def test_ideal_plus_clone_fidelity(capsys, out_dir: str):
    code, out = run(capsys, "--out-dir", out_dir, "ideal", "--state", "plus")

    assert code == EXIT_OK
    assert "clone F = 0.833333" in out


@pytest.mark.parametrize(
    "given_argv",
    [
        ["ideal", "--state", "bloch:1"],
        ["ideal", "--state", "X"],
        ["ideal"],
        [],
        ["--seed", "-1", "bound", "--trials", "10000"],
        ["tomo", "--state", "V"],
        ["tomo", "--state", "H", "--counts-per-basis", "50"],
        ["bound", "--trials", "100"],
        ["sweep", "--z-min", "10", "--z-max", "-10", "--steps", "5"],
        ["sweep", "--z-min", "-10", "--z-max", "10", "--steps", "1"],
    ],
)
def test_usage_errors_exit_with_usage_code(capsys, out_dir: str, given_argv):
    code = main(["--out-dir", out_dir] + given_argv)
    capsys.readouterr()

    assert code == EXIT_USAGE


def test_invariant_violation_exit_code(mocker, capsys, out_dir: str):
    mocker.patch.object(
        Simulator, "ideal", side_effect=InvariantViolation("clone_s", 0.8, 5 / 6)
    )

    code, _ = run(capsys, "--out-dir", out_dir, "ideal", "--state", "H")

    assert code == EXIT_INVARIANT


def test_config_errors_exit_with_usage_code(capsys, out_dir: str, tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("pump_power = 3\n")

    for config in (str(bad), str(tmp_path / "missing.conf")):
        code = main(
            ["--config", config, "--out-dir", out_dir, "sweep", "--z-min", "-1", "--z-max", "1", "--steps", "2"]
        )
        assert code == EXIT_USAGE


def test_sweep_peak_and_dip_at_zero(capsys, out_dir: str, bright_config: str):
    code, out = run(
        capsys,
        "--config", bright_config,
        "--out-dir", out_dir,
        "sweep", "--z-min", "-100", "--z-max", "100", "--steps", "21",
    )

    assert code == EXIT_OK
    assert "peak D2 at z = 0.000 um" in out
    assert "dip D2* at z = 0.000 um" in out
    with open(os.path.join(out_dir, "sweep.csv")) as f:
        lines = f.read().splitlines()
    assert lines[0] == "z_um,counts_d2,counts_d2star"
    assert len(lines) == 22


def test_sweep_turned_off_limit(capsys, out_dir: str, bright_config: str):
    code, _ = run(
        capsys,
        "--config", bright_config,
        "--out-dir", out_dir,
        "sweep", "--z-min", "-210", "--z-max", "210", "--steps", "2",
    )

    with open(os.path.join(out_dir, "sweep.csv")) as f:
        rows = [line.split(",") for line in f.read().splitlines()[1:]]
    counts = [int(value) for row in rows for value in row[1:]]
    spread = max(counts) - min(counts)
    assert code == EXIT_OK
    # Poisson sd at 5e6 counts is 2236
    assert spread < 8 * 2236


def test_tomo_single_state(capsys, out_dir: str):
    code, out = run(
        capsys, "--out-dir", out_dir, "tomo", "--state", "H", "--bootstrap-n", "100"
    )

    assert code == EXIT_OK
    match = re.search(r"F_H = ([0-9.]+) \+/- ([0-9.]+)", out)
    assert float(match.group(1)) == pytest.approx(0.98, abs=0.02)
    assert os.path.exists(os.path.join(out_dir, "tomo_H.json"))
    assert os.path.exists(os.path.join(out_dir, "tomo_H_counts.csv"))


def test_tomo_exact_with_unit_visibility(capsys, out_dir: str):
    code, _ = run(
        capsys,
        "--out-dir", out_dir,
        "tomo", "--state", "R", "--exact", "--visibility", "1", "--bootstrap-n", "100",
    )

    with open(os.path.join(out_dir, "tomo_R.json")) as f:
        entries = json.load(f)["entries"]
    assert code == EXIT_OK
    assert entries[0][0] == pytest.approx([1.0, 0.0], abs=1e-9)
    assert entries[1][1] == pytest.approx([0.0, 0.0], abs=1e-9)


def test_tomo_all_prints_average_and_separation(capsys, out_dir: str):
    code, out = run(
        capsys, "--out-dir", out_dir, "tomo", "--state", "all", "--bootstrap-n", "100"
    )

    average = float(re.search(r"average F = ([0-9.]+)", out).group(1))
    assert code == EXIT_OK
    assert average == pytest.approx(0.84, abs=0.02)
    assert "separation: PASS" in out


def test_bound_prints_separation(capsys, out_dir: str):
    code, out = run(capsys, "--out-dir", out_dir, "bound", "--trials", "10000")

    assert code == EXIT_OK
    assert "exact bound = 0.666667" in out
    assert "separation: PASS" in out


def test_manifest_is_written(capsys, out_dir: str):
    run(capsys, "--seed", "5", "--workers", "2", "--out-dir", out_dir, "bound", "--trials", "10000")

    with open(os.path.join(out_dir, "manifest.json")) as f:
        manifest = json.load(f)
    assert manifest["master_seed"] == 5
    assert manifest["command"] == "cloneflip --seed 5 --out-dir {} bound --trials 10000".format(out_dir)
    assert manifest["outputs"] == [os.path.join(out_dir, "bound.json")]


@pytest.mark.parametrize(
    "given_command",
    [
        ["sweep", "--z-min", "-60", "--z-max", "60", "--steps", "7"],
        ["tomo", "--state", "all", "--counts-per-basis", "1000", "--bootstrap-n", "100"],
        ["bound", "--trials", "20000"],
    ],
)
def test_outputs_are_byte_identical(capsys, tmp_path, given_command):
    outputs = []
    for name, workers in (("a", "1"), ("b", "1"), ("c", "4")):
        out_dir = str(tmp_path / name)
        assert main(["--seed", "17", "--workers", workers, "--out-dir", out_dir] + given_command) == EXIT_OK
        files = {}
        for file_name in sorted(os.listdir(out_dir)):
            if file_name == "manifest.json":
                continue
            with open(os.path.join(out_dir, file_name), "rb") as f:
                files[file_name] = f.read()
        outputs.append(files)
    capsys.readouterr()

    assert outputs[0] == outputs[1] == outputs[2]


def test_verbose_switches_to_debug(mocker, capsys, out_dir: str):
    basic_config = mocker.patch("cloneflip.cli.logging.basicConfig")

    run(capsys, "--verbose", "--out-dir", out_dir, "ideal", "--state", "H")

    assert basic_config.call_args.kwargs["level"] == logging.DEBUG
