"""
Command-line front end: ideal runs, Z sweeps, tomography and the classical
bound, each writing its data files and a run manifest to --out-dir.
"""
import argparse
import logging
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cloneflip.constants import (
    CLASSICAL_BOUND,
    DEFAULT_BOOTSTRAP_N,
    DEFAULT_BOUND_TRIALS,
    DEFAULT_COUNTS_PER_BASIS,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_USAGE,
    MEASURED_STATES,
    STATE_ALL,
    STATE_BLOCH_PREFIX,
    STATE_R,
    TOOL_VERSION,
)
from cloneflip.errors import ConfigError, InvariantViolation, ProtocolError, StateDomainError
from cloneflip.modules.emulator import separation
from cloneflip.modules.qstate import PureState, state_from_angles, state_from_label
from cloneflip.simulator import Simulator

logger = logging.getLogger(__name__)


def parse_state_spec(text: str) -> Tuple[str, PureState]:
    """
    `H`, `V`, `plus`, `minus`, `R`, `L` or `bloch:theta,phi` in radians.

    :raises: StateDomainError
    """
    if text.startswith(STATE_BLOCH_PREFIX):
        angles = text[len(STATE_BLOCH_PREFIX):].split(",")
        if len(angles) != 2:
            raise StateDomainError(
                "Expected bloch:theta,phi, got {}".format(text)
            )
        try:
            theta, phi = (float(a) for a in angles)
        except ValueError:
            raise StateDomainError("Bloch angles in {} are not numbers".format(text))
        if not (np.isfinite(theta) and np.isfinite(phi)):
            raise StateDomainError("Bloch angles in {} are not finite".format(text))
        return text, state_from_angles(theta, phi)
    return text, state_from_label(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloneflip",
        description="Cloning, flipping and LOCC restoring of a polarization qubit",
    )
    parser.add_argument("--version", action="version", version=TOOL_VERSION)
    parser.add_argument(
        "--seed", type=int, default=DEFAULT_SEED, help="Master seed for every random stream"
    )
    parser.add_argument("--config", default=None, help="Key-value experiment config file")
    parser.add_argument("--out-dir", default=".", help="Directory for data files")
    parser.add_argument(
        "--workers", type=int, default=DEFAULT_WORKERS, help="Threads for trial loops"
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")

    subparsers = parser.add_subparsers(dest="command", required=True)

    ideal = subparsers.add_parser("ideal", help="Noiseless clone and restore")
    ideal.add_argument("--state", required=True)

    sweep = subparsers.add_parser("sweep", help="Coincidences versus mirror position Z")
    sweep.add_argument("--z-min", type=float, required=True, help="um")
    sweep.add_argument("--z-max", type=float, required=True, help="um")
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--state", default=STATE_R)

    tomo = subparsers.add_parser("tomo", help="Tomography of the restored qubit")
    tomo.add_argument("--state", required=True, choices=list(MEASURED_STATES) + [STATE_ALL])
    tomo.add_argument("--counts-per-basis", type=int, default=DEFAULT_COUNTS_PER_BASIS)
    tomo.add_argument("--bootstrap-n", type=int, default=DEFAULT_BOOTSTRAP_N)
    tomo.add_argument(
        "--exact", action="store_true", help="Use expected counts instead of sampling"
    )
    tomo.add_argument(
        "--visibility",
        type=float,
        default=None,
        help="Force v, ignoring the mode overlap at the configured z_um",
    )

    bound = subparsers.add_parser("bound", help="Measure-and-prepare benchmark")
    bound.add_argument("--trials", type=int, default=DEFAULT_BOUND_TRIALS)

    return parser


# ============ Commands ============
def cmd_ideal(simulator: Simulator, args: argparse.Namespace) -> int:
    label, phi = parse_state_spec(args.state)
    report = simulator.ideal(phi)

    print("state: {}".format(label))
    print("clone F = {:.6f}".format(report["clone_fidelity"]))
    print("anticlone flip F = {:.6f}".format(report["flip_fidelity"]))
    print(
        "Bell probabilities: {}".format(
            ", ".join(
                "{} {:.6f}".format(name, p)
                for name, p in report["bell_probabilities"].items()
            )
        )
    )
    print("outcome: {}".format(report["outcome"].value))
    print("restored F = {:.6f}".format(report["restored_fidelity"]))
    return EXIT_OK


def cmd_sweep(simulator: Simulator, args: argparse.Namespace) -> int:
    if not args.z_min < args.z_max:
        raise ValueError("--z-min must be below --z-max")
    if args.steps < 2:
        raise ValueError("--steps must be at least 2, got {}".format(args.steps))
    label, phi = parse_state_spec(args.state)

    z_grid = np.linspace(args.z_min, args.z_max, args.steps)
    points = simulator.sweep(phi, z_grid)

    peak = max(points, key=lambda p: p["counts_d2"])
    dip = min(points, key=lambda p: p["counts_d2star"])
    print("state: {}".format(label))
    print("peak D2 at z = {:.3f} um ({} counts)".format(peak["z_um"], peak["counts_d2"]))
    print(
        "dip D2* at z = {:.3f} um ({} counts)".format(dip["z_um"], dip["counts_d2star"])
    )
    return EXIT_OK


def cmd_tomo(simulator: Simulator, args: argparse.Namespace) -> int:
    labels = list(MEASURED_STATES) if args.state == STATE_ALL else [args.state]
    reports = [
        simulator.tomo(
            label,
            counts_per_basis=args.counts_per_basis,
            bootstrap_n=args.bootstrap_n,
            exact=args.exact,
            visibility=args.visibility,
        )
        for label in labels
    ]
    for report in reports:
        print(
            "F_{} = {:.4f} +/- {:.4f}".format(
                report["state"], report["fidelity"], report["sigma"]
            )
        )
    if len(reports) == 1:
        return EXIT_OK

    average = simulator.tomo_average(reports)
    print("average F = {:.4f}".format(average))
    separated = separation(CLASSICAL_BOUND, [average] + [r["fidelity"] for r in reports])
    print("separation: {}".format("PASS" if separated else "FAIL"))
    return EXIT_OK if separated else EXIT_INVARIANT


def cmd_bound(simulator: Simulator, args: argparse.Namespace) -> int:
    report = simulator.bound(args.trials)
    print("measure-and-prepare F = {:.6f} ({} trials)".format(report["estimate"], report["trials"]))
    print("exact bound = {:.6f}".format(report["exact"]))
    print("separation: {}".format("PASS" if report["separated"] else "FAIL"))
    return EXIT_OK if report["separated"] else EXIT_INVARIANT


COMMANDS = {
    "ideal": cmd_ideal,
    "sweep": cmd_sweep,
    "tomo": cmd_tomo,
    "bound": cmd_bound,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return EXIT_OK if error.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    simulator = Simulator(
        master_seed=args.seed,
        config_path=args.config,
        out_dir=args.out_dir,
        workers=args.workers,
    )
    try:
        code = COMMANDS[args.command](simulator, args)
    except (InvariantViolation, ProtocolError) as error:
        logger.error("{}".format(error))
        return EXIT_INVARIANT
    except (ConfigError, ValueError) as error:
        logger.error("{}".format(error))
        return EXIT_USAGE

    simulator.write_manifest(" ".join(["cloneflip"] + _command_line(argv)))
    return code


def _command_line(argv: List[str]) -> List[str]:
    # --workers and --verbose leave the manifest unchanged
    result: List[str] = []
    skip = False
    for token in argv:
        if skip:
            skip = False
            continue
        if token == "--workers":
            skip = True
            continue
        if token.startswith("--workers=") or token == "--verbose":
            continue
        result.append(token)
    return result


if __name__ == "__main__":
    sys.exit(main())
