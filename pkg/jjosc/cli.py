import argparse
import logging
import os
import sys
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from jjosc.circuit import gamma
from jjosc.exceptions import CircuitError, ScenarioError, SingularityError
from jjosc.feedback_linearization import max_tracking_error, reference_response, run_exact_fl
from jjosc.neural_controller import save_vector
from jjosc.scenario import TRAINING_MODES, Scenario, load_scenario
from jjosc.simulation import simulate_nonlinear
from jjosc.taylor import frequency_response, linearize, natural_frequency_curve, taylor_compare
from jjosc.trainer import closed_loop, reference_output, train
from jjosc.utils.constants import OUTPUT_DIR_ENV
from jjosc.utils.export_utils import (
    export_gnuplot_script,
    export_meta,
    export_pairs_to_csv,
    export_taylor_to_csv,
    export_tracking_to_csv,
    export_training_log_to_csv,
    export_trajectory_to_csv,
)
from jjosc.utils.version_utils import get_numpy_version_info, get_version

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

Results = List[Tuple[str, Any]]

CSV_COLUMNS = {
    "simulate": ["t", "x1", "x2", "u", "y"],
    "taylor-compare": ["t", "u", "x1", "x2", "z1", "z2", "y", "y0", "y_l"],
    "omega0-curve": ["x_bar1", "omega0"],
    "frequency-response": ["omega", "magnitude"],
    "exact-fl": ["t", "x1", "x2", "u", "y", "y_d"],
    "train-nn": ["t", "x1", "x2", "u", "y", "v", "y_d"],
    "train-linear": ["t", "x1", "x2", "u", "y", "v", "y_d"],
    "replay": ["t", "x1", "x2", "u", "y", "v", "y_d"],
}


def resolve_prefix(scenario: Scenario, out: Optional[str] = None) -> str:
    """
    Output prefix for a run: --out over the scenario's `output`, relative prefixes
    taken from $JJOSC_OUTPUT_DIR (default: the working directory).
    """
    prefix = out if out else scenario.output
    if os.path.isabs(prefix):
        return prefix
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), prefix)


def _run_simulate(s: Scenario, prefix: str) -> Results:
    try:
        traj = simulate_nonlinear(s.circuit, s.sim, s.drive)
    except CircuitError as err:
        if err.trajectory is not None:
            export_trajectory_to_csv(err.trajectory, prefix + ".csv")
        raise
    export_trajectory_to_csv(traj, prefix + ".csv")
    return [
        ("max_abs_x1", float(np.max(np.abs(traj.x1)))),
        ("y_final", float(traj.y[-1])),
    ]


def _run_taylor_compare(s: Scenario, prefix: str) -> Results:
    try:
        comparison = taylor_compare(s.circuit, s.sim, s.drive)
    except CircuitError as err:
        if err.trajectory is not None:
            export_trajectory_to_csv(err.trajectory, prefix + ".csv")
        raise
    export_taylor_to_csv(comparison, prefix + ".csv")
    m = comparison.model
    return [
        ("u_bar", m.u_bar),
        ("x_bar1", m.x_bar1),
        ("c11", m.c11),
        ("k0", m.k0),
        ("omega0", m.omega0),
        ("omega_nonlinear", comparison.omega_nonlinear),
        ("omega_linear", comparison.omega_linear),
        ("max_state_error", comparison.max_state_error),
    ]


def _run_omega0_curve(s: Scenario, prefix: str) -> Results:
    curve = natural_frequency_curve(s.circuit, s.grid)
    export_pairs_to_csv(curve, ("x_bar1", "omega0"), prefix + ".csv")
    omegas = [omega for _, omega in curve]
    return [("omega0_min", min(omegas)), ("omega0_max", max(omegas))]


def _run_frequency_response(s: Scenario, prefix: str) -> Results:
    m = linearize(s.circuit, s.u_bar)
    response = frequency_response(m, s.grid)
    export_pairs_to_csv(response, ("omega", "magnitude"), prefix + ".csv")
    return [
        ("omega0", m.omega0),
        ("k0", m.k0),
        ("skipped_resonance_samples", len(s.grid) - len(response)),
    ]


def _run_exact_fl(s: Scenario, prefix: str) -> Results:
    y_d = reference_response(s.circuit, s.sim, s.reference, s.drive)
    try:
        traj, _ = run_exact_fl(s.circuit, s.sim, s.reference, s.drive, y_d)
    except CircuitError as err:
        if err.trajectory is not None:
            export_tracking_to_csv(err.trajectory, y_d, prefix + ".csv", include_v=False)
        raise
    export_tracking_to_csv(traj, y_d, prefix + ".csv", include_v=False)
    return [("tau", s.reference.tau), ("max_tracking_error", max_tracking_error(traj, y_d))]


def _write_closed_loop(s: Scenario, params: np.ndarray, prefix: str) -> Results:
    controller = s.family.controller(params)
    y_d = reference_output(s.circuit, s.train)
    try:
        traj, _ = closed_loop(s.circuit, s.train, controller, y_d)
    except CircuitError as err:
        if err.trajectory is not None:
            export_tracking_to_csv(err.trajectory, y_d, prefix + ".csv")
        raise
    export_tracking_to_csv(traj, y_d, prefix + ".csv")
    return [
        ("J", float(np.sum((y_d - traj.y) ** 2))),
        ("max_abs_u", float(np.max(np.abs(traj.u)))),
        ("max_tracking_error", max_tracking_error(traj, y_d)),
    ]


def _run_training(s: Scenario, prefix: str) -> Results:
    result = train(s.circuit, s.train, s.family, s.params)
    export_training_log_to_csv(result.history, prefix + "_log.csv")
    save_vector(result.params, prefix + "_params.txt")
    print(f"Training finished: J = {result.j_best:.6g} ({len(result.history)} evaluations)")
    results: Results = [
        ("J_initial", result.j_initial),
        ("J_best", result.j_best),
        ("evaluations", len(result.history)),
        ("accepted", sum(1 for r in result.history[1:] if r.accepted)),
        ("final_step_scale", result.step_scale),
        ("params_file", os.path.basename(prefix + "_params.txt")),
    ]
    return results + _write_closed_loop(s, result.params, prefix)


def _run_replay(s: Scenario, prefix: str) -> Results:
    results = _write_closed_loop(s, s.params, prefix)
    print(f"Replay: J = {dict(results)['J']:.6g}")
    return results


RUNNERS = {
    "simulate": _run_simulate,
    "taylor-compare": _run_taylor_compare,
    "omega0-curve": _run_omega0_curve,
    "frequency-response": _run_frequency_response,
    "exact-fl": _run_exact_fl,
    "train-nn": _run_training,
    "train-linear": _run_training,
    "replay": _run_replay,
}


def run_scenario(scenario: Scenario, prefix: str, plot: bool = False) -> int:
    """
    Execute a loaded scenario and write its outputs next to `prefix`.

    Args:
        scenario: The resolved scenario.
        prefix: Output path prefix, without extension.
        plot: Also write a gnuplot script for the CSV.

    Returns:
        int: EXIT_OK, or EXIT_RUNTIME when the run stopped on a circuit error (the CSV
            then holds the samples produced before the failure).
    """
    status = "ok"
    results: Results = []
    try:
        results = RUNNERS[scenario.mode](scenario, prefix)
    except SingularityError as err:
        status = f"singular: {err}"
    except CircuitError as err:
        status = f"domain: {err}"

    entries: Results = [("seed", scenario.seed), ("gamma", gamma(scenario.circuit))]
    entries += scenario.echo
    entries += [("status", status)]
    entries += [(key, "none" if value is None else value) for key, value in results]
    export_meta(entries, prefix + ".meta")
    logger.info("wrote %s.csv and %s.meta (status %s)", prefix, prefix, status)
    if plot and os.path.exists(prefix + ".csv"):
        export_gnuplot_script(
            prefix + ".csv", CSV_COLUMNS[scenario.mode], prefix + ".gp", title=scenario.mode
        )

    if status != "ok":
        print(f"Error: {status}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"Results exported to {prefix}.csv")
    if scenario.mode in TRAINING_MODES:
        print(f"Training log exported to {prefix}_log.csv")
    return EXIT_OK


class VersionAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        numpy_version, float_type = get_numpy_version_info()
        print(f"jjosc v{get_version()}")
        print(f"numpy v{numpy_version} ({float_type})")
        parser.exit(0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jjosc",
        description="Simulate and control a Josephson-junction LC oscillator.",
    )
    parser.add_argument(
        "--version",
        action=VersionAction,
        nargs=0,
        help="Show version information and exit",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario file and export its results")
    run.add_argument("scenario", type=str, help="Path to a .scn scenario file")
    run.add_argument("--seed", type=int, help="Override the scenario's search seed")
    run.add_argument("--out", type=str, help="Override the output path prefix")
    run.add_argument(
        "--plot", action="store_true", help="Also write a gnuplot script for the CSV"
    )
    run.add_argument("--verbose", action="store_true", help="Log progress to stderr")

    validate = commands.add_parser("validate", help="Check a scenario file and exit")
    validate.add_argument("scenario", type=str, help="Path to a .scn scenario file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        scenario = load_scenario(args.scenario, seed=getattr(args, "seed", None))
    except (OSError, ScenarioError) as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"{args.scenario}: valid {scenario.mode} scenario")
        return EXIT_OK

    prefix = resolve_prefix(scenario, args.out)
    try:
        return run_scenario(scenario, prefix, plot=args.plot)
    except OSError as e:
        logger.exception("cannot write outputs for %s", prefix)
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
