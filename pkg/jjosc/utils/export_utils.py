import csv
import os
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from jjosc.utils.constants import SIGNIFICANT_DIGITS
from jjosc.utils.version_utils import get_numpy_version_info, get_version


def _ensure_parent(filepath: str) -> None:
    os.makedirs(
        os.path.dirname(filepath) if os.path.dirname(filepath) else ".", exist_ok=True
    )


def format_number(value: Any) -> str:
    """
    Render a value for CSV and meta files.

    Floats are written positionally with SIGNIFICANT_DIGITS significant digits and
    trailing zeros trimmed; integers and booleans as integers; anything else with str().
    """
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return np.format_float_positional(
            float(value),
            precision=SIGNIFICANT_DIGITS,
            unique=False,
            fractional=False,
            trim="-",
        )
    return str(value)


def export_columns_to_csv(columns: Mapping[str, Sequence[Any]], filepath: str) -> None:
    """
    Export equal-length named columns to a CSV file

    Args:
        columns: Column name to values, in output order
        filepath: Path where the CSV file should be saved
    """
    lengths = {name: len(values) for name, values in columns.items()}
    if len(set(lengths.values())) > 1:
        raise ValueError(f"columns have different lengths: {lengths}")
    _ensure_parent(filepath)

    with open(filepath, "w", newline="", encoding="utf-8") as csvfile:
        writer = csv.writer(csvfile, lineterminator="\n")
        writer.writerow(list(columns))
        for row in zip(*columns.values()):
            writer.writerow([format_number(value) for value in row])


def export_trajectory_to_csv(traj, filepath: str) -> None:
    """
    Export a simulated trajectory as t,x1,x2,u,y (plus v for closed loops)

    Args:
        traj: The Trajectory to write
        filepath: Path where the CSV file should be saved
    """
    export_columns_to_csv(traj.columns(), filepath)


def export_tracking_to_csv(
    traj, y_d: Sequence[float], filepath: str, include_v: bool = True
) -> None:
    """
    Export a closed-loop trajectory next to its reference output

    Writes t,x1,x2,u,y[,v],y_d. The reference is cut to the trajectory length so a
    truncated run still lines up sample for sample.

    Args:
        traj: The closed-loop Trajectory
        y_d: Reference model output
        filepath: Path where the CSV file should be saved
        include_v: Whether to write the reference input column
    """
    columns = traj.columns()
    if not include_v:
        columns.pop("v", None)
    columns["y_d"] = np.asarray(y_d, dtype=float)[: len(traj)]
    export_columns_to_csv(columns, filepath)


def export_taylor_to_csv(comparison, filepath: str) -> None:
    """
    Export a nonlinear/linearized comparison as t,u,x1,x2,z1,z2,y,y0,y_l

    Args:
        comparison: A TaylorComparison
        filepath: Path where the CSV file should be saved
    """
    nonlinear, linear = comparison.nonlinear, comparison.linear
    export_columns_to_csv(
        {
            "t": nonlinear.t,
            "u": nonlinear.u,
            "x1": nonlinear.x1,
            "x2": nonlinear.x2,
            "z1": linear.x1,
            "z2": linear.x2,
            "y": nonlinear.y,
            "y0": comparison.y0,
            "y_l": comparison.y_l,
        },
        filepath,
    )


def export_pairs_to_csv(
    pairs: Iterable[Tuple[float, float]], header: Tuple[str, str], filepath: str
) -> None:
    """Export (x, f(x)) pairs, e.g. the omega0 curve or a magnitude sweep."""
    pairs = list(pairs)
    export_columns_to_csv(
        {header[0]: [a for a, _ in pairs], header[1]: [b for _, b in pairs]}, filepath
    )


def export_training_log_to_csv(history, filepath: str) -> None:
    """
    Export the search history as eval,J_best,J_candidate,accepted

    Args:
        history: TrainingRecord sequence, initial point first
        filepath: Path where the CSV file should be saved
    """
    export_columns_to_csv(
        {
            "eval": [r.eval for r in history],
            "J_best": [r.j_best for r in history],
            "J_candidate": [r.j_candidate for r in history],
            "accepted": [r.accepted for r in history],
        },
        filepath,
    )


def export_meta(entries: Sequence[Tuple[str, Any]], filepath: str) -> None:
    """
    Write `key = value` lines, package and numpy versions first

    No timestamps are written, so identical runs give identical files.

    Args:
        entries: Ordered (key, value) pairs
        filepath: Path where the meta file should be saved
    """
    _ensure_parent(filepath)
    numpy_version, float_type = get_numpy_version_info()
    lines: List[Tuple[str, Any]] = [
        ("jjosc", get_version()),
        ("numpy", numpy_version),
        ("float", float_type),
    ]
    lines.extend(entries)
    with open(filepath, "w", encoding="utf-8", newline="\n") as txtfile:
        for key, value in lines:
            txtfile.write(f"{key} = {format_number(value)}\n")


def export_gnuplot_script(
    csv_path: str, columns: Sequence[str], filepath: str, title: str = ""
) -> None:
    """
    Write a gnuplot script plotting every CSV column against the first one

    Args:
        csv_path: The CSV file the script reads
        columns: Header of that CSV file
        filepath: Path where the script should be saved
        title: Plot title
    """
    _ensure_parent(filepath)
    data = os.path.basename(csv_path)
    series: Dict[int, str] = {i + 1: name for i, name in enumerate(columns)}
    plots = [
        f"'{data}' using 1:{index} with lines title '{name}'"
        for index, name in series.items()
        if index > 1
    ]
    with open(filepath, "w", encoding="utf-8", newline="\n") as gpfile:
        gpfile.write("set datafile separator ','\n")
        gpfile.write("set key autotitle columnhead\n")
        gpfile.write(f"set title '{title}'\n")
        gpfile.write(f"set xlabel '{columns[0]}'\n")
        gpfile.write("set grid\n")
        gpfile.write("plot " + ", \\\n     ".join(plots) + "\n")
        gpfile.write("pause mouse close\n")
