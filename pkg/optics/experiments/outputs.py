import csv
import logging
import os
from typing import List, Sequence

import matplotlib
from matplotlib.figure import Figure

from .base import SweepResult

logger = logging.getLogger(__name__)

CSV_HEADER = ["noise_level", "median", "mean", "q25", "q75", "failures"]
PLOT_SALT = "catavp"


def _number(value: float) -> str:
    return "%.12g" % value


def write_csv(result: SweepResult, path: str):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in result.rows:
            writer.writerow(
                [
                    _number(row.noise_level),
                    _number(row.median),
                    _number(row.mean),
                    _number(row.q25),
                    _number(row.q75),
                    row.failures,
                ]
            )


def write_plot(results: Sequence[SweepResult], path: str):
    """Median error against noise level, one series per rig with its
    interquartile band"""
    with matplotlib.rc_context({"svg.hashsalt": PLOT_SALT, "svg.fonttype": "none"}):
        figure = Figure(figsize=(6, 4))
        axes = figure.add_subplot()
        for result in results:
            levels = [row.noise_level for row in result.rows]
            axes.plot(
                levels,
                [row.median for row in result.rows],
                marker="o",
                label=result.config.label,
            )
            axes.fill_between(
                levels,
                [row.q25 for row in result.rows],
                [row.q75 for row in result.rows],
                alpha=0.2,
            )
        if results:
            first = results[0]
            axes.set_title(str(first.experiment.label))
            axes.set_xlabel(str(first.config.noise_kind.label))
        axes.set_ylabel("error")
        axes.grid(True, alpha=0.3)
        if any(result.rows for result in results):
            axes.legend()
        figure.savefig(path, format="svg", metadata={"Date": None})


def emit_outputs(results: Sequence[SweepResult], output_dir: str) -> List[str]:
    """
    Write <experiment>_<rig>.csv for every result and one <experiment>.svg
    plotting all of them. Returns the written paths.
    """
    os.makedirs(output_dir, exist_ok=True)
    paths = []
    for result in results:
        path = os.path.join(
            output_dir, "%s_%s.csv" % (result.experiment.value, result.config.label)
        )
        write_csv(result, path)
        paths.append(path)
    if results:
        path = os.path.join(output_dir, "%s.svg" % results[0].experiment.value)
        write_plot(results, path)
        paths.append(path)
    for path in paths:
        logger.info("Wrote %s", path)
    return paths
