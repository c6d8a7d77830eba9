"""Experiment artifacts

Writers walk an ExperimentResult group by group, like the model walkers
of a code generator: pre_run(), begin_group()/end_group() per consumer
group, post_run(). Each writer produces one kind of artifact in the
output directory.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

import csv
import logging
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import crc
import json5
import lxml.etree as ET
import numpy as np

from adaptrust.datamodel import UG_MAX, UG_MIN, Group
from adaptrust.engine import InteractionRecord
from adaptrust.errors import ArtifactError
from adaptrust.experiments import (
    Comparison, ExperimentResult, GroupSeries, group_comparisons, phase_comparisons
)

INTERACTION_HEADER = (
    "experiment", "run", "round", "consumer", "group", "interaction_index", "model_used", "served", "ug")
SERIES_HEADER = ("experiment", "group", "interaction_index", "mean_ug", "n")
MODE_SHARE_HEADER = ("experiment", "round", "push_share", "n")

SERIES_FILE = "series.csv"
CHART_FILE = "ug_chart.svg"
MODE_SHARE_FILE = "mode_share.csv"
MODE_SHARE_CHART_FILE = "mode_share.svg"
SUMMARY_FILE = "summary.json"
CHECKSUM_FILE = "checksums.crc"

DEFAULT_SMOOTH = 10

GROUP_COLORS = {
    Group.FIRE: "#d62728",
    Group.CA: "#1f77b4",
    Group.ADAPTABLE: "#2ca02c",
}

# chart geometry in pixels
WIDTH = 800
HEIGHT = 480
PLOT_LEFT = 70
PLOT_RIGHT = 640
PLOT_TOP = 40
PLOT_BOTTOM = 420

SVG_NS = "http://www.w3.org/2000/svg"


def interaction_log_name(run: int) -> str:
    """File name of a run's interaction log."""
    return f"interactions_run{run:02d}.csv"


def _number(value: float) -> str:
    """Full precision, dot decimal separator."""
    return repr(float(value))


@contextmanager
def open_artifact(path: Path, mode: str = "w"):
    """Open an output file, turning I/O failures into ArtifactError."""

    try:
        with open(path, mode, encoding=None if "b" in mode else "utf-8",
                  newline=None if "b" in mode else "") as stream:
            yield stream
    except OSError as err:
        raise ArtifactError(path, err.strerror or str(err)) from err


def write_interactions(records: Iterable[InteractionRecord], path: Path, experiment: int) -> None:
    """Interaction log CSV, one row per consumer need."""

    with open_artifact(path) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(INTERACTION_HEADER)
        for r in records:
            writer.writerow((
                experiment, r.run, r.round, r.consumer, str(r.group), r.interaction_index,
                str(r.model_used), int(r.served), _number(r.ug)))


def write_series(series: Mapping[Group, GroupSeries], path: Path, experiment: int) -> None:
    """Per-index mean UG CSV; indices no run reached are left out."""

    with open_artifact(path) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        for group in Group:
            if group not in series:
                continue
            entry = series[group]
            for pos, (mean, count) in enumerate(zip(entry.means, entry.counts)):
                if count > 0:
                    writer.writerow((experiment, str(group), pos + 1, _number(mean), int(count)))


def write_csv(
        data: Union[Sequence[InteractionRecord], Mapping[Group, GroupSeries]],
        path: Path, experiment: int) -> None:
    """Write an interaction log or a group series mapping, depending on what is given."""

    if isinstance(data, Mapping):
        write_series(data, path, experiment)
    else:
        write_interactions(data, path, experiment)


def moving_average(values: Sequence[float], width: int) -> np.ndarray:
    """Trailing mean over up to width values, NaN entries ignored.

    width <= 1 returns the values unchanged.
    """

    values = np.asarray(values, dtype=float)
    if width <= 1 or len(values) == 0:
        return values.copy()

    valid = ~np.isnan(values)
    sums = np.concatenate(([0.0], np.cumsum(np.where(valid, values, 0.0))))
    counts = np.concatenate(([0], np.cumsum(valid)))
    upper = np.arange(1, len(values) + 1)
    lower = np.maximum(0, upper - width)

    window_sum = sums[upper] - sums[lower]
    window_n = counts[upper] - counts[lower]
    result = np.full(len(values), np.nan)
    np.divide(window_sum, window_n, out=result, where=window_n > 0)
    return result


def x_to_px(x: float, x_max: float) -> float:
    """Horizontal pixel of an x value in [1, x_max]."""

    if x_max <= 1:
        return (PLOT_LEFT + PLOT_RIGHT) / 2.0
    return PLOT_LEFT + (x - 1.0) * (PLOT_RIGHT - PLOT_LEFT) / (x_max - 1.0)


def y_to_px(y: float, y_range: Tuple[float, float] = (UG_MIN, UG_MAX)) -> float:
    """Vertical pixel of a y value, clipped to the plot area."""

    low, high = y_range
    y = min(high, max(low, y))
    return PLOT_BOTTOM - (y - low) * (PLOT_BOTTOM - PLOT_TOP) / (high - low)


def _px(value: float) -> str:
    return f"{value:.2f}"


def _sub(parent: ET.Element, tag: str, text: str = None, **attrs) -> ET.Element:
    element = ET.SubElement(parent, f"{{{SVG_NS}}}{tag}", {k.replace("_", "-"): v for k, v in attrs.items()})
    if text is not None:
        element.text = text
    return element


def _tick_positions(x_max: int, count: int = 5) -> List[int]:
    if x_max <= 1:
        return [1]
    return sorted({int(round(1 + i * (x_max - 1) / (count - 1))) for i in range(count)})


def render_lines(
        lines: Sequence[Tuple[str, str, Sequence[float]]], path: Path, title: str,
        x_label: str, y_label: str, y_range: Tuple[float, float] = (UG_MIN, UG_MAX),
        y_ticks: Sequence[float] = (-10, -5, 0, 5, 10), smooth: int = DEFAULT_SMOOTH) -> None:
    """Line chart of (label, color, values) series; values[i] is plotted at x = i + 1."""

    if not lines:
        raise ValueError("a chart needs at least one series")

    x_max = max(len(values) for _, _, values in lines)
    svg = ET.Element(f"{{{SVG_NS}}}svg", nsmap={None: SVG_NS}, attrib={
        "width": str(WIDTH), "height": str(HEIGHT), "viewBox": f"0 0 {WIDTH} {HEIGHT}"})

    _sub(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="#ffffff")
    _sub(svg, "text", title, x=_px(WIDTH / 2.0), y="24", text_anchor="middle", font_size="16",
         font_family="sans-serif")

    axes = _sub(svg, "g", id="axes", stroke="#000000", stroke_width="1")
    _sub(axes, "line", x1=str(PLOT_LEFT), y1=str(PLOT_TOP), x2=str(PLOT_LEFT), y2=str(PLOT_BOTTOM))
    _sub(axes, "line", x1=str(PLOT_LEFT), y1=str(PLOT_BOTTOM), x2=str(PLOT_RIGHT), y2=str(PLOT_BOTTOM))

    labels = _sub(svg, "g", id="labels", font_size="11", font_family="sans-serif")
    for tick in y_ticks:
        y = _px(y_to_px(tick, y_range))
        _sub(svg, "line", x1=str(PLOT_LEFT), y1=y, x2=str(PLOT_RIGHT), y2=y, stroke="#dddddd", stroke_width="1")
        _sub(labels, "text", f"{tick:g}", x=str(PLOT_LEFT - 8), y=y, text_anchor="end")
    for tick in _tick_positions(x_max):
        _sub(labels, "text", str(tick), x=_px(x_to_px(tick, x_max)), y=str(PLOT_BOTTOM + 16), text_anchor="middle")
    _sub(labels, "text", x_label, x=_px((PLOT_LEFT + PLOT_RIGHT) / 2.0), y=str(HEIGHT - 20), text_anchor="middle")
    _sub(labels, "text", y_label, x="16", y=_px((PLOT_TOP + PLOT_BOTTOM) / 2.0), text_anchor="middle",
         transform=f"rotate(-90 16 {_px((PLOT_TOP + PLOT_BOTTOM) / 2.0)})")

    data = _sub(svg, "g", id="series", fill="none", stroke_width="1.5")
    legend = _sub(svg, "g", id="legend", font_size="12", font_family="sans-serif")

    for pos, (label, color, values) in enumerate(lines):
        smoothed = moving_average(values, smooth)
        points = " ".join(
            f"{_px(x_to_px(i + 1, x_max))},{_px(y_to_px(v, y_range))}"
            for i, v in enumerate(smoothed) if not math.isnan(v))
        _sub(data, "polyline", points=points, stroke=color, **{"data-label": label})

        y = PLOT_TOP + 10 + pos * 20
        _sub(legend, "rect", x=str(PLOT_RIGHT + 20), y=str(y - 8), width="16", height="8", fill=color)
        _sub(legend, "text", label, x=str(PLOT_RIGHT + 42), y=str(y))

    ET.indent(svg, "  ")
    document = ET.tostring(svg, pretty_print=True, xml_declaration=True, encoding="utf-8")
    with open_artifact(path, "wb") as stream:
        stream.write(document)


def render_chart(
        series: Mapping[Group, GroupSeries], path: Path, smooth: int = DEFAULT_SMOOTH, title: str = "") -> None:
    """Mean UG per interaction index, one line per consumer group, y axis fixed to the UG range."""

    lines = [(str(group), GROUP_COLORS[group], series[group].means) for group in Group if group in series]
    render_lines(lines, path, title or "UG means per interaction", "interaction", "mean UG", smooth=smooth)


class ReportWriter:
    """Walker over an experiment result

    The run() method calls pre_run(), then begin_group()/end_group() for
    every consumer group in FIRE, CA, Adaptable order, then post_run().
    Derived classes override what they need.
    """

    def __init__(self, result: ExperimentResult, options: Dict[str, Any]):
        self.result = result
        self.options = options
        self.destdir: Path = options["DESTDIR"]

    @property
    def experiment(self) -> int:
        """Experiment id of the result."""
        return self.result.spec.ident

    def artifacts(self) -> List[Path]:
        """Files this writer produces."""
        return []

    def pre_run(self) -> None:
        """Run actions before the group walk"""

    def post_run(self) -> None:
        """Run actions after the group walk"""

    def begin_group(self, series: GroupSeries) -> None:
        """Run actions when entering a group"""

    def end_group(self, series: GroupSeries) -> None:
        """Run actions when leaving a group"""

    def run(self) -> None:
        """Walk the result."""

        self.pre_run()
        for group in Group:
            series = self.result.series[group]
            logging.debug("begin_group(%s)", group)
            self.begin_group(series)
            logging.debug("end_group(%s)", group)
            self.end_group(series)
        self.post_run()


class SeriesWriter(ReportWriter):
    """series.csv and its chart"""

    def artifacts(self) -> List[Path]:
        return [self.destdir / SERIES_FILE, self.destdir / CHART_FILE]

    def pre_run(self) -> None:
        print(f"Generating series {self.destdir / SERIES_FILE}.")

    def post_run(self) -> None:
        write_series(self.result.series, self.destdir / SERIES_FILE, self.experiment)
        print(f"Generating chart {self.destdir / CHART_FILE}.")
        render_chart(
            self.result.series, self.destdir / CHART_FILE, self.options.get("SMOOTH", DEFAULT_SMOOTH),
            f"Experiment {self.experiment}: {self.result.spec.title}")


class ModeShareWriter(ReportWriter):
    """Share of adaptable needs served in push mode, by round"""

    def artifacts(self) -> List[Path]:
        return [self.destdir / MODE_SHARE_FILE, self.destdir / MODE_SHARE_CHART_FILE]

    def post_run(self) -> None:
        print(f"Generating mode share {self.destdir / MODE_SHARE_FILE}.")

        with open_artifact(self.destdir / MODE_SHARE_FILE) as stream:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(MODE_SHARE_HEADER)
            for pos, (share, count) in enumerate(zip(self.result.push_share, self.result.push_share_n)):
                if count > 0:
                    writer.writerow((self.experiment, pos + 1, _number(share), int(count)))

        render_lines(
            [("push", GROUP_COLORS[Group.CA], self.result.push_share)],
            self.destdir / MODE_SHARE_CHART_FILE,
            f"Experiment {self.experiment}: adaptable consumers choosing push",
            "round", "push share", y_range=(0.0, 1.0), y_ticks=(0.0, 0.25, 0.5, 0.75, 1.0),
            smooth=self.options.get("SMOOTH", DEFAULT_SMOOTH))


class InteractionLogWriter(ReportWriter):
    """One interaction log per run, only if the raw logs were kept"""

    def artifacts(self) -> List[Path]:
        if self.result.logs is None:
            return []
        return [self.destdir / interaction_log_name(summary.run) for summary in self.result.runs]

    def post_run(self) -> None:
        if self.result.logs is None:
            return
        for summary, log in zip(self.result.runs, self.result.logs):
            path = self.destdir / interaction_log_name(summary.run)
            print(f"Generating interaction log {path}.")
            write_interactions(log, path, self.experiment)


def _plain(value: float):
    """JSON friendly number, None for NaN."""
    return None if value is None or math.isnan(value) else float(value)


def _comparison_record(comparison: Comparison) -> Dict[str, Any]:
    record = {
        "first": str(comparison.first),
        "second": str(comparison.second),
        "alternative": comparison.alternative,
    }
    if comparison.result is None:
        record["error"] = comparison.reason
        return record

    result = comparison.result
    record.update({
        "t": _plain(result.t),
        "df": _plain(result.df),
        "p_value": _plain(result.p_value),
        "significant": result.significant,
        "mean_first": _plain(result.mean_a),
        "mean_second": _plain(result.mean_b),
        "var_first": _plain(result.var_a),
        "var_second": _plain(result.var_b),
    })
    return record


class SummaryWriter(ReportWriter):
    """summary.json: per-run means and the significance tests"""

    def __init__(self, result: ExperimentResult, options: Dict[str, Any]):
        super().__init__(result, options)
        self.groups: Dict[str, Any] = {}

    def artifacts(self) -> List[Path]:
        return [self.destdir / SUMMARY_FILE]

    def begin_group(self, series: GroupSeries) -> None:
        means = [summary.mean_ug(series.group) for summary in self.result.runs]
        valid = [m for m in means if not math.isnan(m)]
        self.groups[str(series.group)] = {
            "run_means": [_plain(m) for m in means],
            "mean": _plain(float(np.mean(valid))) if valid else None,
            "interactions": int(series.counts.sum()),
        }

    def post_run(self) -> None:
        print(f"Generating summary {self.destdir / SUMMARY_FILE}.")

        spec = self.result.spec
        record = {
            "experiment": spec.ident,
            "title": spec.title,
            "runs": len(self.result.runs),
            "rounds": spec.rounds,
            "base_seed": self.result.base_seed,
            "seeds": [summary.seed for summary in self.result.runs],
            "groups": self.groups,
            "comparisons": [_comparison_record(c) for c in group_comparisons(self.result)],
            "phases": [
                {
                    "rounds": f"{pc.phase.first}-{pc.phase.last}",
                    "changes": dict(pc.phase.overrides),
                    "means": {str(group): _plain(mean) for group, mean in pc.means.items()},
                    "worst": str(pc.worst),
                    "comparison": _comparison_record(pc.comparison),
                }
                for pc in phase_comparisons(self.result)
            ],
        }

        with open_artifact(self.destdir / SUMMARY_FILE) as stream:
            stream.write(json5.dumps(record, quote_keys=True, indent=4, trailing_commas=False))
            stream.write("\n")


# CRC32 (IEEE 802.3) as used for the checksum companion file
CRC32 = crc.Configuration(
    polynomial=0x04C11DB7, width=32, init_value=0xFFFFFFFF,
    reverse_input=True, reverse_output=True, final_xor_value=0xFFFFFFFF)


def crc32_of(path: Path) -> int:
    """CRC32 of a file's content."""

    with open_artifact(path, "rb") as stream:
        return crc.Calculator(CRC32).checksum(stream.read())


def write_checksums(paths: Iterable[Path], path: Path) -> None:
    """One 'CRC32 file name' line per artifact, in the given order."""

    lines = [f"0x{crc32_of(artifact):08X} {artifact.name}\n" for artifact in paths]
    with open_artifact(path) as stream:
        stream.writelines(lines)


# List of artifact writers, in output order
WRITERS = [SeriesWriter, ModeShareWriter, SummaryWriter, InteractionLogWriter]


def write_report(result: ExperimentResult, destdir: Path, smooth: int = DEFAULT_SMOOTH) -> List[Path]:
    """Write all artifacts and their checksum file; returns the artifact paths."""

    try:
        destdir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ArtifactError(destdir, err.strerror or str(err)) from err

    options = {"DESTDIR": destdir, "SMOOTH": smooth}
    artifacts: List[Path] = []
    for writer_class in WRITERS:
        writer = writer_class(result, options)
        writer.run()
        artifacts.extend(writer.artifacts())

    print(f"Generating checksums {destdir / CHECKSUM_FILE}.")
    write_checksums(artifacts, destdir / CHECKSUM_FILE)
    return artifacts
