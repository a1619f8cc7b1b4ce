"""CSV, JSON-lines and SVG output for finished runs."""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence

from jinja2 import Environment, PackageLoader, StrictUndefined

from ..models.cluster import Event
from ..models.report import SimReport, SimulationRun, TickRecord
from ..models.workload import RequestOutcome

logger = logging.getLogger(__name__)

REPORT_FIELDS = [name for name in SimReport.model_fields if name not in ("ready_series", "n_tar_series")]
OUTCOME_FIELDS = ["request_id", "status", "latency_s", "attempts"]
TICK_FIELDS = ["t", "n_tar", "spot", "spot_ready", "on_demand", "on_demand_ready", "spot_ready_seen"]

WIDTH, HEIGHT = 800, 320
LEFT, RIGHT, TOP, BOTTOM = 60, 780, 30, 280

_environment = Environment(
    loader=PackageLoader("spotmix", "templates"),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def write_reports_csv(reports: Sequence[SimReport], path: Path):
    """One row per (policy, trace, seed); header only when `reports` is empty."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        for report in reports:
            writer.writerow(report.scalars())


def write_rows_csv(rows: Sequence[Dict[str, object]], fieldnames: List[str], path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)


def write_outcomes_csv(outcomes: Sequence[RequestOutcome], path: Path):
    write_rows_csv([o.model_dump(mode="json") for o in outcomes], OUTCOME_FIELDS, path)


def write_ticks_csv(ticks: Sequence[TickRecord], path: Path):
    write_rows_csv([tick.model_dump() for tick in ticks], TICK_FIELDS, path)


def write_event_log(events: Sequence[Event], path: Path):
    """JSON lines: {"t", "event", "replica", "zone", "kind"}."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for event in events:
            f.write(json.dumps(event.model_dump(mode="json")) + "\n")


def read_event_log(path: Path) -> List[Event]:
    with open(path, "r") as f:
        return [Event.model_validate_json(line) for line in f if line.strip()]


def _scale(value: float, top: float) -> float:
    """Pixel row of `value` on a 0..top axis."""
    if top <= 0:
        return float(BOTTOM)
    return BOTTOM - (BOTTOM - TOP) * value / top


def _y_ticks(top: float, count: int = 4) -> List[Dict[str, str]]:
    return [
        {"y": _fmt(_scale(top * i / count, top)), "label": _fmt(top * i / count)}
        for i in range(count + 1)
    ]


def _step_points(series: Sequence[int], top: float) -> str:
    horizon = max(len(series), 1)
    step = (RIGHT - LEFT) / horizon
    points = []
    for t, value in enumerate(series):
        y = _fmt(_scale(value, top))
        points.append(f"{_fmt(LEFT + t * step)},{y}")
        points.append(f"{_fmt(LEFT + (t + 1) * step)},{y}")
    return " ".join(points)


def render_ready_chart(report: SimReport) -> str:
    """Step plot of ready replicas against N_Tar over the run."""
    top = float(max(max(report.ready_series, default=0), max(report.n_tar_series, default=0), 1))
    return _environment.get_template("ready_series.svg.j2").render(
        width=WIDTH, height=HEIGHT, left=LEFT, right=RIGHT, top=TOP, bottom=BOTTOM,
        title=f"{report.policy} seed {report.seed}",
        horizon=len(report.ready_series),
        y_ticks=_y_ticks(top),
        ready_points=_step_points(report.ready_series, top),
        target_points=_step_points(report.n_tar_series, top),
        availability=f"{report.availability:.4f}",
    )


def _slots(count: int):
    slot = (RIGHT - LEFT) / max(count, 1)
    width = slot * 0.6
    return [(LEFT + i * slot + (slot - width) / 2, width) for i in range(count)]


def render_cost_chart(reports: Sequence[SimReport]) -> str:
    """Stacked spot / on-demand cost per run."""
    top = max((r.cost_total for r in reports), default=0.0) or 1.0
    bars = []
    for report, (x, width) in zip(reports, _slots(len(reports))):
        spot_y = _scale(report.cost_spot, top)
        od_y = _scale(report.cost_spot + report.cost_od, top)
        bars.append({
            "x": _fmt(x), "width": _fmt(width), "center": _fmt(x + width / 2),
            "spot_y": _fmt(spot_y), "spot_h": _fmt(BOTTOM - spot_y),
            "od_y": _fmt(od_y), "od_h": _fmt(spot_y - od_y), "label_y": _fmt(od_y - 4),
            "label": f"{report.policy}/{report.seed}",
            "relative": f"{report.cost_relative_to_od:.3f}",
        })
    return _environment.get_template("cost_bars.svg.j2").render(
        width=WIDTH, height=HEIGHT, left=LEFT, right=RIGHT, top=TOP, bottom=BOTTOM, bars=bars,
    )


def render_latency_chart(reports: Sequence[SimReport]) -> str:
    """p50/p90/p99 box summary per run."""
    top = max((r.latency_p99 for r in reports), default=0.0) or 1.0
    boxes = []
    for report, (x, width) in zip(reports, _slots(len(reports))):
        p90_y = _scale(report.latency_p90, top)
        boxes.append({
            "x": _fmt(x), "x_end": _fmt(x + width), "width": _fmt(width), "center": _fmt(x + width / 2),
            "p50_y": _fmt(_scale(report.latency_p50, top)),
            "p90_y": _fmt(p90_y),
            "box_h": _fmt(_scale(report.latency_p50, top) - p90_y),
            "p99_y": _fmt(_scale(report.latency_p99, top)),
            "mean_y": _fmt(_scale(report.latency_mean, top)),
            "label": f"{report.policy}/{report.seed}",
        })
    return _environment.get_template("latency_box.svg.j2").render(
        width=WIDTH, height=HEIGHT, left=LEFT, right=RIGHT, top=TOP, bottom=BOTTOM,
        y_ticks=_y_ticks(top), boxes=boxes,
    )


def write_charts(reports: Sequence[SimReport], out_dir: Path, ready: bool = True) -> List[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if ready:
        for report in reports:
            path = out_dir / f"ready_{report.policy}_{report.seed}.svg"
            path.write_text(render_ready_chart(report))
            written.append(path)
    for name, render in (("cost.svg", render_cost_chart), ("latency.svg", render_latency_chart)):
        path = out_dir / name
        path.write_text(render(reports))
        written.append(path)
    return written


def write_run(run: SimulationRun, out_dir: Path, charts: bool = True, event_log: bool = True) -> Path:
    """All artifacts of one run under `out_dir`."""
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as f:
        json.dump(run.report.model_dump(mode="json"), f, indent=2)
        f.write("\n")
    write_reports_csv([run.report], out_dir / "results.csv")
    write_ticks_csv(run.ticks, out_dir / "ticks.csv")
    write_outcomes_csv(run.outcomes, out_dir / "outcomes.csv")
    if event_log:
        write_event_log(run.events, out_dir / "events.jsonl")
    if charts:
        write_charts([run.report], out_dir)
    logger.info("Wrote run artifacts to %s", out_dir)
    return out_dir


def read_report(run_dir: Path) -> SimReport:
    with open(run_dir / "report.json", "r") as f:
        return SimReport.model_validate(json.load(f))
