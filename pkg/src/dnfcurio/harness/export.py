"""CSV and plot output for run logs."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..cognition import Event
from .experiments import RunLog

HEADER = "run_id,t_s,event,goal_color,goal_angle,error,lp,mode"
COLUMNS = HEADER.split(",")
SUMMARY_HEADER = "run_id,object,seed,goals_discovered,selections,habituated_at_s,end_t_s"
FORMATS = ("csv", "png")


def _num(v: Optional[float]) -> str:
    # repr round-trips every float exactly
    return "" if v is None else repr(float(v))


def _parse(v: str) -> Optional[float]:
    return None if v == "" else float(v)


def event_rows(log: RunLog) -> Iterable[list[str]]:
    for e in log.events:
        yield [log.run_id, _num(e.t_s), e.event, _num(e.goal_color), _num(e.goal_angle),
               _num(e.error), _num(e.lp), e.mode]


def write_run_csv(log: RunLog, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(event_rows(log))
    return path


def read_run_csv(path) -> list[tuple[str, Event]]:
    """``(run_id, Event)`` per row; the inverse of :func:`write_run_csv` (``info`` is not stored)."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != COLUMNS:
            raise ValueError(f"unexpected header {','.join(header)!r}")
        return [(row[0], Event(float(row[1]), row[2], _parse(row[3]), _parse(row[4]),
                               _parse(row[5]), _parse(row[6]), row[7]))
                for row in r]


def write_summary_csv(logs: Sequence[RunLog], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER.split(","))
        for log in logs:
            w.writerow([log.run_id, log.kind, log.seed, log.goals_discovered, len(log.of("selection")),
                        _num(log.habituated_at_s), _num(log.end_t_s)])
    return path


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_lp(log: RunLog, path) -> int:
    """LP against time, one line per discovered goal. Returns the number of lines drawn."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 3.5))
    n_goals = len(log.goals)
    for i in range(n_goals):
        pts = [(s.t_s, s.lp[i]) for s in log.ticks if len(s.lp) > i]
        g = log.goals[i]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"({g['color']:.0f}, {g['angle']:.0f})")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("learning progress")
    ax.set_title(log.run_id)
    if n_goals:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return n_goals


def plot_lc(log: RunLog, path) -> None:
    """Tonic and phasic peak outputs against time."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 2.5))
    t = [s.t_s for s in log.ticks]
    ax.plot(t, [s.tonic for s in log.ticks], label="tonic")
    ax.plot(t, [s.phasic for s in log.ticks], label="phasic")
    ax.set_xlabel("time (s)")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def export(logs: Sequence[RunLog], fmt: str, out_dir) -> list[Path]:
    """Write every log in ``fmt`` (``csv`` or ``png``) under ``out_dir``; returns the files written."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if not logs:
        raise ValueError("nothing to export")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    if fmt == "csv":
        files += [write_run_csv(log, out / f"{log.run_id}.csv") for log in logs]
        files.append(write_summary_csv(logs, out / "summary.csv"))
    else:
        for log in logs:
            plot_lp(log, out / f"{log.run_id}_lp.png")
            plot_lc(log, out / f"{log.run_id}_lc.png")
            files += [out / f"{log.run_id}_lp.png", out / f"{log.run_id}_lc.png"]
    return files
