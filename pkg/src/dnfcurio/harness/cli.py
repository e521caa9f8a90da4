"""Command-line entry point: ``dnfcurio <subcommand>``."""
from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from ..errors import DnfError, InvariantViolation
from ..world import KINDS
from . import stats as st
from .experiments import ExperimentConfig, habituation_counts, run_experiment
from .sims import HABITUATION_CONDITIONS, SETTINGS, habituation_sim, persistence_sim

EXIT_INVARIANT = 3
EXIT_ERROR = 2


def _objects(value: str) -> tuple[str, ...]:
    kinds = tuple(k.strip() for k in value.split(",") if k.strip())
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise click.BadParameter(f"unknown object kind(s) {bad}; choose from {KINDS}")
    return kinds


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise click.BadParameter(f"not a list of numbers: {text!r}") from None


common = [
    click.option("--objects", default="cube,cylinder,ball", show_default=True, help="Comma-separated object kinds."),
    click.option("--replicates", default=1, show_default=True, type=click.IntRange(min=1)),
    click.option("--seed", default=0, show_default=True, type=int),
    click.option("--max-time", "max_time", default=600.0, show_default=True, type=float, help="Simulated seconds per run."),
    click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False),
                 help="Architecture YAML replacing the packaged default."),
    click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False), help="Output directory."),
    click.option("--workers", default=1, show_default=True, type=click.IntRange(min=1)),
]


def with_common(fn):
    for opt in reversed(common):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Curiosity architecture experiments in a simulated push world."""


def _guard(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except InvariantViolation as exc:
        click.echo(f"invariant violation: {exc}", err=True)
        sys.exit(EXIT_INVARIANT)
    except DnfError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)


@main.command()
@with_common
@click.option("--tau-plus", "taus", multiple=True, type=float, default=(2000.0, 4000.0), show_default=True,
              help="Visual-memory build time (ms); repeat for several.")
def habituation(objects, replicates, seed, max_time, config_path, out_dir, workers, taus):
    """Goals discovered before habituation, per object and build time."""
    kinds = _objects(objects)
    taus = tuple(sorted(set(taus)))
    counts = _guard(habituation_counts, kinds, replicates, seed=seed, max_time_s=max_time, taus=taus,
                    workers=workers, config_path=config_path)
    rows = []
    for kind in kinds:
        by_tau = counts[kind]
        line = [kind] + [f"tau+={t:g}: mean {np.mean(by_tau[t]):.2f} {by_tau[t]}" for t in taus]
        if len(taus) == 2:
            try:
                line.append(f"ratio {st.habituation_ratio(by_tau[taus[1]], by_tau[taus[0]]):.3f}")
            except DnfError as exc:
                line.append(f"ratio undefined ({exc})")
        rows.append("  ".join(line))
    click.echo("\n".join(rows))
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        with open(Path(out_dir) / "habituation.csv", "w") as fh:
            fh.write("object,tau_plus_ms,replicate,goals_discovered\n")
            for kind in kinds:
                for t in taus:
                    for i, n in enumerate(counts[kind][t]):
                        fh.write(f"{kind},{t!r},{i},{n}\n")


@main.command()
@with_common
@click.option("--setting", type=click.Choice(sorted(SETTINGS)), default="baseline", show_default=True)
@click.option("--plots/--no-plots", default=False, help="Also write LP and LC plots.")
def learning(objects, replicates, seed, max_time, config_path, out_dir, workers, setting, plots):
    """Goal discovery and learning under one persistence setting."""
    cfg = ExperimentConfig.for_setting(setting, objects=_objects(objects), replicates=replicates, seed=seed,
                                       max_time_s=max_time, config_path=config_path, output_dir=out_dir)
    logs = _guard(run_experiment, cfg, workers)
    for log in logs:
        click.echo(f"{log.run_id}: {log.goals_discovered} goals, {len(log.of('selection'))} selections, "
                   f"{len(log.of('persistence'))} persistence events")
    if plots and out_dir:
        from .export import export
        export(logs, "png", out_dir)


@main.command("persistence-sim")
@click.option("--setting", "settings", multiple=True, type=click.Choice(sorted(SETTINGS)),
              help="Setting(s) to replay; default all.")
@click.option("--cycles", default=24, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
def persistence_cmd(settings, cycles, seed):
    """Replay recorded errors for a stalled and a learnable goal."""
    for name in settings or sorted(SETTINGS):
        log = _guard(persistence_sim, name, seed=seed, cycles=cycles)
        sel = " ".join(f"{t / 1000:.1f}s:{g}" for t, g in log.selections)
        learned = {g: (None if t is None else round(t / 1000, 1)) for g, t in log.learned_at.items()}
        click.echo(f"{name}: selections [{sel}] attempts {log.attempts} learned_at {learned}")


@main.command("habituation-sim")
@click.option("--condition", "conditions", multiple=True, type=click.Choice(HABITUATION_CONDITIONS),
              help="Condition(s) to simulate; default all.")
@click.option("--motions", default=14, show_default=True, type=click.IntRange(min=1))
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False),
              help="Write one CSV of the traces per condition.")
def habituation_sim_cmd(conditions, motions, out_dir):
    """Visual-memory habituation with scripted outcomes."""
    for cond in conditions or HABITUATION_CONDITIONS:
        tr = _guard(habituation_sim, cond, motions=motions)
        sel = ["-" if s is None else str(s) for s in tr.selection]
        click.echo(f"{cond}: selected color per motion [{' '.join(sel)}]")
        if out_dir:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            names = ["objsel", "wm_colors", "visual_memory", *tr.extra]
            cols = [tr.objsel, tr.wm_colors, tr.visual_memory, *tr.extra.values()]
            with open(Path(out_dir) / f"habituation_{cond}.csv", "w") as fh:
                fh.write(",".join(["t_ms", *names]) + "\n")
                for i, t in enumerate(tr.t_ms):
                    fh.write(",".join([repr(float(t)), *(repr(float(c[i])) for c in cols)]) + "\n")


@main.command()
@click.argument("test", type=click.Choice(["mann-whitney", "kruskal-wallis", "ratio"]))
@click.argument("groups", nargs=-1, required=True)
def stats(test, groups):
    """Rank tests on groups given as quoted number lists, e.g. "1 2 3" "4 5 6".

    "ratio" takes slow-habituation counts then fast-habituation counts.
    """
    data = [_floats(g) for g in groups]
    if test == "mann-whitney":
        if len(data) != 2:
            raise click.UsageError("mann-whitney needs exactly two groups")
        u, p = st.mann_whitney_u(*data)
        click.echo(f"U={u!r} p={p!r}")
    elif test == "kruskal-wallis":
        h, p = st.kruskal_wallis(data)
        click.echo(f"H={h!r} p={p!r}")
    else:
        if len(data) != 2:
            raise click.UsageError("ratio needs exactly two groups")
        click.echo(repr(_guard(st.habituation_ratio, data[0], data[1])))


if __name__ == "__main__":
    main()
