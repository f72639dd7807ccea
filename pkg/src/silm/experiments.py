"""
Monte Carlo trials, parameter sweeps, figure presets and CSV output.

A sweep evaluates one or more *series* (e.g. ILM and SILM, or MMSE and ZF)
at each value of a single axis. Trial ``t`` of every point draws its
channels and initial precoders from a stream derived from
``(master_seed, t)`` alone, so all points and series of a sweep see the
same channel realizations, and results do not depend on scheduling.
"""

import csv
import io
import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .network import NetworkConfig, check_config, db_to_linear, draw_channels
from .rates import sum_rates
from .solver import PrecoderKind, SolverParams, run_silm

__all__ = [
    "AXES",
    "METRICS",
    "Series",
    "SweepSpec",
    "TrialRecord",
    "SweepPoint",
    "SweepResult",
    "trial_rngs",
    "run_trial",
    "run_trials",
    "run_sweep",
    "figure_preset",
    "FIGURES",
    "write_csv",
    "read_csv",
    "CSV_HEADER",
    "version_string",
]

AXES = ("rho_db", "snr_db", "K")
METRICS = ("R_DL", "R_UL", "R_total")
CSV_HEADER = ("experiment", "axis", "value", "metric", "mean", "stderr",
              "trials", "seed")

# SNR-indexed leakage weights used for the SNR sweeps
SNR_W_SCHEDULE = {0.0: 0.02, 10.0: 0.02, 20.0: 0.005, 30.0: 0.003,
                  40.0: 0.002, 50.0: 0.001}


def version_string():
    """Package version, suffixed with the git commit when available."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).parent, capture_output=True, text=True,
            timeout=5, check=True)
        return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        return __version__


@dataclass(frozen=True)
class Series:
    """One curve of a sweep: a label plus overrides of config/solver fields.

    ``overrides`` may name any :class:`NetworkConfig` field or ``precoder``.
    An explicit ``w`` override takes precedence over the sweep's weight
    schedule.
    """

    label: str = ""
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepSpec:
    name: str
    base: NetworkConfig
    params: SolverParams
    axis: str
    values: tuple
    trials: int = 200
    master_seed: int = 0
    w_schedule: dict = None
    series: tuple = (Series(),)
    metric: str = "R_DL"

    def __post_init__(self):
        problems = []
        if self.axis not in AXES:
            problems.append(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.values) == 0:
            problems.append("sweep needs at least one axis value")
        if self.trials < 1:
            problems.append(f"trials must be >= 1, got {self.trials}")
        if self.w_schedule is not None:
            missing = [v for v in self.values if float(v) not in self.w_schedule]
            if missing:
                problems.append(f"w_schedule misses axis values {missing}")
        if not self.series:
            problems.append("sweep needs at least one series")
        if self.metric not in METRICS:
            problems.append(f"metric must be one of {METRICS}")
        if problems:
            raise ValidationError("invalid sweep: " + "; ".join(problems), problems)

    def point(self, series, value):
        """Resolve the (config, solver params) of one series at one axis value."""
        cfg = self.base
        if self.axis == "snr_db":
            cfg = cfg.replace(P=db_to_linear(float(value)))
        elif self.axis == "rho_db":
            cfg = cfg.replace(rho_db=float(value))
        else:
            cfg = cfg.replace(K=int(value))
        if self.w_schedule is not None:
            cfg = cfg.replace(w=float(self.w_schedule[float(value)]))
        params = self.params
        changes = dict(series.overrides)
        if "precoder" in changes:
            params = SolverParams(params.max_iters, params.rel_tol,
                                  PrecoderKind(changes.pop("precoder")))
        if "snr_db" in changes:
            changes["P"] = db_to_linear(float(changes.pop("snr_db")))
        cfg = cfg.replace(**changes)
        check_config(cfg)
        return cfg, params

    def experiment_name(self, series):
        return f"{self.name}/{series.label}" if series.label else self.name


@dataclass(frozen=True)
class TrialRecord:
    index: int
    R_DL: float
    R_UL: float
    R_total: float
    iterations: int = 0
    converged: bool = False
    error: str = None


def trial_rngs(master_seed, t):
    """Independent (channel, initialization) generators for trial `t`."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(t,))
    ch_seq, init_seq = seq.spawn(2)
    return np.random.default_rng(ch_seq), np.random.default_rng(init_seq)


def run_trial(cfg, params, master_seed, t):
    """One channel draw, one solver run, one rate evaluation.

    Numerical failures are caught and returned as a record with NaN rates
    and the error message, so a sweep can go on.
    """
    ch_rng, init_rng = trial_rngs(master_seed, t)
    try:
        ch = draw_channels(cfg, ch_rng)
        rep = run_silm(cfg, ch, params, init_rng)
        r = sum_rates(cfg, ch, rep.final_state)
    except ArithmeticError as exc:
        nan = math.nan
        return TrialRecord(t, nan, nan, nan, error=f"{type(exc).__name__}: {exc}")
    return TrialRecord(t, r.R_DL, r.R_UL, r.R_total, rep.iterations_run,
                       rep.converged)


def _run_task(task):
    cfg, params, seed, t = task
    return run_trial(cfg, params, seed, t)


def _run_tasks(tasks, workers):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_task, tasks, chunksize=8))
    return [_run_task(task) for task in tasks]


def run_trials(cfg, params, trials, master_seed, workers=1):
    """Run `trials` independent trials; records come back sorted by index."""
    check_config(cfg)
    tasks = [(cfg, params, master_seed, t) for t in range(trials)]
    return sorted(_run_tasks(tasks, workers), key=lambda r: r.index)


@dataclass
class SweepPoint:
    experiment: str
    value: float
    config: NetworkConfig
    params: SolverParams
    records: list

    def ok_records(self):
        return [r for r in self.records if r.error is None]

    def stats(self, metric):
        """(mean, standard error, count) over the successful trials."""
        x = np.array([getattr(r, metric) for r in self.ok_records()], dtype=float)
        n = x.size
        if n == 0:
            return math.nan, math.nan, 0
        mean = float(np.sum(x) / n)
        se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        return mean, se, n


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list
    metadata: dict = field(default_factory=dict)

    def summary_rows(self):
        rows = []
        for p in self.points:
            for metric in METRICS:
                mean, se, n = p.stats(metric)
                rows.append((p.experiment, self.spec.axis, p.value, metric,
                             mean, se, n, self.spec.master_seed))
        return rows

    def series_curve(self, experiment, metric):
        """Axis values, means and standard errors of one series."""
        pts = [p for p in self.points if p.experiment == experiment]
        stats = [p.stats(metric) for p in pts]
        return (np.array([p.value for p in pts], dtype=float),
                np.array([s[0] for s in stats]), np.array([s[1] for s in stats]))

    def experiments(self):
        seen = []
        for p in self.points:
            if p.experiment not in seen:
                seen.append(p.experiment)
        return seen


def run_sweep(spec, workers=1, extra_metadata=None):
    points, tasks = [], []
    for series in spec.series:
        for value in spec.values:
            cfg, params = spec.point(series, value)
            points.append(SweepPoint(spec.experiment_name(series), value, cfg,
                                     params, []))
            tasks.extend((cfg, params, spec.master_seed, t)
                         for t in range(spec.trials))
    records = _run_tasks(tasks, workers)
    for i, p in enumerate(points):
        chunk = records[i * spec.trials:(i + 1) * spec.trials]
        p.records = sorted(chunk, key=lambda r: r.index)

    metadata = {
        "experiment": spec.name,
        "seed": spec.master_seed,
        "version": version_string(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "axis": spec.axis,
        "trials": spec.trials,
        "points": [{"experiment": p.experiment, "value": p.value,
                    "config": asdict(p.config),
                    "precoder": p.params.precoder.value,
                    "max_iters": p.params.max_iters,
                    "rel_tol": p.params.rel_tol,
                    "failed_trials": [r.index for r in p.records if r.error]}
                   for p in points],
    }
    metadata.update(extra_metadata or {})
    return SweepResult(spec, points, metadata)


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

def _fig2():
    base = NetworkConfig.from_snr_db(10, L_d=4, L_u=0, K=4, N_b=5, N_m=5, s=1,
                                     rho_db=-20, w=0.01)
    return SweepSpec(
        name="fig2", base=base, params=SolverParams(precoder="mmse"),
        axis="rho_db", values=(-40.0, -35.0, -30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0),
        series=(Series("ilm", {"w": 0.0}), Series("silm_w0.01", {"w": 0.01}),
                Series("silm_w0.02", {"w": 0.02})),
        metric="R_DL")


def _fig3():
    base = NetworkConfig.from_snr_db(10, L_d=4, L_u=0, K=5, N_b=5, N_m=5, s=1,
                                     rho_db=-20, w=0.02)
    return SweepSpec(
        name="fig3", base=base, params=SolverParams(),
        axis="snr_db", values=(0.0, 10.0, 20.0, 30.0, 40.0, 50.0),
        w_schedule=dict(SNR_W_SCHEDULE),
        series=(Series("ilm_zf", {"w": 0.0, "precoder": "zf"}),
                Series("silm_zf", {"precoder": "zf"}),
                Series("ilm_mmse", {"w": 0.0, "precoder": "mmse"}),
                Series("silm_mmse", {"precoder": "mmse"})),
        metric="R_DL")


def _fig4():
    base = NetworkConfig.from_snr_db(10, L_d=2, L_u=0, K=1, N_b=5, N_m=5, s=1,
                                     rho_db=-20, w=0.01)
    series = []
    for Ld in (2, 3, 4):
        series.append(Series(f"ilm_Ld{Ld}", {"L_d": Ld, "w": 0.0}))
        series.append(Series(f"silm_Ld{Ld}", {"L_d": Ld, "w": 0.01}))
    return SweepSpec(
        name="fig4", base=base, params=SolverParams(), axis="K",
        values=(1, 2, 3, 4, 5), series=tuple(series), metric="R_DL")


def _fig5():
    base = NetworkConfig.from_snr_db(10, L_d=0, L_u=4, K=4, N_b=5, N_m=5, s=1,
                                     rho_db=-20, w=0.01)
    return SweepSpec(
        name="fig5", base=base, params=SolverParams(), axis="rho_db",
        values=(-40.0, -35.0, -30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0),
        series=(Series("ilm", {"w": 0.0}), Series("silm_w0.01", {"w": 0.01}),
                Series("silm_w0.02", {"w": 0.02})),
        metric="R_UL")


def _fig6():
    base = NetworkConfig.from_snr_db(10, L_d=2, L_u=2, K=2, N_b=4, N_m=4, s=1,
                                     rho_db=-20, w=0.02)
    return SweepSpec(
        name="fig6", base=base, params=SolverParams(precoder="mmse"),
        axis="snr_db", values=(0.0, 10.0, 20.0, 30.0, 40.0, 50.0),
        w_schedule=dict(SNR_W_SCHEDULE),
        series=(Series("downlink", {"L_d": 4, "L_u": 0}),
                Series("uplink", {"L_d": 0, "L_u": 4}),
                Series("mixed", {"L_d": 2, "L_u": 2})),
        metric="R_total")


FIGURES = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5,
           "fig6": _fig6}


def figure_preset(name):
    """Named sweep preset (fig2 to fig6) with its network setup and series."""
    try:
        return FIGURES[name]()
    except KeyError:
        raise ValidationError(
            f"unknown figure {name!r}; choose from {sorted(FIGURES)}") from None


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.9g}"


def write_csv(result, path=None):
    """Write the summary table; returns the text. ``path=None`` skips the file."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for exp, axis, value, metric, mean, se, n, seed in result.summary_rows():
        writer.writerow([exp, axis, _fmt(value), metric, _fmt(mean), _fmt(se),
                         str(n), str(seed)])
    text = buf.getvalue()
    if path is not None:
        path = Path(path)
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return text


def read_csv(path):
    """Parse a file written by :func:`write_csv` into a list of dicts."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for key in ("value", "mean", "stderr"):
            row[key] = float(row[key])
        row["trials"] = int(row["trials"])
        row["seed"] = int(row["seed"])
    return rows
