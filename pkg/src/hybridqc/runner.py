"""Run execution and file output: time series, spectra, summary, sweeps.

Output bytes are deterministic for a given config: floats are written with
repr (shortest round-trip form) and all ordering is fixed by construction.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import (
    ConfigError, RunConfig, toml_dumps, with_model_parameter,
)
from .diagnostics import (
    ChaosReport, LyapunovEstimate, Verdict, amplitude_spectrum,
    chaos_report, dominant_peak_fraction, lyapunov_benettin,
    spectral_flatness, tone_flatness_baseline,
)
from .hybrid import conserved_set, diagnostic_observables
from .integrate import IntegrationError, Trajectory, integrate

TIMESERIES_FILE = "timeseries.csv"
SUMMARY_FILE = "summary.toml"
SPECTRUM_SERIES = ("q", "x1")

_COORD_COLUMNS = ("q", "p", "x1", "x2", "x3", "x4", "y1", "y2", "y3", "y4")


@dataclass(frozen=True)
class RunSummary:
    """Everything a finished (or failed) run reports."""

    config: RunConfig
    status: str
    duration_seconds: float
    drifts: dict[str, float]
    excursions: dict[str, float]
    reports: dict[str, ChaosReport]
    lyapunov: LyapunovEstimate | None
    manifest: tuple[Path, ...]
    output_dir: Path
    error: str | None = None

    @property
    def verdicts(self) -> dict[str, str]:
        return {k: r.verdict.value for k, r in self.reports.items()}


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_timeseries(path: Path, trajectory: Trajectory,
                      observable_labels: list[str]) -> None:
    header = ["tau", *_COORD_COLUMNS, *observable_labels]
    columns = [trajectory.times]
    columns += [trajectory.series(name) for name in _COORD_COLUMNS]
    columns += [trajectory.conserved[name] for name in observable_labels]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_spectrum(path: Path, series: np.ndarray, dt_sample: float) -> None:
    spectrum = amplitude_spectrum(series, dt_sample)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("freq,amplitude\n")
        for f, a in zip(spectrum.freqs, spectrum.amps):
            fh.write(f"{_fmt(f)},{_fmt(a)}\n")


def _summary_tables(summary: RunSummary) -> dict:
    cfg = summary.config
    body: dict = {
        "status": summary.status,
        "duration_seconds": summary.duration_seconds,
        "manifest": [p.name for p in summary.manifest],
    }
    if summary.error is not None:
        body["error"] = summary.error
    if cfg.warnings:
        body["warnings"] = list(cfg.warnings)
    body["drifts"] = {k: v for k, v in summary.drifts.items()}
    if summary.excursions:
        body["excursions"] = {k: v for k, v in summary.excursions.items()}
    if summary.lyapunov is not None:
        lam = summary.lyapunov
        body["lyapunov"] = {
            "value": lam.value,
            "std_error": lam.std_error,
            "n_renorms": lam.n_renorms,
            "renorm_interval": lam.renorm_interval,
            "d0": lam.d0,
        }
    for label, report in summary.reports.items():
        body[f"report_{label}"] = {
            "verdict": report.verdict.value,
            "lyapunov": report.lyapunov,
            "dominant_peak_fraction": report.dominant_peak_fraction,
            "spectral_flatness": report.spectral_flatness,
            "tone_baseline": report.tone_baseline,
        }
    data = summary.config.echo()
    data["summary"] = body
    return data


def _write_summary(path: Path, summary: RunSummary) -> None:
    path.write_text(toml_dumps(_summary_tables(summary)), encoding="utf-8")


def run_single(cfg: RunConfig) -> RunSummary:
    """Integrate one configured run and write its output files.

    Writes timeseries.csv, spectrum_<series>.csv for q and x1 when
    diagnostics are enabled, and summary.toml (whose config tables reproduce
    the run).  On integrator failure the partial series is flushed, the
    summary is written with status "failed", and the error is re-raised.
    """
    started = time.perf_counter()
    model = cfg.model
    state0 = cfg.initial_hybrid_state()
    observables = conserved_set(model) + diagnostic_observables(model)
    conserved_labels = [obs.label for obs in conserved_set(model)]
    extra_labels = [obs.label for obs in diagnostic_observables(model)]

    out_dir = cfg.resolved_output_dir() / cfg.label
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: list[Path] = []

    try:
        trajectory = integrate(
            model, state0, cfg.integrator, cfg.horizon,
            sample_stride=cfg.sample_stride, observables=observables,
        )
    except IntegrationError as exc:
        duration = time.perf_counter() - started
        partial = exc.partial
        if partial is not None and len(partial) > 0:
            ts_path = out_dir / TIMESERIES_FILE
            _write_timeseries(ts_path, partial, conserved_labels + extra_labels)
            manifest.append(ts_path)
        failed = RunSummary(
            config=cfg, status="failed", duration_seconds=duration,
            drifts={}, excursions={}, reports={}, lyapunov=None,
            manifest=tuple(manifest), output_dir=out_dir, error=str(exc),
        )
        summary_path = out_dir / SUMMARY_FILE
        _write_summary(summary_path, failed)
        raise

    ts_path = out_dir / TIMESERIES_FILE
    _write_timeseries(ts_path, trajectory, conserved_labels + extra_labels)
    manifest.append(ts_path)

    drifts = {
        label: float(np.max(np.abs(
            trajectory.conserved[label] - trajectory.conserved[label][0]
        )))
        for label in conserved_labels
    }
    excursions = {
        label: float(np.max(np.abs(
            trajectory.conserved[label] - trajectory.conserved[label][0]
        )))
        for label in extra_labels
    }

    reports: dict[str, ChaosReport] = {}
    lyapunov: LyapunovEstimate | None = None
    dt_sample = cfg.sample_stride * cfg.integrator.dt
    if cfg.diagnostics.enabled:
        for label in SPECTRUM_SERIES:
            spec_path = out_dir / f"spectrum_{label}.csv"
            _write_spectrum(spec_path, trajectory.series(label), dt_sample)
            manifest.append(spec_path)
        if cfg.diagnostics.lyapunov:
            lyapunov = lyapunov_benettin(
                model, state0, cfg.integrator,
                d0=cfg.diagnostics.lyapunov_d0,
                renorm_interval=cfg.diagnostics.lyapunov_renorm_interval,
                n_renorms=cfg.diagnostics.lyapunov_n_renorms,
            )
            for label in SPECTRUM_SERIES:
                reports[label] = chaos_report(
                    label, trajectory.series(label), dt_sample, lyapunov,
                    cfg.diagnostics.thresholds,
                )
        else:
            for label in SPECTRUM_SERIES:
                series = trajectory.series(label)
                spectrum = amplitude_spectrum(series, dt_sample)
                reports[label] = ChaosReport(
                    series_label=label,
                    lyapunov=float("nan"),
                    lyapunov_std_error=float("nan"),
                    dominant_peak_fraction=dominant_peak_fraction(spectrum),
                    spectral_flatness=spectral_flatness(spectrum),
                    tone_baseline=tone_flatness_baseline(len(series), dt_sample),
                    verdict=Verdict.INDETERMINATE,
                    thresholds=cfg.diagnostics.thresholds,
                )

    duration = time.perf_counter() - started
    summary_path = out_dir / SUMMARY_FILE
    summary = RunSummary(
        config=cfg, status="ok", duration_seconds=duration,
        drifts=drifts, excursions=excursions, reports=reports,
        lyapunov=lyapunov, manifest=tuple(manifest + [summary_path]),
        output_dir=out_dir,
    )
    _write_summary(summary_path, summary)
    return summary


def _sweep_point(cfg: RunConfig) -> RunSummary:
    try:
        return run_single(cfg)
    except IntegrationError as exc:
        return RunSummary(
            config=cfg, status="failed", duration_seconds=float("nan"),
            drifts={}, excursions={}, reports={}, lyapunov=None,
            manifest=(), output_dir=cfg.resolved_output_dir() / cfg.label,
            error=str(exc),
        )


def sweep(base: RunConfig, axis: str, values, jobs: int = 1) -> list[RunSummary]:
    """Independent runs with one model parameter swept over values.

    Results come back in input order regardless of execution order.  A
    failing point is marked failed in the aggregate table and does not stop
    the rest.  An aggregate CSV is written next to the per-run directories.
    """
    values = [float(v) for v in values]
    configs = []
    for i, value in enumerate(values):
        point = with_model_parameter(base, axis, value)
        point = _relabel(point, f"{base.label}-{axis}-{i}")
        configs.append(point)

    if jobs < 1:
        raise ConfigError("sweep jobs must be at least 1")
    if jobs == 1 or len(configs) <= 1:
        summaries = [_sweep_point(cfg) for cfg in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_sweep_point, configs))

    if configs:
        table_path = base.resolved_output_dir() / f"sweep_{base.label}_{axis}.csv"
        table_path.parent.mkdir(parents=True, exist_ok=True)
        with open(table_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("axis,value,label,status,lyapunov,verdict_q,verdict_x1\n")
            for value, summary in zip(values, summaries):
                lam = "" if summary.lyapunov is None else _fmt(summary.lyapunov.value)
                verdicts = summary.verdicts
                fh.write(",".join([
                    axis, _fmt(value), summary.config.label, summary.status,
                    lam, verdicts.get("q", ""), verdicts.get("x1", ""),
                ]) + "\n")
    return summaries


def _relabel(cfg: RunConfig, label: str) -> RunConfig:
    return replace(cfg, label=label)
