"""Regular-versus-chaotic diagnostics for sampled trajectory series.

Spectral side: a mean-removed, Hann-windowed, one-sided amplitude spectrum
normalized so a unit sinusoid centered on a frequency bin peaks at 1.0.  The
Hann window leaks half the peak amplitude into the two adjacent bins, which is
why the dominant-peak statistic counts a three-bin window.

Dynamical side: the largest Lyapunov exponent from the classic two-trajectory
scheme - evolve a companion displaced by d0, renormalize the separation back
to d0 at fixed intervals, and average the logarithmic growth rates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hybrid import HybridModel, HybridState
from .integrate import (
    IntegratorConfig,
    IntegratorScheme,
    IntegrationError,
    Trajectory,
)

#: spectra need at least this many samples to be meaningful
MIN_SPECTRUM_SAMPLES = 16

#: power bins below this fraction of the maximum are clamped before the
#: geometric mean, so the flatness of a line spectrum is finite but tiny
FLATNESS_FLOOR_RATIO = 1e-15


@dataclass(frozen=True)
class AmplitudeSpectrum:
    """One-sided spectrum: ``freqs`` in cycles per time unit, ``amps`` real."""

    freqs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        a = np.asarray(self.amps, dtype=float)
        if f.shape != a.shape or f.ndim != 1:
            raise ValueError("freqs and amps must be 1-d arrays of equal length")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "amps", a)


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window; its sum is exactly n/2 for even spectra math."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def amplitude_spectrum(series: np.ndarray, dt_sample: float) -> AmplitudeSpectrum:
    """Amplitude spectrum of a real series sampled at ``dt_sample`` spacing.

    The mean is removed and a Hann window applied before the one-sided DFT.
    Normalization: a unit-amplitude sinusoid centered on a bin yields a peak
    amplitude of 1.0 (within 2 percent).
    """
    s = np.asarray(series, dtype=float)
    if s.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = s.shape[0]
    if n < MIN_SPECTRUM_SAMPLES:
        raise ValueError(
            f"series too short for a spectrum: {n} < {MIN_SPECTRUM_SAMPLES} samples"
        )
    if dt_sample <= 0:
        raise ValueError("dt_sample must be positive")
    window = hann_window(n)
    transform = np.fft.rfft((s - s.mean()) * window)
    wsum = window.sum()
    amps = 2.0 * np.abs(transform) / wsum
    amps[0] *= 0.5
    if n % 2 == 0:
        amps[-1] *= 0.5
    freqs = np.fft.rfftfreq(n, d=dt_sample)
    return AmplitudeSpectrum(freqs=freqs, amps=amps)


def dominant_peak_fraction(spectrum: AmplitudeSpectrum) -> float:
    """Fraction of total spectral power in the largest bin and its neighbors.

    Close to 1 for a single tone (the three-bin window absorbs the Hann
    leakage), about 0.5 for two equal tones, and near 3/n_bins for noise.
    An all-zero spectrum returns 0.
    """
    power = spectrum.amps**2
    total = power.sum()
    if total <= 0.0:
        return 0.0
    peak = int(np.argmax(power))
    lo = max(0, peak - 1)
    hi = min(power.shape[0], peak + 2)
    return float(power[lo:hi].sum() / total)


def spectral_flatness(spectrum: AmplitudeSpectrum) -> float:
    """Geometric over arithmetic mean of the power bins, in (0, 1].

    Bins below ``FLATNESS_FLOOR_RATIO`` of the maximum are clamped to that
    floor, so line spectra give small positive values instead of exact zero.
    A spectrum with no power at all is trivially flat and returns 1.
    """
    power = spectrum.amps**2
    peak = power.max() if power.size else 0.0
    if peak <= 0.0:
        return 1.0
    clamped = np.maximum(power, FLATNESS_FLOOR_RATIO * peak)
    geometric = math.exp(float(np.mean(np.log(clamped))))
    return float(geometric / clamped.mean())


def tone_flatness_baseline(n_samples: int, dt_sample: float) -> float:
    """Flatness of a synthetic bin-centered unit tone of matching length.

    The chaos threshold compares a series' flatness against this baseline, so
    it must be computed with the same sample count the series has (the clamp
    floor makes flatness length-dependent).  Deterministic by construction.
    """
    if n_samples < MIN_SPECTRUM_SAMPLES:
        raise ValueError("n_samples too small for a baseline spectrum")
    bin_index = max(1, n_samples // 8)
    freq = bin_index / (n_samples * dt_sample)
    t = np.arange(n_samples) * dt_sample
    tone = np.sin(2.0 * np.pi * freq * t)
    return spectral_flatness(amplitude_spectrum(tone, dt_sample))


@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest Lyapunov exponent estimate with its sampling uncertainty."""

    value: float
    std_error: float
    n_renorms: int
    renorm_interval: float
    d0: float

    def __float__(self) -> float:
        return self.value


def lyapunov_benettin(
    model: HybridModel,
    state0: HybridState,
    cfg: IntegratorConfig,
    d0: float = 1e-8,
    renorm_interval: float = 1.0,
    n_renorms: int = 2000,
) -> LyapunovEstimate:
    """Largest Lyapunov exponent by the two-trajectory renormalization method.

    The exponent is the mean of log(d_i/d0) over renormalization intervals
    divided by the interval length; the standard error of that mean is
    reported alongside.  Requires at least 100 renormalizations for the
    average to mean anything.
    """
    if d0 <= 0:
        raise ValueError("d0 must be positive")
    if n_renorms < 100:
        raise ValueError("n_renorms must be at least 100")
    if renorm_interval <= 0:
        raise ValueError("renorm_interval must be positive")
    steps = int(round(renorm_interval / abs(cfg.dt)))
    if steps < 1:
        raise ValueError("renorm_interval is shorter than one integrator step")

    offset = np.ones(10) / math.sqrt(10.0)
    from .hybrid import _compiled

    c = _compiled(model)
    scheme_id = (
        _kernels.SCHEME_MIDPOINT
        if cfg.scheme is IntegratorScheme.IMPLICIT_MIDPOINT
        else _kernels.SCHEME_RK4
    )
    logs, status, n_done = _kernels.lyapunov_loop(
        state0.as_vector(),
        offset,
        d0,
        n_renorms,
        steps,
        cfg.dt,
        cfg.fixed_point_tol,
        cfg.fixed_point_max_iters,
        scheme_id,
        c["rq"],
        c["sq"],
        c["cw"],
        c["w4"],
        1.0 / model.hbar,
        1.0 / model.m,
        2.0 * model.k,
    )
    if status != _kernels.OK:
        raise IntegrationError(
            f"lyapunov companion integration failed in interval {n_done}",
            time=n_done * renorm_interval,
            iterations=0,
            residual=float("nan"),
        )
    interval = steps * abs(cfg.dt)
    rates = logs / interval
    value = float(rates.mean())
    std_error = float(rates.std(ddof=1) / math.sqrt(n_renorms))
    return LyapunovEstimate(
        value=value,
        std_error=std_error,
        n_renorms=n_renorms,
        renorm_interval=interval,
        d0=d0,
    )


def conservation_drift(trajectory: Trajectory, label: str) -> float:
    """Largest absolute excursion of a recorded observable from its initial value."""
    if label not in trajectory.conserved:
        known = ", ".join(sorted(trajectory.conserved)) or "none"
        raise KeyError(f"no recorded observable {label!r} (recorded: {known})")
    values = trajectory.conserved[label]
    return float(np.abs(values - values[0]).max())


class Verdict(enum.Enum):
    REGULAR = "Regular"
    CHAOTIC = "Chaotic"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class DiagnosticThresholds:
    """Frozen classification thresholds (echoed into every report)."""

    lyapunov_regular_max: float = 1e-3
    lyapunov_chaotic_min: float = 5e-3
    peak_fraction_regular_min: float = 0.8
    flatness_chaos_factor: float = 10.0


def classify(
    lyapunov: float,
    peak_fraction: float,
    flatness: float,
    tone_baseline: float,
    thresholds: DiagnosticThresholds = DiagnosticThresholds(),
) -> Verdict:
    """Deterministic verdict from the three diagnostics.

    Chaotic needs both a clearly positive exponent and a spectrum broader than
    the pure-tone baseline by the configured factor.  Regular needs a
    negligible exponent plus spectral evidence of regularity: either one
    dominant peak, or a narrowband (below-chaos-threshold) line spectrum -
    the latter admits quasi-periodic series whose power is spread over many
    discrete lines, as frequency-modulated coordinates of an integrable flow
    are.  Everything else is Indeterminate.
    """
    broadband = flatness >= thresholds.flatness_chaos_factor * tone_baseline
    if lyapunov > thresholds.lyapunov_chaotic_min and broadband:
        return Verdict.CHAOTIC
    if abs(lyapunov) < thresholds.lyapunov_regular_max and (
        peak_fraction > thresholds.peak_fraction_regular_min or not broadband
    ):
        return Verdict.REGULAR
    return Verdict.INDETERMINATE


@dataclass(frozen=True)
class ChaosReport:
    """Diagnostics for one scalar series of one trajectory."""

    series_label: str
    lyapunov: float
    lyapunov_std_error: float
    dominant_peak_fraction: float
    spectral_flatness: float
    tone_baseline: float
    verdict: Verdict
    thresholds: DiagnosticThresholds


def chaos_report(
    series_label: str,
    series: np.ndarray,
    dt_sample: float,
    lyapunov: LyapunovEstimate,
    thresholds: DiagnosticThresholds = DiagnosticThresholds(),
) -> ChaosReport:
    """Spectrum-based diagnostics for one series, combined with the exponent."""
    spectrum = amplitude_spectrum(series, dt_sample)
    peak_fraction = dominant_peak_fraction(spectrum)
    flatness = spectral_flatness(spectrum)
    baseline = tone_flatness_baseline(len(series), dt_sample)
    verdict = classify(
        lyapunov.value, peak_fraction, flatness, baseline, thresholds
    )
    return ChaosReport(
        series_label=series_label,
        lyapunov=lyapunov.value,
        lyapunov_std_error=lyapunov.std_error,
        dominant_peak_fraction=peak_fraction,
        spectral_flatness=flatness,
        tone_baseline=baseline,
        verdict=verdict,
        thresholds=thresholds,
    )
