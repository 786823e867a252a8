"""Measurement pipeline: heterodyne beats, PSD estimation, line fitting.

Mirrors the bench chain: mix two fields into a complex beat, estimate its
power spectrum with a Welch analyzer of explicit resolution bandwidth,
extract the line width model-free or by a Lorentzian fit, and fit width
decay curves with an exponential that has a free asymptote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import get_window, welch

from .oracle import AliasingError, PhaseSeries

DEFAULT_SEGMENT = 4096  # analyzer resolution bandwidth = sample_rate / segment


class DegenerateDataError(ValueError):
    """Input carries no structure to fit (constant power)."""


class NoPeakError(ValueError):
    """Spectrum has no peak above its baseline."""


class InsufficientPointsError(ValueError):
    """Too few points for the requested fit."""


class SegmentTooLongError(ValueError):
    """Requested Welch segment exceeds the series length."""


@dataclass(frozen=True)
class BeatSpectrum:
    """Two-sided beat power density vs offset from the carrier difference."""

    offset_grid: np.ndarray  # Hz, symmetric about 0
    power: np.ndarray  # linear density, >= 0

    def __post_init__(self) -> None:
        if self.offset_grid.shape != self.power.shape:
            raise ValueError("grid and power must have equal shape")
        if np.any(self.power < 0):
            raise ValueError("power must be non-negative")


@dataclass(frozen=True)
class AmplifierResponse:
    """Band-pass response of the noise-injection amplifier chain."""

    low_cutoff: float = 0.5e6  # Hz
    high_cutoff: float = 100e6  # Hz
    order: int = 4

    def __post_init__(self) -> None:
        if not 0 < self.low_cutoff < self.high_cutoff:
            raise ValueError("need 0 < low_cutoff < high_cutoff")
        if self.order < 1:
            raise ValueError("order must be >= 1")

    def magnitude(self, freq_hz: np.ndarray) -> np.ndarray:
        """Butterworth-style band-pass magnitude at ``freq_hz``."""
        f = np.abs(np.asarray(freq_hz, dtype=float))
        n2 = 2 * self.order
        with np.errstate(divide="ignore"):
            ratio_lo = np.where(f > 0, (f / self.low_cutoff) ** n2, 0.0)
        high_pass = ratio_lo / (1.0 + ratio_lo)
        low_pass = 1.0 / (1.0 + (f / self.high_cutoff) ** n2)
        return np.sqrt(high_pass * low_pass)


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit output: values, 1-sigma errors, residual norm."""

    params: dict[str, float]
    sigmas: dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int


def apply_amplifier(s: PhaseSeries, r: AmplifierResponse) -> PhaseSeries:
    """Zero-phase band-pass of the series by the amplifier magnitude."""
    spec = np.fft.rfft(s.samples)
    freqs = np.fft.rfftfreq(s.samples.size, d=1.0 / s.sample_rate)
    out = np.fft.irfft(spec * r.magnitude(freqs), n=s.samples.size)
    return PhaseSeries(sample_rate=s.sample_rate, samples=out)


def welch_psd(
    s: PhaseSeries,
    segment_len: int = DEFAULT_SEGMENT,
    overlap_fraction: float = 0.5,
    window: str = "hann",
) -> tuple[np.ndarray, np.ndarray]:
    """One-sided Welch PSD of a real series; returns (freqs_hz, psd).

    Per-segment mean removal keeps the integral of the PSD equal to the
    series variance (Parseval, within the taper's few-percent bias).
    """
    n = s.samples.size
    if segment_len > n:
        raise SegmentTooLongError(f"segment {segment_len} > series length {n}")
    if segment_len & (segment_len - 1):
        raise ValueError("segment_len must be a power of two")
    freqs, psd = welch(
        s.samples,
        fs=s.sample_rate,
        window=window,
        nperseg=segment_len,
        noverlap=int(overlap_fraction * segment_len),
        detrend="constant",
    )
    return freqs, psd


def beat_signal(
    a: PhaseSeries,
    carrier_a: float,
    b: PhaseSeries,
    carrier_b: float,
    segment_len: int = DEFAULT_SEGMENT,
    overlap_fraction: float = 0.5,
    window: str = "hann",
) -> BeatSpectrum:
    """Heterodyne beat spectrum of two fields, centered on their difference.

    The fields' complex envelopes are mixed and the product demodulated at
    the carrier difference, so the spectrum is reported versus offset from
    |carrier_a - carrier_b| with the line at zero offset.
    """
    if a.sample_rate != b.sample_rate or a.samples.size != b.samples.size:
        raise ValueError("series must share sample_rate and length")
    if abs(carrier_a - carrier_b) >= a.sample_rate / 2:
        raise AliasingError("carrier difference exceeds Nyquist")
    z = np.exp(1j * (a.samples - b.samples))
    if segment_len > z.size:
        raise SegmentTooLongError(f"segment {segment_len} > series length {z.size}")
    freqs, power = welch(
        z,
        fs=a.sample_rate,
        window=window,
        nperseg=segment_len,
        noverlap=int(overlap_fraction * segment_len),
        detrend=False,
        return_onesided=False,
    )
    order = np.argsort(freqs)
    return BeatSpectrum(offset_grid=freqs[order], power=power[order])


def beat_spectrum_from_phase_psd(
    w_psi: np.ndarray, sample_rate: float, n_samples: int
) -> BeatSpectrum:
    """Exact beat spectrum of a Gaussian phase process with spectrum ``w_psi``.

    ``w_psi`` is the two-sided residual phase-difference spectrum [rad^2 s]
    on the rfft grid of (n_samples, sample_rate).  For Gaussian phases the
    beat autocorrelation is exp(-(C(0) - C(t))) with C the phase
    autocovariance, which this evaluates by FFT.  This is the deterministic
    fast path that the Monte Carlo beat estimate converges to.
    """
    w_psi = np.asarray(w_psi, dtype=float)
    if w_psi.size != n_samples // 2 + 1:
        raise ValueError("w_psi must be sampled on the rfft grid of n_samples")
    # C(t_j) on the circular lag grid; see module tests for the convention.
    autocov = 2.0 * np.pi * sample_rate * np.fft.irfft(w_psi, n=n_samples)
    coherence_fn = np.exp(-(autocov[0] - autocov))
    power = np.fft.fft(coherence_fn).real / sample_rate
    power = np.fft.fftshift(power)
    offsets = np.fft.fftshift(np.fft.fftfreq(n_samples, d=1.0 / sample_rate))
    return BeatSpectrum(offset_grid=offsets, power=np.maximum(power, 0.0))


# ---------------------------------------------------------------------------
# Line-shape fitting
# ---------------------------------------------------------------------------


def _lorentzian_model(p: np.ndarray, f: np.ndarray) -> np.ndarray:
    amp, f0, width, base = p
    half2 = (0.5 * width) ** 2
    return base + amp * half2 / ((f - f0) ** 2 + half2)


def _lorentzian_jac(p: np.ndarray, f: np.ndarray) -> np.ndarray:
    amp, f0, width, base = p
    half = 0.5 * width
    half2 = half**2
    d = (f - f0) ** 2 + half2
    jac = np.empty((f.size, 4))
    jac[:, 0] = half2 / d
    jac[:, 1] = amp * half2 * 2.0 * (f - f0) / d**2
    jac[:, 2] = amp * half * (f - f0) ** 2 / d**2
    jac[:, 3] = 1.0
    return jac


def _exp_decay_model(p: np.ndarray, t: np.ndarray) -> np.ndarray:
    amp, tau0, base = p
    return amp * np.exp(-t / tau0) + base


def _exp_decay_jac(p: np.ndarray, t: np.ndarray) -> np.ndarray:
    amp, tau0, base = p
    decay = np.exp(-t / tau0)
    jac = np.empty((t.size, 3))
    jac[:, 0] = decay
    jac[:, 1] = amp * decay * t / tau0**2
    jac[:, 2] = 1.0
    return jac


def _run_fit(model, jac, p0, xdata, ydata, max_nfev=2000) -> FitResult:
    names = list(p0.keys())
    start = np.array([p0[k] for k in names], dtype=float)

    def residual(p):
        return model(p, xdata) - ydata

    def jacobian(p):
        return jac(p, xdata)

    result = least_squares(
        residual,
        start,
        jac=jacobian,
        method="trf",
        xtol=1e-12,
        ftol=1e-12,
        gtol=1e-12,
        max_nfev=max_nfev,
    )
    dof = max(xdata.size - start.size, 1)
    rss = 2.0 * result.cost
    # Parameter covariance from the Jacobian at the solution.
    _, s, vt = np.linalg.svd(result.jac, full_matrices=False)
    good = s > s[0] * np.finfo(float).eps * max(result.jac.shape)
    cov = (vt[good].T / s[good] ** 2) @ vt[good] * (rss / dof)
    sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return FitResult(
        params=dict(zip(names, result.x)),
        sigmas=dict(zip(names, sig)),
        residual_norm=float(np.sqrt(rss / xdata.size)),
        converged=bool(result.status > 0),
        iterations=int(result.nfev),
    )


def _half_max_crossings(x: np.ndarray, y: np.ndarray, level: float, peak: int):
    """Linear-interpolated crossings of ``level`` on each side of ``peak``."""
    left = None
    for i in range(peak, 0, -1):
        if y[i - 1] <= level <= y[i]:
            frac = (level - y[i - 1]) / (y[i] - y[i - 1])
            left = x[i - 1] + frac * (x[i] - x[i - 1])
            break
    right = None
    for i in range(peak, y.size - 1):
        if y[i + 1] <= level <= y[i]:
            frac = (y[i] - level) / (y[i] - y[i + 1])
            right = x[i] + frac * (x[i + 1] - x[i])
            break
    return left, right


def fit_lorentzian(spec: BeatSpectrum, init: dict | None = None) -> FitResult:
    """Least-squares Lorentzian fit: amp, center, fwhm, base.

    Initial guesses come from the peak location/height and a half-maximum
    scan unless ``init`` overrides them.  Non-convergence returns the best
    point found with ``converged=False``; constant input raises.
    """
    f = np.asarray(spec.offset_grid, dtype=float)
    y = np.asarray(spec.power, dtype=float)
    if f.size < 8:
        raise InsufficientPointsError("need at least 8 points")
    if np.ptp(y) == 0.0:
        raise DegenerateDataError("power is constant")
    peak = int(np.argmax(y))
    base = float(np.min(y))
    amp = float(y[peak] - base)
    level = base + 0.5 * amp
    left, right = _half_max_crossings(f, y, level, peak)
    if left is not None and right is not None:
        width = right - left
    else:
        width = (f[-1] - f[0]) / 6.0
    p0 = {"amp": amp, "center": float(f[peak]), "fwhm": width, "base": base}
    if init:
        p0.update(init)
    out = _run_fit(_lorentzian_model, _lorentzian_jac, p0, f, y)
    # The model depends on fwhm^2 only; report the positive branch.
    params = dict(out.params)
    params["fwhm"] = abs(params["fwhm"])
    return FitResult(params, out.sigmas, out.residual_norm, out.converged, out.iterations)


def fit_exp_decay(
    tau: np.ndarray, value: np.ndarray, fix_asymptote: float | None = None
) -> FitResult:
    """Fit value(tau) = amp * exp(-tau/tau0) + asymptote.

    The asymptote is free by default; pass ``fix_asymptote`` to pin it (the
    constrained variant).  Requires >= 4 strictly increasing tau points.
    """
    t = np.asarray(tau, dtype=float)
    y = np.asarray(value, dtype=float)
    if t.size < 4:
        raise InsufficientPointsError("need at least 4 points")
    if np.any(np.diff(t) <= 0):
        raise ValueError("tau must be strictly increasing")
    if np.ptp(y) == 0.0:
        raise DegenerateDataError("values are constant")
    base0 = float(y[-1])
    amp0 = float(y[0] - base0)
    span = t[-1] - t[0]
    tau0 = span / 3.0
    if fix_asymptote is None:
        p0 = {"amp": amp0, "tau0": tau0, "base": base0}
        return _run_fit(_exp_decay_model, _exp_decay_jac, p0, t, y)

    fixed = float(fix_asymptote)

    def model(p, tt):
        return _exp_decay_model(np.array([p[0], p[1], fixed]), tt)

    def jac(p, tt):
        return _exp_decay_jac(np.array([p[0], p[1], fixed]), tt)[:, :2]

    p0 = {"amp": amp0 + base0 - fixed, "tau0": tau0}
    out = _run_fit(model, jac, p0, t, y)
    params = dict(out.params)
    params["base"] = fixed
    sigmas = dict(out.sigmas)
    sigmas["base"] = 0.0
    return FitResult(params, sigmas, out.residual_norm, out.converged, out.iterations)


def extract_fwhm(spec: BeatSpectrum) -> float:
    """Model-free full width at half maximum by linear interpolation [Hz].

    Falls back to the Lorentzian fit when the two one-sided half-widths
    disagree by more than 20% (noisy or asymmetric crossings).
    """
    f = np.asarray(spec.offset_grid, dtype=float)
    y = np.asarray(spec.power, dtype=float)
    peak = int(np.argmax(y))
    base = float(np.min(y))
    if y[peak] <= base:
        raise NoPeakError("no peak above baseline")
    level = base + 0.5 * (y[peak] - base)
    left, right = _half_max_crossings(f, y, level, peak)
    if left is None or right is None:
        raise NoPeakError("half-maximum level is never crossed")
    wide = 2.0 * max(right - f[peak], f[peak] - left)
    slim = 2.0 * min(right - f[peak], f[peak] - left)
    if wide > 0 and (wide - slim) / wide > 0.2:
        return float(fit_lorentzian(spec).params["fwhm"])
    return float(right - left)
