"""End-to-end scenario runners and their machine-readable reports.

Each runner has two routes sharing one configuration: a Monte Carlo route
(synthesized time series, field-level mixing, Welch analysis) and a
closed-form fast route (spectral maps plus the exact Gaussian-phase beat
identity).  They agree within Monte Carlo statistics; the fast route is the
deterministic reference, the Monte Carlo route is the experiment stand-in.

Detection floors are added after propagation (they model the measurement
chain, not the medium).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    BeatSpectrum,
    beat_signal,
    beat_spectrum_from_phase_psd,
    extract_fwhm,
    apply_amplifier,
    fit_exp_decay,
    fit_lorentzian,
    FitResult,
    NoPeakError,
)
from .config import ConfigError, ScenarioConfig
from .medium import (
    LoopPhase,
    Scheme,
    max_transfer_rate,
    transfer_rate_lambda,
    transparency_width,
)
from .oracle import (
    PhaseEnsemble,
    PhaseSeries,
    apply_mixing,
    build_mixing,
    estimate_spectrum_set,
    member_seeds,
    mix_phase_block,
    synth_phase_noise,
    wiener_phase,
)
from .spectra import (
    PathAccumulator,
    SpectrumSet,
    accumulate_path,
    coherence,
    new_accumulator,
    propagate_spectra,
)

TWO_PI = 2.0 * math.pi


class NumericalError(RuntimeError):
    """A fit or numerical stage failed to converge."""


@dataclass
class ScenarioReport:
    """Rows, summary metrics, emitted spectra, and provenance of one run."""

    scenario: str
    rows: list[dict]
    summary: dict
    spectra: dict[str, BeatSpectrum] = field(default_factory=dict)
    curves: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _rfft_omega(n_samples: int, sample_rate: float) -> np.ndarray:
    return TWO_PI * np.fft.rfftfreq(n_samples, d=1.0 / sample_rate)


def _accumulate_snapshots(
    cfg: ScenarioConfig, omega: np.ndarray, taus: tuple[float, ...]
) -> list[PathAccumulator]:
    """Integrate the path to each requested optical density (incremental)."""
    drive = cfg.drive()
    medium = cfg.medium()
    acc = new_accumulator(omega, phi0=cfg.loop_phase())
    out = []
    for target in taus:
        while acc.tau < target - 1e-12:
            step = min(cfg.tau_step, target - acc.tau)
            acc = accumulate_path(
                acc, step, drive, medium, cfg.attenuation, cfg.strength
            )
        out.append(acc)
    return out


def _wiener_psd(linewidth_hz: float, omega: np.ndarray) -> np.ndarray:
    """Two-sided phase spectrum of a random-walk phase, DC bin zeroed."""
    w = np.zeros_like(omega)
    nz = omega > 0
    w[nz] = linewidth_hz / omega[nz] ** 2
    return w


def _injected_psd(cfg: ScenarioConfig, omega: np.ndarray) -> np.ndarray:
    """Two-sided spectrum of the injected (amplifier-shaped) phase noise."""
    w = np.full_like(omega, cfg.noise_level / (4.0 * np.pi))
    w[omega > TWO_PI * cfg.band_limit_hz] = 0.0
    w[0] = 0.0
    if cfg.amplifier_enabled:
        w *= cfg.amplifier().magnitude(omega / TWO_PI) ** 2
    return w


def _floor_psd(cfg: ScenarioConfig, omega: np.ndarray) -> np.ndarray:
    return np.full_like(omega, cfg.floor_level / (4.0 * np.pi))


def _injected_series(cfg: ScenarioConfig, seed) -> PhaseSeries:
    series = synth_phase_noise(
        seed, cfg.band_limit_hz, cfg.noise_level, cfg.n_samples, cfg.sample_rate_hz
    )
    if cfg.amplifier_enabled:
        series = apply_amplifier(series, cfg.amplifier())
    return series


def _floor_series(cfg: ScenarioConfig, seed) -> np.ndarray:
    return synth_phase_noise(
        seed, cfg.sample_rate_hz / 2, cfg.floor_level, cfg.n_samples, cfg.sample_rate_hz
    ).samples


def _beat_pair(
    cfg: ScenarioConfig, phases_a: np.ndarray, phases_b: np.ndarray
) -> BeatSpectrum:
    a = PhaseSeries(cfg.sample_rate_hz, phases_a)
    b = PhaseSeries(cfg.sample_rate_hz, phases_b)
    return beat_signal(a, 0.0, b, 0.0, cfg.segment_len, 0.5, cfg.window)


def _fwhm_with_sigma(cfg: ScenarioConfig, psi: np.ndarray) -> tuple[float, float]:
    """Width of the pair beat plus a quarter-split scatter estimate."""
    full = extract_fwhm(_beat_pair(cfg, psi, np.zeros_like(psi)))
    quarter = psi.size // 4
    widths = []
    if quarter >= cfg.segment_len and quarter >= 8:
        for k in range(4):
            part = psi[k * quarter : (k + 1) * quarter]
            try:
                widths.append(
                    extract_fwhm(_beat_pair(cfg, part, np.zeros_like(part)))
                )
            except NoPeakError:
                continue
    if len(widths) >= 2:
        sigma = float(np.std(widths, ddof=1) / math.sqrt(len(widths)))
    else:
        sigma = cfg.sample_rate_hz / cfg.n_samples
    return float(full), sigma


def dip_depth_db(
    spec: BeatSpectrum,
    resolution_bandwidth: float,
    low_band: tuple[float, float] = (0.0, 0.4e6),
    mid_band: tuple[float, float] = (1e6, 10e6),
) -> float:
    """Mean power in the mid band over the low band, in dB.

    Positive values mean the spectrum is suppressed around the carrier.  The
    carrier itself is excluded: the low band starts at least four resolution
    bandwidths away from zero offset.
    """
    f = np.abs(spec.offset_grid)
    lo_min = max(low_band[0], 4.0 * resolution_bandwidth)
    low = (f >= lo_min) & (f <= low_band[1])
    mid = (f >= mid_band[0]) & (f <= mid_band[1])
    if not np.any(low) or not np.any(mid):
        raise ValueError("dip bands contain no grid points")
    return float(
        10.0 * np.log10(np.mean(spec.power[mid]) / np.mean(spec.power[low]))
    )


def _coherence_bands(
    s_out: SpectrumSet, gamma_g: float
) -> tuple[float, float]:
    """Mean coherence well inside and well outside the transparency window."""
    coh = coherence(s_out)
    omega = s_out.omega_grid
    low = (omega > 0) & (omega < gamma_g / 3.0)
    high = (omega > 3.0 * gamma_g) & (omega < 10.0 * gamma_g)
    c_low = float(np.mean(coh.coherence[low])) if np.any(low) else float("nan")
    c_high = float(np.mean(coh.coherence[high])) if np.any(high) else float("nan")
    return c_low, c_high


def _mean_band_power(spec: BeatSpectrum, lo: float, hi: float) -> float:
    mask = (np.abs(spec.offset_grid) >= lo) & (np.abs(spec.offset_grid) <= hi)
    return float(np.mean(spec.power[mask]))


def _provenance(cfg: ScenarioConfig) -> dict:
    return {
        "scenario": cfg.scenario,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "mode": cfg.mode,
        "version": __version__,
    }


# ---------------------------------------------------------------------------
# Scenario: noise transfer at fixed optical density
# ---------------------------------------------------------------------------


def run_noise_transfer(cfg: ScenarioConfig) -> ScenarioReport:
    """Single-field spectra at fixed tau for resonant and detuned drive,
    plus the transfer-efficiency profile versus Raman detuning."""
    if cfg.scenario != "noise-transfer":
        raise ConfigError(f"config built for {cfg.scenario!r}")
    omega = _rfft_omega(cfg.n_samples, cfg.sample_rate_hz)
    medium = cfg.medium()
    spectra: dict[str, BeatSpectrum] = {}
    rows = []
    summary: dict = {}

    detunings = [0.0, cfg.transfer_detuning_hz]
    seeds = member_seeds(cfg.seed, 2 * len(detunings) + 1)
    for idx, det_hz in enumerate(detunings):
        det_cfg = dataclasses.replace(cfg, raman_detuning_hz=det_hz)
        acc = _accumulate_snapshots(det_cfg, omega, (cfg.tau,))[0]
        tag = f"dr{det_hz / 1e6:g}mhz"

        w_inj = _injected_psd(cfg, omega)
        w_floor = _floor_psd(cfg, omega)
        s0 = SpectrumSet(
            omega_grid=omega,
            w11=w_inj,
            w22=np.zeros_like(omega),
            re_w12=np.zeros_like(omega),
            im_w12=np.zeros_like(omega),
        )
        s_out = propagate_spectra(s0, acc.x)

        if cfg.mode == "fast":
            s1 = beat_spectrum_from_phase_psd(
                s_out.w11 + w_floor, cfg.sample_rate_hz, cfg.n_samples
            )
            s2 = beat_spectrum_from_phase_psd(
                s_out.w22 + w_floor, cfg.sample_rate_hz, cfg.n_samples
            )
            u = np.exp(-acc.x)
            w_psi = w_inj * u * u + 2.0 * _floor_psd(cfg, omega)
            psi_beat = beat_spectrum_from_phase_psd(
                w_psi, cfg.sample_rate_hz, cfg.n_samples
            )
        else:
            phi1 = _injected_series(cfg, seeds[2 * idx]).samples
            phases = np.stack([phi1, np.zeros_like(phi1)])
            mixing = build_mixing(acc.x, Scheme.LAMBDA, omega_grid=omega)
            mixed = mix_phase_block(phases, mixing)
            floor_gen = seeds[2 * idx + 1].spawn(2)
            meas1 = mixed[0] + _floor_series(cfg, floor_gen[0])
            meas2 = mixed[1] + _floor_series(cfg, floor_gen[1])
            zero = np.zeros_like(meas1)
            s1 = _beat_pair(cfg, meas1, zero)
            s2 = _beat_pair(cfg, meas2, zero)
            psi_beat = _beat_pair(cfg, meas1, meas2)

        spectra[f"s1_{tag}"] = s1
        spectra[f"s2_{tag}"] = s2
        gamma_g = transparency_width(medium, det_cfg.drive())
        fwhm, fwhm_sigma = _beat_fwhm_safe(psi_beat, cfg)
        c_low, c_high = _coherence_bands(s_out, gamma_g)
        rows.append(
            {
                "tau": cfg.tau,
                "fwhm_hz": fwhm,
                "fwhm_sigma_hz": fwhm_sigma,
                "coherence_low": c_low,
                "coherence_high": c_high,
            }
        )
        # Transfer level near the window edge versus the source level.
        gamma_g_hz = gamma_g / TWO_PI
        band = (gamma_g_hz, 2.0 * gamma_g_hz)
        s1_band = _mean_band_power(s1, *band)
        s2_band = _mean_band_power(s2, *band)
        summary[f"transfer_db_{tag}"] = 10.0 * math.log10(s2_band / s1_band)
        probe = cfg.transfer_detuning_hz
        s2_at_probe = _mean_band_power(s2, 0.8 * probe, 1.2 * probe)
        s2_low = _mean_band_power(s2, 0.25 * probe, 0.5 * probe)
        summary[f"selectivity_db_{tag}"] = 10.0 * math.log10(
            s2_at_probe / max(s2_low, 1e-300)
        )

    eff_grid_hz, eff, fit = _efficiency_sweep(cfg, seeds[-1])
    spectra["efficiency"] = BeatSpectrum(
        offset_grid=eff_grid_hz - cfg.probe_freq_hz, power=np.maximum(eff, 0.0)
    )
    gamma_g_lambda = transparency_width(
        medium, dataclasses.replace(cfg, raman_detuning_hz=0.0).drive()
    )
    summary.update(
        {
            "efficiency_fit_hwhm_hz": fit.params["fwhm"] / 2.0,
            "efficiency_fit_hwhm_sigma_hz": fit.sigmas["fwhm"] / 2.0,
            "efficiency_fit_center_offset_hz": fit.params["center"],
            "efficiency_fit_converged": fit.converged,
            "gamma_g_hz": gamma_g_lambda / TWO_PI,
        }
    )
    report = ScenarioReport(
        scenario=cfg.scenario,
        rows=rows,
        summary=summary,
        spectra=spectra,
        provenance=_provenance(cfg),
    )
    return report


def _beat_fwhm_safe(spec: BeatSpectrum, cfg: ScenarioConfig) -> tuple[float, float]:
    try:
        return extract_fwhm(spec), cfg.sample_rate_hz / cfg.segment_len
    except NoPeakError:
        return float("nan"), float("nan")


def _efficiency_sweep(cfg: ScenarioConfig, seed) -> tuple[np.ndarray, np.ndarray, FitResult]:
    """Transfer efficiency versus Raman detuning at the probe frequency.

    Runs at fixed window width (no attenuation) over a short path so the
    measured per-unit-path rate inverts cleanly from the transferred level;
    the result is an exact Lorentzian in the detuning, of half width equal
    to the transparency width.
    """
    medium = cfg.medium()
    drive0 = dataclasses.replace(cfg, raman_detuning_hz=0.0).drive()
    gamma_g = transparency_width(medium, drive0)
    probe = TWO_PI * cfg.probe_freq_hz
    tau_probe = 0.5
    span = 8.0 * gamma_g
    detunings = probe + np.linspace(-span, span, 41)

    n_e = 4096
    omega_e = _rfft_omega(n_e, cfg.sample_rate_hz)
    k_probe = int(np.argmin(np.abs(omega_e - probe)))
    sel = slice(max(k_probe - 1, 0), k_probe + 2)

    x_meas = np.empty(detunings.size)
    if cfg.mode == "fast":
        for i, det in enumerate(detunings):
            drive = dataclasses.replace(
                cfg, raman_detuning_hz=det / TWO_PI
            ).drive()
            kappa = transfer_rate_lambda(omega_e[sel], drive, medium)
            x_true = cfg.strength * tau_probe * kappa / max_transfer_rate(medium, drive)
            eff = 0.25 * (1.0 - np.exp(-x_true)) ** 2
            x_meas[i] = _invert_transfer(np.mean(eff))
    else:
        children = seed.spawn(cfg.ensemble_size)
        members = np.stack(
            [
                np.stack(
                    [
                        synth_phase_noise(
                            child, cfg.band_limit_hz, cfg.noise_level, n_e,
                            cfg.sample_rate_hz,
                        ).samples,
                        np.zeros(n_e),
                    ]
                )
                for child in children
            ]
        )
        ens = PhaseEnsemble(sample_rate=cfg.sample_rate_hz, phases=members, seed=cfg.seed)
        w11_in = estimate_spectrum_set(ens).w11
        for i, det in enumerate(detunings):
            drive = dataclasses.replace(cfg, raman_detuning_hz=det / TWO_PI).drive()
            kappa = transfer_rate_lambda(omega_e, drive, medium)
            x_true = cfg.strength * tau_probe * kappa / max_transfer_rate(medium, drive)
            mixed = apply_mixing(ens, build_mixing(x_true, Scheme.LAMBDA, omega_grid=omega_e))
            est = estimate_spectrum_set(mixed)
            eff = est.w22[sel] / w11_in[sel]
            x_meas[i] = _invert_transfer(np.mean(eff))

    fit = fit_lorentzian(
        BeatSpectrum(offset_grid=(detunings - probe) / TWO_PI, power=np.maximum(x_meas, 0.0))
    )
    if not fit.converged:
        raise NumericalError("transfer-efficiency Lorentzian fit did not converge")
    return detunings / TWO_PI, x_meas, fit


def _invert_transfer(efficiency: float) -> float:
    """Recover the path gain from the transferred fraction W22/W11(0)."""
    root = min(2.0 * math.sqrt(max(efficiency, 0.0)), 1.0 - 1e-12)
    return -math.log1p(-root)


# ---------------------------------------------------------------------------
# Scenario: beat-width decay sweep over optical density
# ---------------------------------------------------------------------------


def run_fwhm_sweep(cfg: ScenarioConfig) -> ScenarioReport:
    """Width of the pair beat versus optical density, with decay fits."""
    if cfg.scenario != "fwhm-sweep":
        raise ConfigError(f"config built for {cfg.scenario!r}")
    if len(cfg.tau_list) < 4:
        raise ConfigError("path.tau_list: need at least 4 points for the sweep")
    omega = _rfft_omega(cfg.n_samples, cfg.sample_rate_hz)
    medium = cfg.medium()
    drive = cfg.drive()
    is_loop = drive.scheme is Scheme.DOUBLE_LAMBDA
    snapshots = _accumulate_snapshots(cfg, omega, cfg.tau_list)

    w1 = _wiener_psd(cfg.linewidth1_hz, omega) + _injected_psd(cfg, omega)
    w2 = _wiener_psd(cfg.linewidth2_hz, omega)
    w_floor = _floor_psd(cfg, omega)

    # A small stack of independent realizations per tau point: the averaged
    # beat tames extraction noise and their scatter gives the width error.
    n_real = 4
    seeds = member_seeds(cfg.seed, n_real)
    if cfg.mode != "fast":
        n_comp = 4 if is_loop else 2
        stacks = []
        floor_stacks = []
        for s in seeds:
            parts = s.spawn(4)
            phi1 = wiener_phase(
                parts[0], cfg.linewidth1_hz, cfg.n_samples, cfg.sample_rate_hz
            ).samples
            if cfg.noise_level > 0:
                phi1 = phi1 + _injected_series(cfg, parts[2]).samples
            phi2 = wiener_phase(
                parts[1], cfg.linewidth2_hz, cfg.n_samples, cfg.sample_rate_hz
            ).samples
            stacks.append(
                np.stack([phi1, phi2] + [np.zeros_like(phi1)] * (n_comp - 2))
            )
            floor_stacks.append([_floor_series(cfg, f) for f in parts[3].spawn(2)])

    rows = []
    for acc in snapshots:
        gamma_g_now = transparency_width(
            medium,
            dataclasses.replace(drive, rabi=drive.rabi * math.sqrt(acc.rabi2_scale)),
        )
        s0 = SpectrumSet(
            omega_grid=omega,
            w11=w1,
            w22=w2,
            re_w12=np.zeros_like(omega),
            im_w12=np.zeros_like(omega),
        )
        s_out = propagate_spectra(s0, acc.x)
        c_low, c_high = _coherence_bands(s_out, gamma_g_now)

        if cfg.mode == "fast":
            w_psi = (w1 + w2) * np.exp(-2.0 * acc.x) + 2.0 * w_floor
            beat = beat_spectrum_from_phase_psd(
                w_psi, cfg.sample_rate_hz, cfg.n_samples
            )
            fwhm = extract_fwhm(beat)
            sigma = cfg.sample_rate_hz / cfg.n_samples
        else:
            scheme = Scheme.DOUBLE_LAMBDA if is_loop else Scheme.LAMBDA
            mixing = build_mixing(acc.x, scheme, omega_grid=omega)
            specs = []
            widths = []
            for phases, floors in zip(stacks, floor_stacks):
                mixed = mix_phase_block(phases, mixing)
                psi = mixed[0] + floors[0] - mixed[1] - floors[1]
                spec = _beat_pair(cfg, psi, np.zeros_like(psi))
                specs.append(spec)
                try:
                    widths.append(extract_fwhm(spec))
                except NoPeakError:
                    continue
            mean_spec = BeatSpectrum(
                offset_grid=specs[0].offset_grid,
                power=np.mean([s.power for s in specs], axis=0),
            )
            fwhm = extract_fwhm(mean_spec)
            if len(widths) >= 2:
                sigma = float(np.std(widths, ddof=1) / math.sqrt(len(widths)))
            else:
                sigma = cfg.sample_rate_hz / cfg.segment_len
        rows.append(
            {
                "tau": acc.tau,
                "fwhm_hz": fwhm,
                "fwhm_sigma_hz": sigma,
                "coherence_low": c_low,
                "coherence_high": c_high,
            }
        )

    taus = np.array([r["tau"] for r in rows])
    widths = np.array([r["fwhm_hz"] for r in rows])
    free = fit_exp_decay(taus, widths)
    pinned = fit_exp_decay(taus, widths, fix_asymptote=0.0)
    if not free.converged:
        raise NumericalError("width-decay fit did not converge")
    summary = {
        "asymptote_hz": free.params["base"],
        "asymptote_sigma_hz": free.sigmas["base"],
        "amplitude_hz": free.params["amp"],
        "amplitude_sigma_hz": free.sigmas["amp"],
        "decay_tau0": free.params["tau0"],
        "decay_tau0_sigma": free.sigmas["tau0"],
        "pinned_amplitude_hz": pinned.params["amp"],
        "pinned_decay_tau0": pinned.params["tau0"],
        "gamma_dark_hz": cfg.gamma_dark_hz,
        "fit_converged": free.converged,
    }
    return ScenarioReport(
        scenario=cfg.scenario,
        rows=rows,
        summary=summary,
        curves={"fwhm_vs_tau": (taus, widths)},
        provenance=_provenance(cfg),
    )


# ---------------------------------------------------------------------------
# Scenario: low-frequency dip contrast of the two pair beats
# ---------------------------------------------------------------------------


def run_lowfreq_dip(cfg: ScenarioConfig) -> ScenarioReport:
    """Pair beats of the noisy and initially silent pairs at fixed tau."""
    if cfg.scenario != "lowfreq-dip":
        raise ConfigError(f"config built for {cfg.scenario!r}")
    if cfg.scheme_enum is not Scheme.DOUBLE_LAMBDA:
        raise ConfigError("scheme.scheme: lowfreq-dip requires double-lambda")
    omega = _rfft_omega(cfg.n_samples, cfg.sample_rate_hz)
    medium = cfg.medium()
    acc = _accumulate_snapshots(cfg, omega, (cfg.tau,))[0]
    w_inj = _injected_psd(cfg, omega)
    w_floor = _floor_psd(cfg, omega)

    if cfg.mode == "fast":
        w_psi12 = w_inj * np.exp(-2.0 * acc.x) + 2.0 * w_floor
        w_psi34 = 2.0 * w_floor.copy()
        w_psi34[0] = 0.0
        s12 = beat_spectrum_from_phase_psd(w_psi12, cfg.sample_rate_hz, cfg.n_samples)
        s34 = beat_spectrum_from_phase_psd(w_psi34, cfg.sample_rate_hz, cfg.n_samples)
    else:
        seeds = member_seeds(cfg.seed, 2)
        phi1 = _injected_series(cfg, seeds[0]).samples
        phases = np.stack([phi1] + [np.zeros_like(phi1)] * 3)
        mixed = mix_phase_block(
            phases, build_mixing(acc.x, Scheme.DOUBLE_LAMBDA, omega_grid=omega)
        )
        floors = [_floor_series(cfg, s) for s in seeds[1].spawn(4)]
        meas = mixed + np.stack(floors)
        s12 = _beat_pair(cfg, meas[0], meas[1])
        s34 = _beat_pair(cfg, meas[2], meas[3])

    rbw = cfg.sample_rate_hz / (
        cfg.segment_len if cfg.mode != "fast" else cfg.n_samples
    )
    dip12 = dip_depth_db(s12, rbw)
    dip34 = dip_depth_db(s34, rbw)

    w_psi12_model = w_inj * np.exp(-2.0 * acc.x) + 2.0 * w_floor
    s_out = propagate_spectra(
        SpectrumSet(
            omega_grid=omega,
            w11=w_inj,
            w22=np.zeros_like(omega),
            re_w12=np.zeros_like(omega),
            im_w12=np.zeros_like(omega),
        ),
        acc.x,
    )
    gamma_g = transparency_width(medium, cfg.drive())
    c_low, c_high = _coherence_bands(s_out, gamma_g)
    fwhm, sigma = _beat_fwhm_safe(s12, cfg)
    rows = [
        {
            "tau": cfg.tau,
            "fwhm_hz": fwhm,
            "fwhm_sigma_hz": sigma,
            "coherence_low": c_low,
            "coherence_high": c_high,
        }
    ]
    summary = {
        "dip_s12_db": dip12,
        "dip_s34_db": dip34,
        "amplifier_enabled": cfg.amplifier_enabled,
        "residual_pair_noise_rad2": float(
            2.0 * np.trapezoid(w_psi12_model, omega)
        ),
    }
    return ScenarioReport(
        scenario=cfg.scenario,
        rows=rows,
        summary=summary,
        spectra={"s12": s12, "s34": s34},
        provenance=_provenance(cfg),
    )


# ---------------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------------


def _format_float(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_report(report: ScenarioReport, out_dir: str | Path) -> list[Path]:
    """Write spectra, the per-tau summary table, and a provenance sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for name, spec in report.spectra.items():
        path = out / f"{name}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("offset_hz,power\n")
            for f_hz, p in zip(spec.offset_grid, spec.power):
                fh.write(f"{_format_float(float(f_hz))},{_format_float(float(p))}\n")
        written.append(path)

    if report.rows:
        path = out / "summary.csv"
        cols = ["tau", "fwhm_hz", "fwhm_sigma_hz", "coherence_low", "coherence_high"]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(cols) + "\n")
            for row in report.rows:
                fh.write(",".join(_format_float(row[c]) for c in cols) + "\n")
        written.append(path)

    sidecar = dict(report.provenance)
    sidecar["summary"] = {
        k: (float(v) if isinstance(v, (int, float, np.floating)) and not isinstance(v, bool) else v)
        for k, v in report.summary.items()
    }
    path = out / "provenance.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    return written


RUNNERS = {
    "noise-transfer": run_noise_transfer,
    "fwhm-sweep": run_fwhm_sweep,
    "lowfreq-dip": run_lowfreq_dip,
}


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    return RUNNERS[cfg.scenario](cfg)
