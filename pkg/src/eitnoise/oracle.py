"""Time-domain Monte Carlo path: synthesize, mix, and re-estimate phase noise.

This is the independent verification route for the closed-form spectral maps:
band-limited phase noise is synthesized spectrally, field components are
mixed per frequency bin by the sum/difference (or four-channel) matrices that
realize the propagation laws at field level, and the spectra are re-estimated
from the ensemble.  Everything is a pure function of (seed, parameters); the
per-member seeds are derived by counter-based splitting so results do not
depend on scheduling.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .medium import Scheme
from .spectra import GridMismatchError, SpectrumSet

HEADER_MAGIC = b"EITNENS\x00"
HEADER_VERSION = 1
HEADER_SIZE = 64


class AliasingError(ValueError):
    """Requested band extends beyond the Nyquist frequency."""


class DimensionMismatchError(ValueError):
    """Mixing matrix dimension does not match the component count."""


class TooFewMembersError(ValueError):
    """Ensemble statistics need at least two members."""


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def member_seeds(master_seed: int, n: int) -> list[np.random.SeedSequence]:
    """Counter-based split of the master seed into ``n`` child sequences."""
    return np.random.SeedSequence(master_seed).spawn(n)


@dataclass(frozen=True)
class PhaseSeries:
    """Sampled phase of one field component [rad].

    Length must be a power of two (the mixing and estimation steps work on
    FFT bins; a power-of-two length keeps them exact and fast).
    """

    sample_rate: float  # Hz
    samples: np.ndarray

    def __post_init__(self) -> None:
        n = self.samples.shape[-1]
        if n < 2 or n & (n - 1):
            raise ValueError(f"series length must be a power of two, got {n}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")


@dataclass(frozen=True)
class PhaseEnsemble:
    """Stack of phase realizations, shape (members, components, samples)."""

    sample_rate: float  # Hz
    phases: np.ndarray
    seed: int = 0
    component_carriers: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.phases.ndim != 3:
            raise ValueError("phases must have shape (members, components, samples)")
        if self.phases.shape[0] < 2:
            raise TooFewMembersError("ensemble needs at least 2 members")
        n = self.phases.shape[-1]
        if n < 2 or n & (n - 1):
            raise ValueError("series length must be a power of two")

    @property
    def n_members(self) -> int:
        return self.phases.shape[0]

    @property
    def n_components(self) -> int:
        return self.phases.shape[1]

    @property
    def n_samples(self) -> int:
        return self.phases.shape[2]

    def to_file(self, path) -> None:
        """Raw dump: 64-byte header (magic, version, dims, rate) + float64 data."""
        header = struct.pack(
            "<8sIIIQdQ",
            HEADER_MAGIC,
            HEADER_VERSION,
            self.n_members,
            self.n_components,
            self.n_samples,
            self.sample_rate,
            self.seed,
        )
        header += b"\x00" * (HEADER_SIZE - len(header))
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(self.phases, dtype="<f8").tobytes())

    @classmethod
    def from_file(cls, path) -> "PhaseEnsemble":
        with open(path, "rb") as fh:
            raw = fh.read(HEADER_SIZE)
            magic, version, m, c, n, rate, seed = struct.unpack(
                "<8sIIIQdQ", raw[: struct.calcsize("<8sIIIQdQ")]
            )
            if magic != HEADER_MAGIC:
                raise ValueError("not an ensemble dump (bad magic)")
            if version != HEADER_VERSION:
                raise ValueError(f"unsupported dump version {version}")
            data = np.frombuffer(fh.read(), dtype="<f8").reshape(m, c, n)
        return cls(sample_rate=rate, phases=data.copy(), seed=seed)


@dataclass(frozen=True)
class MixingMatrix:
    """Per-frequency complex mixing coefficients on the rfft grid.

    ``matrix`` has shape (n_bins, dim, dim) and acts on the Fourier
    components of the field phases.  At zero path it is the identity.
    """

    omega_grid: np.ndarray  # rad/s, rfft bins
    matrix: np.ndarray
    scheme: Scheme = Scheme.LAMBDA


def synth_phase_noise(
    seed,
    band_limit: float,
    noise_level: float,
    n_samples: int,
    sample_rate: float,
) -> PhaseSeries:
    """Zero-mean phase series with a flat one-sided PSD inside the band.

    The spectrum is shaped directly in the frequency domain (independent
    complex Gaussian coefficients per bin, zero outside the band), giving
    exact band edges and, for the estimator, leakage-free periodograms.

    Parameters
    ----------
    band_limit : float
        Upper band edge [Hz]; must not exceed Nyquist.
    noise_level : float
        One-sided PSD inside the band [rad^2/Hz].
    """
    if band_limit > sample_rate / 2:
        raise AliasingError(
            f"band_limit {band_limit:g} Hz exceeds Nyquist {sample_rate / 2:g} Hz"
        )
    if noise_level < 0:
        raise ValueError("noise_level must be >= 0")
    rng = _as_rng(seed)
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / sample_rate)
    n_bins = freqs.size
    # E|X_k|^2 = noise_level * fs * N / 2 makes the one-sided PSD flat at
    # noise_level; DC stays zero (zero mean), the Nyquist bin must be real.
    sigma = np.sqrt(noise_level * sample_rate * n_samples / 4.0)
    coeff = sigma * (
        rng.standard_normal(n_bins) + 1j * rng.standard_normal(n_bins)
    )
    coeff[0] = 0.0
    coeff[-1] = np.sqrt(2.0) * coeff[-1].real
    coeff[freqs > band_limit] = 0.0
    samples = np.fft.irfft(coeff, n=n_samples)
    return PhaseSeries(sample_rate=sample_rate, samples=samples)


def wiener_phase(
    seed, linewidth: float, n_samples: int, sample_rate: float
) -> PhaseSeries:
    """Random-walk phase giving a Lorentzian line of FWHM ``linewidth`` [Hz].

    Increment variance 2*pi*linewidth*dt per sample reproduces the standard
    phase-diffusion structure function D(t) = 2*pi*linewidth*t.
    """
    if linewidth < 0:
        raise ValueError("linewidth must be >= 0")
    rng = _as_rng(seed)
    steps = rng.standard_normal(n_samples) * np.sqrt(
        2.0 * np.pi * linewidth / sample_rate
    )
    samples = np.cumsum(steps)
    samples -= samples[0]
    return PhaseSeries(sample_rate=sample_rate, samples=samples)


def build_mixing(
    x: np.ndarray,
    scheme: Scheme = Scheme.LAMBDA,
    *,
    phase: np.ndarray | None = None,
    x_intra: np.ndarray | None = None,
    omega_grid: np.ndarray | None = None,
) -> MixingMatrix:
    """Per-frequency field mixing realizing the spectral propagation laws.

    Two-field scheme: in the sum/difference basis the sum (dark combination)
    is preserved and the difference channel is scaled by exp(-x), optionally
    with a per-frequency phase used to calibrate the imaginary cross term.

    Closed-loop scheme: four channels built from the two intra-pair
    difference channels and the cross-pair (loop) channel; the global mean
    is preserved and the three orthogonal channels decay with the loop rate
    profile ``x`` (which may be negative: noise growth).  ``x_intra``
    optionally gives the common intra-pair difference channel its own
    profile.
    """
    x = np.asarray(x, dtype=float)
    if omega_grid is None:
        omega_grid = np.arange(x.size, dtype=float)
    if scheme is Scheme.LAMBDA:
        if np.any(x < 0):
            raise ValueError("two-field path gain must be non-negative")
        e = np.exp(-x).astype(complex)
        if phase is not None:
            theta = np.asarray(phase, dtype=float).copy()
            # DC and Nyquist bins of a real series are real: no phase there.
            theta[0] = 0.0
            theta[-1] = 0.0
            e = e * np.exp(1j * theta)
        m = np.empty((x.size, 2, 2), dtype=complex)
        m[:, 0, 0] = m[:, 1, 1] = 0.5 * (1.0 + e)
        m[:, 0, 1] = m[:, 1, 0] = 0.5 * (1.0 - e)
        return MixingMatrix(omega_grid=omega_grid, matrix=m, scheme=scheme)

    if not np.all(np.isfinite(x)):
        raise ValueError("closed-loop path gain must be finite")
    e_loop = np.exp(-x)
    e_intra = e_loop if x_intra is None else np.exp(-np.asarray(x_intra, dtype=float))
    # Pair-mean difference decays like the cross-pair coupling but never grows.
    e_mean = np.exp(-np.abs(x))
    # Orthonormal channel basis: global mean, pair-mean difference, common
    # intra-pair difference, loop (difference of pair differences).
    v = 0.5 * np.array(
        [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ]
    )
    diag = np.zeros((x.size, 4), dtype=complex)
    diag[:, 0] = 1.0
    diag[:, 1] = e_mean
    diag[:, 2] = e_intra
    diag[:, 3] = e_loop
    m = np.einsum("ca,ka,ab->kcb", v.T, diag, v)
    return MixingMatrix(omega_grid=omega_grid, matrix=m, scheme=scheme)


def mix_phase_block(phases: np.ndarray, m: MixingMatrix) -> np.ndarray:
    """Mix one realization's components (components, samples) per FFT bin."""
    dim = m.matrix.shape[-1]
    if phases.shape[0] != dim:
        raise DimensionMismatchError(
            f"block has {phases.shape[0]} components, matrix is {dim}x{dim}"
        )
    n = phases.shape[-1]
    if m.matrix.shape[0] != n // 2 + 1:
        raise GridMismatchError(
            f"matrix has {m.matrix.shape[0]} bins, series needs {n // 2 + 1}"
        )
    spec = np.fft.rfft(phases, axis=-1)
    mixed = np.einsum("kcd,dk->ck", m.matrix, spec)
    return np.fft.irfft(mixed, n=n, axis=-1)


def apply_mixing(ens: PhaseEnsemble, m: MixingMatrix) -> PhaseEnsemble:
    """Mix the ensemble's components per frequency bin; output stays real."""
    dim = m.matrix.shape[-1]
    if ens.n_components != dim:
        raise DimensionMismatchError(
            f"ensemble has {ens.n_components} components, matrix is {dim}x{dim}"
        )
    n_bins = ens.n_samples // 2 + 1
    if m.matrix.shape[0] != n_bins:
        raise GridMismatchError(
            f"matrix has {m.matrix.shape[0]} bins, series needs {n_bins}"
        )
    spec = np.fft.rfft(ens.phases, axis=-1)
    mixed = np.einsum("kcd,mdk->mck", m.matrix, spec)
    out = np.fft.irfft(mixed, n=ens.n_samples, axis=-1)
    return PhaseEnsemble(
        sample_rate=ens.sample_rate,
        phases=out,
        seed=ens.seed,
        component_carriers=ens.component_carriers,
    )


def estimate_spectrum_set(
    ens: PhaseEnsemble,
    pair: tuple[int, int] = (0, 1),
    nperseg: int | None = None,
    window: str = "boxcar",
    return_stderr: bool = False,
):
    """Ensemble/segment-averaged auto- and cross-spectra of a component pair.

    Returns a :class:`SpectrumSet` on the two-sided angular-frequency
    convention (rad^2 s versus rad/s).  With ``return_stderr=True`` a second
    SpectrumSet holds the per-bin standard errors of the averaged estimates
    (member-to-member scatter; members must be independent realizations).

    The default boxcar/full-length estimator is leakage-free for spectrally
    synthesized inputs, which keeps the comparison against the closed forms
    unbiased bin by bin.
    """
    if ens.n_members < 2:
        raise TooFewMembersError("need >= 2 members")
    i, j = pair
    n = ens.n_samples
    if nperseg is None:
        nperseg = n
    if nperseg > n or nperseg & (nperseg - 1):
        raise ValueError("nperseg must be a power of two <= series length")
    if window == "boxcar":
        taper = np.ones(nperseg)
    else:
        from scipy.signal import get_window

        taper = get_window(window, nperseg)
    norm = 1.0 / (2.0 * np.pi * ens.sample_rate * np.sum(taper**2))

    n_seg = n // nperseg
    a = ens.phases[:, i, : n_seg * nperseg].reshape(ens.n_members, n_seg, nperseg)
    b = ens.phases[:, j, : n_seg * nperseg].reshape(ens.n_members, n_seg, nperseg)
    fa = np.fft.rfft(a * taper, axis=-1)
    fb = np.fft.rfft(b * taper, axis=-1)
    # Per-member averages over segments; member scatter gives the stderr.
    p11 = (np.abs(fa) ** 2).mean(axis=1) * norm
    p22 = (np.abs(fb) ** 2).mean(axis=1) * norm
    p12 = (fa * np.conj(fb)).mean(axis=1) * norm

    omega = 2.0 * np.pi * np.fft.rfftfreq(nperseg, d=1.0 / ens.sample_rate)
    out = SpectrumSet(
        omega_grid=omega,
        w11=p11.mean(axis=0),
        w22=p22.mean(axis=0),
        re_w12=p12.real.mean(axis=0),
        im_w12=p12.imag.mean(axis=0),
    )
    if not return_stderr:
        return out
    root_m = np.sqrt(ens.n_members)
    err = SpectrumSet(
        omega_grid=omega,
        w11=p11.std(axis=0, ddof=1) / root_m,
        w22=p22.std(axis=0, ddof=1) / root_m,
        re_w12=p12.real.std(axis=0, ddof=1) / root_m,
        im_w12=p12.imag.std(axis=0, ddof=1) / root_m,
    )
    return out, err


def eq4_phase_calibration(s0: SpectrumSet, x: np.ndarray) -> np.ndarray:
    """Difference-channel phase matching the closed-form cross-spectrum phase.

    A real sum/difference mixing reproduces the auto-spectra and the real
    cross term but yields zero imaginary part.  This calibration rotates the
    difference channel by the argument of the closed-form cross-spectrum so
    the estimated imaginary part follows it too (a calibration, not a
    prediction; enable explicitly where wanted).
    """
    x = np.asarray(x, dtype=float)
    u = np.exp(-x)
    re_target = 0.25 * (s0.w11 + s0.w22) * (1.0 - u * u)
    im_target = 0.5 * (s0.w11 - s0.w22) * u
    theta = np.arctan2(im_target, re_target)
    # No propagation, no mixing: keep the identity limit exact.
    theta[x == 0.0] = 0.0
    return theta
