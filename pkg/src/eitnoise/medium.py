"""Medium/drive parameters and noise-transfer rates for driven Raman media.

All frequencies and rates are angular (rad/s) unless a name says otherwise.
The transfer rates below are the effective per-length damping rates of the
relative-phase (bright) channel of a two-field Raman pair; they are taken as
given empirical laws of the driven medium, not derived from density-matrix
equations here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi

# Sodium D1 numbers used as defaults: excited-state decay rate and the
# ground-state hyperfine splitting of 1771.6 MHz.
DEFAULT_GAMMA = TWO_PI * 9.79e6  # rad/s
DEFAULT_SPLITTING = TWO_PI * 1771.6e6  # rad/s


class Scheme(Enum):
    """Excitation topology: open two-field Lambda or closed four-field loop."""

    LAMBDA = "lambda"
    DOUBLE_LAMBDA = "double-lambda"


class DegenerateMediumError(ValueError):
    """Transparency window has zero width (no dark-state decay, no drive)."""


@dataclass(frozen=True)
class MediumParams:
    """Atomic/optical constants of the vapor.

    Parameters
    ----------
    gamma : float
        Spontaneous decay rate of the excited state [rad/s].
    gamma_dark : float
        Decay rate of the ground-state (dark) coherence [rad/s].
    coupling : float
        Transition coupling element, the per-atom field-medium coupling
        omega * d^2 / (hbar c) [1/m].
    density : float
        Atom number density [1/m^3].
    splitting : float
        Ground-state hyperfine splitting [rad/s].
    """

    gamma: float = DEFAULT_GAMMA
    gamma_dark: float = TWO_PI * 0.3e6
    coupling: float = 1.0e-13
    density: float = 1.0e17
    splitting: float = DEFAULT_SPLITTING

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.gamma_dark < 0:
            raise ValueError("gamma_dark must be >= 0")
        if self.coupling <= 0:
            raise ValueError("coupling must be > 0")
        if self.density < 0:
            raise ValueError("density must be >= 0")
        if self.splitting <= 0:
            raise ValueError("splitting must be > 0")


@dataclass(frozen=True)
class DriveParams:
    """Drive-field parameters shared by all components of a scheme.

    Parameters
    ----------
    rabi : float
        Rabi frequency magnitude |Omega| (all components assumed equal) [rad/s].
    scheme : Scheme
        Which excitation topology the drive realizes.
    raman_detuning : float
        Two-photon (Raman) detuning of the pair from the ground splitting [rad/s].
    """

    rabi: float = TWO_PI * 3.64e6
    scheme: Scheme = Scheme.LAMBDA
    raman_detuning: float = 0.0

    def __post_init__(self) -> None:
        if self.rabi < 0:
            raise ValueError("rabi must be >= 0")
        if not isinstance(self.scheme, Scheme):
            raise ValueError(f"scheme must be a Scheme, got {self.scheme!r}")


@dataclass(frozen=True)
class LoopPhase:
    """Mean relative phase of the closed four-field excitation loop [rad].

    Stored unwrapped.  Multiples of 2*pi are attracting fixed points of the
    relaxation law; odd multiples of pi are unstable fixed points.
    """

    phi0: float = 0.0


@dataclass(frozen=True)
class TransferProfile:
    """Noise-transfer rate sampled on a grid of noise frequencies."""

    omega_grid: np.ndarray  # rad/s, strictly increasing
    kappa: np.ndarray  # 1/m

    def validate(self, scheme: Scheme = Scheme.LAMBDA) -> None:
        if self.omega_grid.shape != self.kappa.shape:
            raise ValueError("omega_grid and kappa must have equal shape")
        if np.any(np.diff(self.omega_grid) <= 0):
            raise ValueError("omega_grid must be strictly increasing")
        if not np.all(np.isfinite(self.kappa)):
            raise ValueError("kappa must be finite everywhere")
        if scheme is Scheme.LAMBDA and np.any(self.kappa < 0):
            raise ValueError("Lambda-scheme kappa must be non-negative")


def transparency_width(medium: MediumParams, drive: DriveParams) -> float:
    """Width of the transparency window, power-broadened by the drive.

    The dark-state decay rate sets the floor; the drive adds 2|Omega|^2/gamma
    for a Lambda pair and 4|Omega|^2/gamma for the four-field loop (twice as
    many fields saturate the two-photon transition).
    """
    ac = drive.rabi**2 / medium.gamma
    factor = 4.0 if drive.scheme is Scheme.DOUBLE_LAMBDA else 2.0
    return medium.gamma_dark + factor * ac


def max_transfer_rate(medium: MediumParams, drive: DriveParams) -> float:
    """Peak noise-transfer rate 4*mu*|Omega|^2*N / (gamma^2 * Gamma_g) [1/m]."""
    gamma_g = transparency_width(medium, drive)
    if gamma_g == 0.0:
        raise DegenerateMediumError(
            "transparency window has zero width (gamma_dark = 0 and rabi = 0)"
        )
    return 4.0 * medium.coupling * drive.rabi**2 * medium.density / (
        medium.gamma**2 * gamma_g
    )


def transfer_rate_lambda(
    omega: float | np.ndarray, drive: DriveParams, medium: MediumParams
) -> float | np.ndarray:
    """Two-field noise-transfer rate at noise frequency ``omega`` [1/m].

    A Lorentzian resonance of width Gamma_g in the Raman detuning (centered
    on the noise frequency) times a high-pass factor that switches off the
    transfer for noise slow enough to be followed adiabatically by the dark
    state.  Bounded by [0, max_transfer_rate]; exactly zero at omega = 0.
    """
    gamma_g = transparency_width(medium, drive)
    kappa0 = max_transfer_rate(medium, drive)
    g2 = gamma_g**2
    w = np.asarray(omega, dtype=float)
    detuned = (w - drive.raman_detuning) ** 2
    out = kappa0 * (g2 / (g2 + detuned)) * (w**2 / (g2 + w**2))
    return out if isinstance(omega, np.ndarray) else float(out)


def transfer_rate_double_lambda(
    omega: float | np.ndarray,
    phi0: LoopPhase,
    drive: DriveParams,
    medium: MediumParams,
) -> float | np.ndarray:
    """Four-field (closed-loop) noise-transfer rate at ``omega`` [1/m].

    Inside the transparency window the rate is kappa0*cos(phi0); outside it
    approaches kappa0*(1 + cos(phi0)).  There is no low-frequency exclusion,
    and the rate is negative (noise growth) around phi0 = pi.
    Range: [-kappa0, 2*kappa0].
    """
    gamma_g = transparency_width(medium, drive)
    kappa0 = max_transfer_rate(medium, drive)
    g2 = gamma_g**2
    w = np.asarray(omega, dtype=float)
    detuned = (w - drive.raman_detuning) ** 2
    c = math.cos(phi0.phi0)
    out = kappa0 * (g2 * c + detuned * (1.0 + c)) / (g2 + detuned)
    return out if isinstance(omega, np.ndarray) else float(out)


def relax_loop_phase(phi0: LoopPhase, x_step: float, inside_window: bool) -> LoopPhase:
    """Advance the loop phase along the dimensionless path by ``x_step``.

    Inside the transparency window the phase relaxes toward the nearest even
    multiple of pi following d(phi)/dx = -4 sin(phi); this is integrated in
    closed form, tan(phi/2) -> tan(phi/2) * exp(-4 x).  Outside the window
    the phase is frozen (it drifts only on scales much longer than 1/kappa0).
    Odd multiples of pi are unstable fixed points and are preserved exactly.
    """
    if x_step < 0:
        raise ValueError("x_step must be >= 0")
    if not inside_window or x_step == 0.0:
        return phi0
    # Split off the nearest 2*pi*n so the unwrapped branch is preserved.
    n = round(phi0.phi0 / TWO_PI)
    residual = phi0.phi0 - TWO_PI * n
    if math.isclose(abs(residual), math.pi, rel_tol=0.0, abs_tol=1e-12):
        return phi0
    relaxed = 2.0 * math.atan(math.tan(0.5 * residual) * math.exp(-4.0 * x_step))
    return LoopPhase(TWO_PI * n + relaxed)


def transfer_profile(
    omega_grid: np.ndarray,
    drive: DriveParams,
    medium: MediumParams,
    phi0: LoopPhase | None = None,
) -> TransferProfile:
    """Sample the scheme's transfer rate on ``omega_grid``."""
    if drive.scheme is Scheme.DOUBLE_LAMBDA:
        kappa = transfer_rate_double_lambda(
            omega_grid, phi0 if phi0 is not None else LoopPhase(), drive, medium
        )
    else:
        kappa = transfer_rate_lambda(omega_grid, drive, medium)
    profile = TransferProfile(omega_grid=omega_grid, kappa=np.asarray(kappa))
    profile.validate(drive.scheme)
    return profile
