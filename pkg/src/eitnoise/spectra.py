"""Closed-form propagation of phase-noise spectra along the optical path.

The four spectra of a field pair (two autos, complex cross) evolve with the
accumulated dimensionless path x(omega) = integral of the transfer rate.
The closed forms assume the two fields enter the medium uncorrelated; they
are single-shot maps from the cell entrance, not composable step by step
(composition must happen at the field level, see :mod:`eitnoise.oracle`).

The optical density tau is the canonical path coordinate: the local transfer
rate is normalized by the local peak rate, and a single calibration scalar
(``strength``) converts optical density into dimensionless path gain.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .medium import (
    DriveParams,
    LoopPhase,
    MediumParams,
    Scheme,
    max_transfer_rate,
    relax_loop_phase,
    transfer_rate_double_lambda,
    transfer_rate_lambda,
    transparency_width,
)

# An attenuation step larger than this changes Gamma_g too much for the
# stepwise-constant rate to be a faithful quadrature of the path integral.
MAX_ATTENUATION_STEP = 0.1


class GridMismatchError(ValueError):
    """Frequency grids of the operands do not match."""


class StepTooLargeError(ValueError):
    """Optical-density step too coarse for the requested attenuation."""


def _check_grids(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape or not np.allclose(a, b, rtol=0.0, atol=0.0):
        raise GridMismatchError("frequency grids do not match")


@dataclass(frozen=True)
class SpectrumSet:
    """Two-sided phase-noise spectra of a field pair on a common grid.

    ``w11``/``w22`` are the auto-spectra and ``re_w12``/``im_w12`` the real
    and imaginary parts of the cross-spectrum, all in rad^2 * s, sampled on
    ``omega_grid`` [rad/s].
    """

    omega_grid: np.ndarray
    w11: np.ndarray
    w22: np.ndarray
    re_w12: np.ndarray
    im_w12: np.ndarray

    def validate(self, check_cross_bound: bool = True, rtol: float = 1e-9) -> None:
        """Check shapes, non-negativity and (optionally) |W12|^2 <= W11*W22.

        The cross-spectrum bound holds for any spectra estimated from field
        realizations.  The closed-form propagation law's imaginary part is
        an idealization that can exceed it for strongly asymmetric inputs,
        so the bound check is optional there.
        """
        n = self.omega_grid.shape
        for name in ("w11", "w22", "re_w12", "im_w12"):
            if getattr(self, name).shape != n:
                raise GridMismatchError(f"{name} does not match omega_grid shape")
        if np.any(self.w11 < 0) or np.any(self.w22 < 0):
            raise ValueError("auto-spectra must be non-negative")
        if check_cross_bound:
            cross2 = self.re_w12**2 + self.im_w12**2
            bound = self.w11 * self.w22
            scale = np.maximum(bound, np.max(bound) * 1e-12 + 1e-300)
            if np.any(cross2 > bound + rtol * scale):
                raise ValueError("|W12|^2 exceeds W11*W22")


@dataclass(frozen=True)
class CoherenceSpectrum:
    """Normalized cross-spectrum magnitude |W12|/sqrt(W11 W22), in [0, 1]."""

    omega_grid: np.ndarray
    coherence: np.ndarray


@dataclass(frozen=True)
class PathAccumulator:
    """Per-frequency dimensionless path gain accumulated up to optical density tau.

    ``rabi2_scale`` tracks the residual drive intensity (the drive attenuates
    even under transparency, narrowing the window as the path grows).
    """

    omega_grid: np.ndarray
    x: np.ndarray
    tau: float = 0.0
    phi0: LoopPhase = LoopPhase(0.0)
    rabi2_scale: float = 1.0


def new_accumulator(
    omega_grid: np.ndarray, phi0: LoopPhase | None = None
) -> PathAccumulator:
    """Fresh accumulator at the cell entrance (tau = 0, x = 0)."""
    grid = np.asarray(omega_grid, dtype=float)
    return PathAccumulator(
        omega_grid=grid,
        x=np.zeros_like(grid),
        tau=0.0,
        phi0=phi0 if phi0 is not None else LoopPhase(0.0),
        rabi2_scale=1.0,
    )


def accumulate_path(
    acc: PathAccumulator,
    d_tau: float,
    drive: DriveParams,
    medium: MediumParams,
    attenuation: float = 0.0,
    strength: float = 1.0,
) -> PathAccumulator:
    """Advance the accumulator by one optical-density step ``d_tau``.

    The drive intensity decays by exp(-attenuation * d_tau); the transfer
    rate is recomputed with the narrowed window and added to x normalized by
    the local peak rate, scaled by the per-unit-tau calibration ``strength``.
    For the closed-loop scheme the loop phase relaxes along the step when the
    pair is Raman-resonant within the window.
    """
    if d_tau <= 0:
        raise ValueError("d_tau must be > 0")
    if attenuation * d_tau > MAX_ATTENUATION_STEP:
        raise StepTooLargeError(
            f"attenuation*d_tau = {attenuation * d_tau:.3g} exceeds "
            f"{MAX_ATTENUATION_STEP}; use smaller steps"
        )
    scale = acc.rabi2_scale * math.exp(-attenuation * d_tau)
    local_drive = dataclasses.replace(drive, rabi=drive.rabi * math.sqrt(scale))
    gamma_g = transparency_width(medium, local_drive)
    kappa0 = max_transfer_rate(medium, local_drive)

    phi0 = acc.phi0
    if drive.scheme is Scheme.DOUBLE_LAMBDA:
        inside = abs(drive.raman_detuning) < gamma_g
        phi0 = relax_loop_phase(phi0, strength * d_tau, inside)
        kappa = transfer_rate_double_lambda(acc.omega_grid, phi0, local_drive, medium)
    else:
        kappa = transfer_rate_lambda(acc.omega_grid, local_drive, medium)

    return PathAccumulator(
        omega_grid=acc.omega_grid,
        x=acc.x + (kappa / kappa0) * (strength * d_tau),
        tau=acc.tau + d_tau,
        phi0=phi0,
        rabi2_scale=scale,
    )


def propagate_spectra(s0: SpectrumSet, x: np.ndarray) -> SpectrumSet:
    """Map entrance spectra to the spectra after path gain ``x`` (per frequency).

    Sum and difference of the two phases mix: the balanced part relaxes as
    exp(-2x) toward equal, fully correlated spectra, while the imbalance
    decays as exp(-x).  Any entrance cross-correlation is ignored (the map
    assumes independent fields at the entrance).  With one silent input field
    this reduces to the transfer law W22 = W11(0)*(1 - exp(-x))^2 / 4.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != s0.omega_grid.shape:
        raise GridMismatchError("x must be sampled on the spectrum grid")
    u = np.exp(-x)
    u2 = u * u
    total = 0.25 * (s0.w11 + s0.w22)
    imbalance = 0.5 * (s0.w11 - s0.w22)
    w11 = total * (1.0 + u2) + imbalance * u
    w22 = total * (1.0 + u2) - imbalance * u
    out = SpectrumSet(
        omega_grid=s0.omega_grid,
        w11=np.maximum(w11, 0.0),
        w22=np.maximum(w22, 0.0),
        re_w12=total * (1.0 - u2),
        im_w12=imbalance * u,
    )
    out.validate(check_cross_bound=False)
    return out


def propagate_difference_spectrum(w_psi0: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Spectrum of the phase difference after path gain ``x``: W * exp(-2x)."""
    w_psi0 = np.asarray(w_psi0, dtype=float)
    x = np.asarray(x, dtype=float)
    if w_psi0.shape != x.shape:
        raise GridMismatchError("w_psi0 and x must share the frequency grid")
    return w_psi0 * np.exp(-2.0 * x)


def coherence(s: SpectrumSet) -> CoherenceSpectrum:
    """Pointwise |W12|/sqrt(W11 W22), defined as 0 where either auto vanishes.

    Clipped to [0, 1]; the closed-form imaginary part can push the raw ratio
    above one for strongly asymmetric inputs.
    """
    product = s.w11 * s.w22
    mag = np.hypot(s.re_w12, s.im_w12)
    with np.errstate(invalid="ignore", divide="ignore"):
        raw = np.where(product > 0.0, mag / np.sqrt(product), 0.0)
    return CoherenceSpectrum(
        omega_grid=s.omega_grid, coherence=np.clip(raw, 0.0, 1.0)
    )
