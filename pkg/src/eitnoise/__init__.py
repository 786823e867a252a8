"""Phase-noise transfer and correlation toolkit for driven Raman media.

Simulates how the phase fluctuations of laser fields sharing a coherently
driven Lambda or closed-loop (double-Lambda) medium become correlated with
propagation, both through closed-form spectral maps and through an
independent time-domain Monte Carlo route, and provides the heterodyne
analysis chain (beat spectra, Welch PSDs, Lorentzian and exponential-decay
fits) used to evaluate them.
"""

__version__ = "0.1.0"

from .medium import (
    DegenerateMediumError,
    DriveParams,
    LoopPhase,
    MediumParams,
    Scheme,
    TransferProfile,
    max_transfer_rate,
    relax_loop_phase,
    transfer_profile,
    transfer_rate_double_lambda,
    transfer_rate_lambda,
    transparency_width,
)
from .spectra import (
    CoherenceSpectrum,
    GridMismatchError,
    PathAccumulator,
    SpectrumSet,
    StepTooLargeError,
    accumulate_path,
    coherence,
    new_accumulator,
    propagate_difference_spectrum,
    propagate_spectra,
)
from .oracle import (
    AliasingError,
    DimensionMismatchError,
    MixingMatrix,
    PhaseEnsemble,
    PhaseSeries,
    TooFewMembersError,
    apply_mixing,
    build_mixing,
    eq4_phase_calibration,
    estimate_spectrum_set,
    member_seeds,
    mix_phase_block,
    synth_phase_noise,
    wiener_phase,
)
from .analysis import (
    AmplifierResponse,
    BeatSpectrum,
    DegenerateDataError,
    FitResult,
    InsufficientPointsError,
    NoPeakError,
    SegmentTooLongError,
    apply_amplifier,
    beat_signal,
    beat_spectrum_from_phase_psd,
    extract_fwhm,
    fit_exp_decay,
    fit_lorentzian,
    welch_psd,
)
from .config import ConfigError, ScenarioConfig, build_config, validate_config
from .scenarios import (
    NumericalError,
    ScenarioReport,
    dip_depth_db,
    run_fwhm_sweep,
    run_lowfreq_dip,
    run_noise_transfer,
    run_scenario,
    write_report,
)
