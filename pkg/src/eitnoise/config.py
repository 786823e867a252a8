"""Scenario configuration: flat INI-style files with strict validation.

Files use Hz for every frequency-like quantity; conversion to angular units
happens once, at the accessors that build the physics parameter objects.
Unknown sections or keys are errors.  An empty (or absent) file yields the
scenario's full default configuration, pinned to the published experimental
constants (ground splitting 1771.6 MHz, 100 MHz noise band, 0.5 MHz
amplifier cutoff, optical density 7.3, 260 MHz local-oscillator offset).
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

from .analysis import AmplifierResponse
from .medium import DriveParams, LoopPhase, MediumParams, Scheme

TWO_PI = 2.0 * math.pi

SCENARIOS = ("noise-transfer", "fwhm-sweep", "lowfreq-dip")


class ConfigError(ValueError):
    """Configuration parse or validation failure (message carries the field)."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    return tuple(float(part) for part in items)


# section -> key -> (attribute, parser)
_KEYSPEC: dict[str, dict[str, tuple[str, object]]] = {
    "scheme": {"scheme": ("scheme", str)},
    "medium": {
        "gamma_hz": ("gamma_hz", float),
        "gamma_dark_hz": ("gamma_dark_hz", float),
        "coupling": ("coupling", float),
        "density": ("density", float),
        "splitting_hz": ("splitting_hz", float),
    },
    "drive": {
        "rabi_hz": ("rabi_hz", float),
        "raman_detuning_hz": ("raman_detuning_hz", float),
        "loop_phase_rad": ("loop_phase_rad", float),
    },
    "path": {
        "tau": ("tau", float),
        "tau_list": ("tau_list", _parse_float_list),
        "tau_step": ("tau_step", float),
        "attenuation": ("attenuation", float),
        "strength": ("strength", float),
    },
    "noise": {
        "band_limit_hz": ("band_limit_hz", float),
        "level_rad2_per_hz": ("noise_level", float),
        "linewidth1_hz": ("linewidth1_hz", float),
        "linewidth2_hz": ("linewidth2_hz", float),
        "floor_rad2_per_hz": ("floor_level", float),
    },
    "amplifier": {
        "enabled": ("amplifier_enabled", _parse_bool),
        "low_cutoff_hz": ("amp_low_cutoff_hz", float),
        "high_cutoff_hz": ("amp_high_cutoff_hz", float),
        "order": ("amp_order", int),
    },
    "analysis": {
        "sample_rate_hz": ("sample_rate_hz", float),
        "n_samples": ("n_samples", int),
        "segment_len": ("segment_len", int),
        "window": ("window", str),
        "ensemble_size": ("ensemble_size", int),
        "probe_freq_hz": ("probe_freq_hz", float),
        "transfer_detuning_hz": ("transfer_detuning_hz", float),
        "lo_offset_hz": ("lo_offset_hz", float),
    },
    "output": {
        "directory": ("out_dir", str),
        "dump_ensemble": ("dump_ensemble", _parse_bool),
    },
    "run": {
        "seed": ("seed", int),
        "mode": ("mode", str),
    },
}

_BASE_DEFAULTS: dict[str, object] = {
    "scheme": "lambda",
    "gamma_hz": 9.79e6,
    "gamma_dark_hz": 0.3e6,
    "coupling": 1.0e-13,
    "density": 1.0e17,
    "splitting_hz": 1771.6e6,
    "rabi_hz": 3.64e6,
    "raman_detuning_hz": 0.0,
    "loop_phase_rad": 0.0,
    "tau": 7.3,
    "tau_list": (),
    "tau_step": 0.05,
    "attenuation": 0.1,
    "strength": 1.0,
    "band_limit_hz": 100e6,
    "noise_level": 4.0e-9,
    "linewidth1_hz": 0.0,
    "linewidth2_hz": 0.0,
    "floor_level": 1.0e-13,
    "amplifier_enabled": True,
    "amp_low_cutoff_hz": 0.5e6,
    "amp_high_cutoff_hz": 100e6,
    "amp_order": 4,
    "sample_rate_hz": 250e6,
    "n_samples": 2**20,
    "segment_len": 2**14,
    "window": "hann",
    "ensemble_size": 256,
    "probe_freq_hz": 10e6,
    "transfer_detuning_hz": 20e6,
    "lo_offset_hz": 260e6,
    "out_dir": "out",
    "dump_ensemble": False,
    "seed": 20040310,
    "mode": "oracle",
}

# Scenario-specific defaults layered over the base (user keys always win).
_SCENARIO_DEFAULTS: dict[str, dict[str, object]] = {
    "noise-transfer": {
        "strength": 2.0,
        "attenuation": 0.0,
    },
    "fwhm-sweep": {
        "strength": 5.0,
        "attenuation": 1.0,
        "noise_level": 0.0,
        "band_limit_hz": 10e6,
        "amplifier_enabled": False,
        "linewidth1_hz": 0.9e6,
        "linewidth2_hz": 0.6e6,
        "sample_rate_hz": 32e6,
        "n_samples": 2**20,
        "segment_len": 2**12,
        "tau_list": (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.5, 10.0),
    },
    "lowfreq-dip": {
        "scheme": "double-lambda",
        "strength": 0.25,
        "attenuation": 0.0,
        "noise_level": 4.0e-8,
        "n_samples": 2**21,
        "window": "blackmanharris",
    },
}

# Closed-loop width-sweep defaults differ from the open-scheme sweep: the
# loop correlation is slower, so the sweep runs farther in optical density.
_DOUBLE_LAMBDA_SWEEP = {
    "strength": 0.12,
    "tau_list": (0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 14.0),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario parameters (file units: Hz, linear)."""

    scenario: str
    scheme: str
    gamma_hz: float
    gamma_dark_hz: float
    coupling: float
    density: float
    splitting_hz: float
    rabi_hz: float
    raman_detuning_hz: float
    loop_phase_rad: float
    tau: float
    tau_list: tuple[float, ...]
    tau_step: float
    attenuation: float
    strength: float
    band_limit_hz: float
    noise_level: float
    linewidth1_hz: float
    linewidth2_hz: float
    floor_level: float
    amplifier_enabled: bool
    amp_low_cutoff_hz: float
    amp_high_cutoff_hz: float
    amp_order: int
    sample_rate_hz: float
    n_samples: int
    segment_len: int
    window: str
    ensemble_size: int
    probe_freq_hz: float
    transfer_detuning_hz: float
    lo_offset_hz: float
    out_dir: str
    dump_ensemble: bool
    seed: int
    mode: str

    @property
    def scheme_enum(self) -> Scheme:
        return Scheme.DOUBLE_LAMBDA if self.scheme == "double-lambda" else Scheme.LAMBDA

    def medium(self) -> MediumParams:
        return MediumParams(
            gamma=TWO_PI * self.gamma_hz,
            gamma_dark=TWO_PI * self.gamma_dark_hz,
            coupling=self.coupling,
            density=self.density,
            splitting=TWO_PI * self.splitting_hz,
        )

    def drive(self) -> DriveParams:
        return DriveParams(
            rabi=TWO_PI * self.rabi_hz,
            scheme=self.scheme_enum,
            raman_detuning=TWO_PI * self.raman_detuning_hz,
        )

    def loop_phase(self) -> LoopPhase:
        return LoopPhase(self.loop_phase_rad)

    def amplifier(self) -> AmplifierResponse:
        return AmplifierResponse(
            low_cutoff=self.amp_low_cutoff_hz,
            high_cutoff=self.amp_high_cutoff_hz,
            order=self.amp_order,
        )

    def canonical_dump(self) -> str:
        """Stable key=value text used for hashing and provenance."""
        pairs = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            pairs.append(f"{f.name}={value!r}")
        return "\n".join(sorted(pairs))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_dump().encode()).hexdigest()[:16]


def _read_file_values(path: str | Path) -> dict[str, object]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from exc

    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _KEYSPEC:
            raise ConfigError(
                f"{path}: unknown section [{section}] "
                f"(known: {', '.join(sorted(_KEYSPEC))})"
            )
        for key, raw in parser.items(section):
            if key not in _KEYSPEC[section]:
                raise ConfigError(
                    f"{path}: unknown key '{key}' in [{section}] "
                    f"(known: {', '.join(sorted(_KEYSPEC[section]))})"
                )
            attr, cast = _KEYSPEC[section][key]
            try:
                values[attr] = cast(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{path}: [{section}] {key} = {raw!r}: {exc}"
                ) from exc
    return values


def _validate(cfg: ScenarioConfig) -> None:
    def fail(fieldpath: str, message: str) -> None:
        raise ConfigError(f"{fieldpath}: {message}")

    if cfg.scheme not in ("lambda", "double-lambda"):
        fail("scheme.scheme", f"must be 'lambda' or 'double-lambda', got {cfg.scheme!r}")
    if cfg.mode not in ("oracle", "fast"):
        fail("run.mode", f"must be 'oracle' or 'fast', got {cfg.mode!r}")
    for name in ("gamma_hz", "splitting_hz", "sample_rate_hz"):
        if getattr(cfg, name) <= 0:
            fail(name, "must be > 0")
    for name in (
        "gamma_dark_hz",
        "rabi_hz",
        "noise_level",
        "floor_level",
        "linewidth1_hz",
        "linewidth2_hz",
        "attenuation",
        "strength",
    ):
        if getattr(cfg, name) < 0:
            fail(name, "must be >= 0")
    if cfg.tau <= 0:
        fail("path.tau", "must be > 0")
    if cfg.tau_step <= 0:
        fail("path.tau_step", "must be > 0")
    if cfg.tau_list:
        if any(b <= a for a, b in zip(cfg.tau_list, cfg.tau_list[1:])):
            fail("path.tau_list", "must be strictly increasing")
        if cfg.tau_list[0] <= 0:
            fail("path.tau_list", "entries must be > 0")
    if cfg.attenuation * cfg.tau_step > 0.1:
        fail("path.tau_step", "attenuation * tau_step must be <= 0.1")
    if cfg.n_samples < 2 or cfg.n_samples & (cfg.n_samples - 1):
        fail("analysis.n_samples", "must be a power of two >= 2")
    if cfg.segment_len < 8 or cfg.segment_len & (cfg.segment_len - 1):
        fail("analysis.segment_len", "must be a power of two >= 8")
    if cfg.segment_len > cfg.n_samples:
        fail("analysis.segment_len", "must not exceed n_samples")
    if cfg.ensemble_size < 2:
        fail("analysis.ensemble_size", "must be >= 2")
    if cfg.band_limit_hz > cfg.sample_rate_hz / 2:
        fail("noise.band_limit_hz", "must not exceed Nyquist (sample_rate/2)")
    if not 0 < cfg.amp_low_cutoff_hz < cfg.amp_high_cutoff_hz:
        fail("amplifier.low_cutoff_hz", "need 0 < low_cutoff < high_cutoff")
    if cfg.amp_order < 1:
        fail("amplifier.order", "must be >= 1")
    if cfg.scenario == "lowfreq-dip" and cfg.scheme != "double-lambda":
        fail("scheme.scheme", "lowfreq-dip requires scheme = double-lambda")


def build_config(
    scenario: str,
    overrides: dict[str, object] | None = None,
) -> ScenarioConfig:
    """Resolve scenario defaults plus explicit overrides into a config."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r} (known: {SCENARIOS})")
    merged = dict(_BASE_DEFAULTS)
    merged.update(_SCENARIO_DEFAULTS.get(scenario, {}))
    user = dict(overrides or {})
    if (
        scenario == "fwhm-sweep"
        and user.get("scheme", merged["scheme"]) == "double-lambda"
    ):
        for key, value in _DOUBLE_LAMBDA_SWEEP.items():
            merged[key] = value
    merged.update(user)
    cfg = ScenarioConfig(scenario=scenario, **merged)
    _validate(cfg)
    return cfg


def validate_config(
    path: str | Path | None, scenario: str = "noise-transfer"
) -> ScenarioConfig:
    """Parse, default, and validate a config file for ``scenario``.

    ``path`` may be None for an all-defaults run.  Unknown sections/keys and
    out-of-range values raise :class:`ConfigError` naming the field.
    """
    values = _read_file_values(path) if path is not None else {}
    return build_config(scenario, values)
