"""Multipath MISO communication channel, sensing target channel, and scenario parameters.

The communication channel is a set of temporally-resolvable paths, each carrying a
per-antenna complex gain vector and an integer delay tap at the symbol rate
``T_s = 1/B``.  The sensing channel is a single point target with a direction, an
integer two-way delay tap, a Doppler frequency, and a complex two-way gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class UlaGeometry:
    """Uniform linear transmit array, phase reference at element 0."""

    num_antennas: int
    element_spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be >= 1")
        if self.element_spacing_wavelengths <= 0:
            raise ValueError("element_spacing_wavelengths must be positive")


def steering_vector(geom: UlaGeometry, theta_rad: float) -> np.ndarray:
    """Array response for direction ``theta``.

    Entry m is exp(j*2*pi*spacing*m*sin(theta)), m = 0..M-1, so every entry has
    unit modulus and the squared norm is M.
    """
    m = np.arange(geom.num_antennas)
    return np.exp(2j * np.pi * geom.element_spacing_wavelengths * m * np.sin(theta_rad))


@dataclass(frozen=True)
class ScenarioConfig:
    """System-level scenario parameters, all SI units.

    Derived block structure: ``n_coherence = round(coherence_time_s * bandwidth_hz)``
    samples per coherent block, of which ``n_guard`` form the guard interval and
    ``n_cpi = n_coherence - n_guard`` are usable for one coherent processing
    interval.
    """

    carrier_freq_hz: float = 28e9
    bandwidth_hz: float = 100e6
    coherence_time_s: float = 1e-3
    guard_time_s: float = 4e-6
    tx_power_w: float = 1.0
    noise_power_w: float = 10 ** (-11.9)  # -89 dBm
    num_tx_antennas: int = 64
    num_paths: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("carrier_freq_hz", "bandwidth_hz", "coherence_time_s",
                     "guard_time_s", "tx_power_w", "noise_power_w"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.num_tx_antennas < 1 or self.num_paths < 1:
            raise ValueError("num_tx_antennas and num_paths must be positive integers")
        if self.guard_time_s >= self.coherence_time_s:
            raise ValueError("guard_time_s must be smaller than coherence_time_s")
        if self.n_cpi <= 0:
            raise ValueError("derived CPI length must be positive")

    @property
    def sample_period_s(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def n_coherence(self) -> int:
        return round(self.coherence_time_s * self.bandwidth_hz)

    @property
    def n_guard(self) -> int:
        return round(self.guard_time_s * self.bandwidth_hz)

    @property
    def n_cpi(self) -> int:
        return self.n_coherence - self.n_guard

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    def geometry(self, element_spacing_wavelengths: float = 0.5) -> UlaGeometry:
        return UlaGeometry(self.num_tx_antennas, element_spacing_wavelengths)

    def to_mapping(self) -> dict:
        return {
            "carrier_freq_hz": self.carrier_freq_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "coherence_time_s": self.coherence_time_s,
            "guard_time_s": self.guard_time_s,
            "tx_power_w": self.tx_power_w,
            "noise_power_w": self.noise_power_w,
            "num_tx_antennas": self.num_tx_antennas,
            "num_paths": self.num_paths,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, object]) -> "ScenarioConfig":
        kwargs = {}
        for fname, ftype in (("carrier_freq_hz", float), ("bandwidth_hz", float),
                             ("coherence_time_s", float), ("guard_time_s", float),
                             ("tx_power_w", float), ("noise_power_w", float),
                             ("num_tx_antennas", int), ("num_paths", int),
                             ("rng_seed", int)):
            if fname in mapping:
                kwargs[fname] = ftype(mapping[fname])  # type: ignore[arg-type]
        return cls(**kwargs)


@dataclass(frozen=True)
class MultipathChannel:
    """L temporally-resolvable paths: per-antenna gains plus distinct integer delay taps.

    ``gains`` has shape (M, L); column l is the gain vector of path l.
    """

    delay_taps: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.delay_taps, dtype=int)
        gains = np.asarray(self.gains, dtype=complex)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("delay_taps must be a non-empty 1-D integer array")
        if np.any(taps < 0):
            raise ValueError("delay_taps must be nonnegative")
        if len(set(taps.tolist())) != taps.size:
            raise ValueError("delay_taps must be pairwise distinct")
        if gains.ndim != 2 or gains.shape[1] != taps.size:
            raise ValueError("gains must have shape (M, L) matching delay_taps")
        object.__setattr__(self, "delay_taps", taps)
        object.__setattr__(self, "gains", gains)

    @property
    def num_paths(self) -> int:
        return self.delay_taps.size

    @property
    def num_antennas(self) -> int:
        return self.gains.shape[0]

    @property
    def n_max(self) -> int:
        return int(self.delay_taps.max())

    @property
    def n_min(self) -> int:
        return int(self.delay_taps.min())

    @property
    def delay_spread(self) -> int:
        return self.n_max - self.n_min

    def path_gain(self, l: int) -> np.ndarray:
        return self.gains[:, l]


@dataclass(frozen=True)
class SensingTarget:
    """Point sensing target: direction, integer two-way delay tap, Doppler, complex gain."""

    direction_rad: float
    delay_taps: int
    doppler_hz: float
    gain: complex

    def __post_init__(self):
        if self.delay_taps < 0:
            raise ValueError("delay_taps must be nonnegative")


def free_space_pathloss(wavelength_m: float, distance_m: float) -> float:
    """(lambda / (4 pi R))^2 power pathloss."""
    return (wavelength_m / (4.0 * np.pi * distance_m)) ** 2


@dataclass(frozen=True)
class CommChannelParams:
    """Knobs for random communication-channel generation.

    Each path is a sum of ``mu`` sub-paths sharing one delay tap: the gain is
    beta * sum_i mu^{-1/2} e^{j phi_i} a(theta_i) with phi_i uniform in [0, 2pi)
    and mu drawn uniformly from {1..num_subpaths_max}.  Per-path power follows
    |beta|^2 = PL(distance) / L with free-space pathloss by default; pass
    ``pathloss_fn`` to override.  Delay taps are drawn uniformly without
    replacement from [0, max_delay_tap] unless ``delay_taps`` pins them.
    ``aods_per_path`` pins the sub-path departure angles explicitly (one
    sequence per path, overriding mu and the angle range).
    """

    distance_m: float = 100.0
    num_subpaths_max: int = 3
    aod_range_rad: tuple[float, float] = (np.deg2rad(-50.0), np.deg2rad(50.0))
    max_delay_tap: int = 40
    delay_taps: tuple[int, ...] | None = None
    aods_per_path: tuple[tuple[float, ...], ...] | None = None
    pathloss_fn: Callable[[float, float], float] | None = None


def gen_comm_channel(cfg: ScenarioConfig, params: CommChannelParams | None = None,
                     rng: np.random.Generator | None = None) -> MultipathChannel:
    """Draw a random multipath channel for the configured scenario.

    Deterministic under ``cfg.rng_seed`` when no generator is passed.
    """
    params = params or CommChannelParams()
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    L = cfg.num_paths
    M = cfg.num_tx_antennas
    geom = cfg.geometry()

    if params.delay_taps is not None:
        taps = np.asarray(params.delay_taps, dtype=int)
        if taps.size != L:
            raise ValueError("delay_taps override must list one tap per path")
    else:
        if params.max_delay_tap + 1 < L:
            raise ValueError("delay tap range too small for distinct taps")
        taps = rng.choice(params.max_delay_tap + 1, size=L, replace=False).astype(int)

    if params.aods_per_path is not None and len(params.aods_per_path) != L:
        raise ValueError("aods_per_path must list one angle group per path")

    pathloss = params.pathloss_fn or (lambda wl, d: free_space_pathloss(wl, d))
    beta_pow = pathloss(cfg.wavelength_m, params.distance_m) / L

    gains = np.zeros((M, L), dtype=complex)
    lo, hi = params.aod_range_rad
    for l in range(L):
        beta = np.sqrt(beta_pow) * np.exp(2j * np.pi * rng.uniform())
        if params.aods_per_path is not None:
            aods = np.asarray(params.aods_per_path[l], dtype=float)
            mu = aods.size
        else:
            mu = int(rng.integers(1, params.num_subpaths_max + 1))
            aods = rng.uniform(lo, hi, size=mu)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=mu)
        h = np.zeros(M, dtype=complex)
        for theta, phi in zip(aods, phases):
            h += np.exp(1j * phi) * steering_vector(geom, theta)
        gains[:, l] = beta * h / np.sqrt(mu)
    return MultipathChannel(delay_taps=taps, gains=gains)


def sensing_gain_magnitude(carrier_freq_hz: float, range_m: float, rcs_m2: float) -> float:
    """Two-way propagation power gain lambda^2 * rcs / ((4 pi)^3 R^4)."""
    if range_m <= 0:
        raise ValueError("range_m must be positive")
    if rcs_m2 < 0:
        raise ValueError("rcs_m2 must be nonnegative")
    wavelength = SPEED_OF_LIGHT / carrier_freq_hz
    return wavelength**2 * rcs_m2 / ((4.0 * np.pi) ** 3 * range_m**4)


def draw_sensing_gain(carrier_freq_hz: float, range_m: float, rcs_m2: float,
                      rng: np.random.Generator) -> complex:
    """Complex two-way gain with the closed-form magnitude and a uniform random phase."""
    mag2 = sensing_gain_magnitude(carrier_freq_hz, range_m, rcs_m2)
    return np.sqrt(mag2) * np.exp(2j * np.pi * rng.uniform())


def doppler_from_speed(radial_speed_mps: float, carrier_freq_hz: float) -> float:
    """Two-way Doppler shift 2 v / lambda for a target with the given radial speed."""
    return 2.0 * radial_speed_mps * carrier_freq_hz / SPEED_OF_LIGHT


def range_to_delay_taps(range_m: float, bandwidth_hz: float) -> int:
    """Round-trip delay quantized to the nearest sample at rate B."""
    return round(2.0 * range_m / SPEED_OF_LIGHT * bandwidth_hz)
