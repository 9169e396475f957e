"""Echo synthesis, matched-filter delay-Doppler processing, and ambiguity analysis.

All CPI processing uses sample indices n = 0..N-1 after the guard interval is
discarded, so the Doppler reference over one CPI is e^{j 2 pi nu n T_s}.  Delay
differences are d_tau = tau_bin - tau_true (taps); Doppler differences are
d_nu = nu_true - nu_bin (hertz).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import SensingTarget, UlaGeometry, steering_vector
from .waveform import BeamformerSet, SymbolFrame, TxFrame

_DOPPLER_CHUNK = 64


@dataclass(frozen=True)
class DelayDopplerGrid:
    """Matched-filter search bins: integer delay taps x Doppler frequencies in hertz."""

    delay_bins: np.ndarray
    doppler_bins_hz: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.delay_bins, dtype=int)
        f = np.asarray(self.doppler_bins_hz, dtype=float)
        if d.size == 0 or f.size == 0:
            raise ValueError("grid axes must be non-empty")
        if np.any(np.diff(d) <= 0) or np.any(np.diff(f) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        object.__setattr__(self, "delay_bins", d)
        object.__setattr__(self, "doppler_bins_hz", f)


@dataclass(frozen=True)
class BeamSequence:
    """Beam-domain scalar sequence u[n] = a(theta)^H x[n] over indices [-pad, n_body + tail)."""

    values: np.ndarray
    pad: int
    n_body: int

    @property
    def tail(self) -> int:
        return self.values.size - self.pad - self.n_body

    def segment(self, start: int, length: int) -> np.ndarray:
        if start < -self.pad or start + length > self.n_body + self.tail:
            raise ValueError("segment out of range for this sequence's pad/tail")
        i0 = self.pad + start
        return self.values[i0:i0 + length]


@dataclass(frozen=True)
class EchoFrame:
    """Received CPI samples (after guard discard) and the noise power that produced them."""

    samples: np.ndarray
    noise_power: float


@dataclass(frozen=True)
class DDCM:
    """Delay-Doppler correlation matrix of the kappa-shifted symbol streams."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AmbiguitySurface:
    """Normalized ambiguity values over a (d_tau, d_nu) difference grid.

    ``values[p, q]`` corresponds to ``d_tau_taps[p]`` and ``d_nu_hz[q]``.
    """

    d_tau_taps: np.ndarray
    d_nu_hz: np.ndarray
    values: np.ndarray
    kind: str
    n_cpi: int
    sample_period_s: float


@dataclass(frozen=True)
class MatchedFilterMap:
    """Matched-filter outputs r(tau_p, nu_q) over a search grid, delay-major."""

    values: np.ndarray
    grid: DelayDopplerGrid


def beam_reference(tx: TxFrame, geom: UlaGeometry, theta_rad: float) -> BeamSequence:
    """Project a transmit frame onto the steering direction: u[n] = a^H x[n]."""
    a = steering_vector(geom, theta_rad)
    return BeamSequence(np.conj(a) @ tx.samples, tx.pad, tx.n_body)


def beam_reference_dam(bf: BeamformerSet, frame: SymbolFrame, geom: UlaGeometry,
                       theta_rad: float) -> BeamSequence:
    """Beam-domain sequence sum_l (a^H f_l) s[n - kappa_l], avoiding the M x N frame."""
    a = steering_vector(geom, theta_rad)
    weights = np.conj(a) @ bf.vectors
    kmax = int(bf.kappas.max())
    if frame.pad < kmax:
        raise ValueError("frame pad too small for max kappa")
    out_pad = frame.pad - kmax
    n_out = out_pad + frame.length_n + frame.tail
    u = np.zeros(n_out, dtype=complex)
    for l in range(bf.num_paths):
        u += weights[l] * frame.segment(-out_pad - int(bf.kappas[l]), n_out)
    return BeamSequence(u, out_pad, frame.length_n)


def synth_echo(tx: TxFrame, geom: UlaGeometry, target: SensingTarget,
               noise_power: float, sample_period_s: float,
               rng: np.random.Generator) -> EchoFrame:
    """Point-target echo over one CPI: alpha * a^H x[n - tau] * e^{j2pi nu n Ts} + noise.

    Guard samples are represented by the frame pad; the output covers only the
    N body samples, so the guard interval is already discarded.
    """
    if target.delay_taps > tx.pad:
        raise ValueError("target delay exceeds the guard region covered by the frame pad")
    u = beam_reference(tx, geom, target.direction_rad)
    return synth_echo_beam(u, target.gain, target.delay_taps, target.doppler_hz,
                           noise_power, sample_period_s, rng)


def synth_echo_beam(ref: BeamSequence, gain: complex, delay_taps: int,
                    doppler_hz: float, noise_power: float, sample_period_s: float,
                    rng: np.random.Generator) -> EchoFrame:
    """Echo synthesis from a precomputed beam-domain sequence."""
    if delay_taps > ref.pad:
        raise ValueError("target delay exceeds the sequence pad")
    n = ref.n_body
    sig = gain * ref.segment(-delay_taps, n)
    if doppler_hz != 0.0:
        sig = sig * np.exp(2j * np.pi * doppler_hz * np.arange(n) * sample_period_s)
    else:
        sig = sig.copy()
    if noise_power > 0:
        scale = np.sqrt(noise_power / 2.0)
        sig += scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return EchoFrame(sig, noise_power)


def _doppler_correlate(weighted: np.ndarray, doppler_hz: np.ndarray,
                       sample_period_s: float, sign: float) -> np.ndarray:
    """sum_n weighted[n] * exp(sign * j 2 pi f n Ts) for each f, chunked over f."""
    n = weighted.size
    t = np.arange(n) * sample_period_s
    out = np.empty(doppler_hz.size, dtype=complex)
    for i0 in range(0, doppler_hz.size, _DOPPLER_CHUNK):
        f = doppler_hz[i0:i0 + _DOPPLER_CHUNK]
        out[i0:i0 + _DOPPLER_CHUNK] = np.exp(sign * 2j * np.pi * f[:, None] * t[None, :]) @ weighted
    return out


def matched_filter_map(echo: EchoFrame, ref: BeamSequence, grid: DelayDopplerGrid,
                       sample_period_s: float) -> MatchedFilterMap:
    """Bank of unit-norm delay-shifted, Doppler-rotated matched filters.

    r(tau_p, nu_q) = sum_n echo[n] * conj(u[n - tau_p]) * e^{-j2pi nu_q n Ts} / ||u(tau_p)||,
    so the output noise variance per bin equals the input noise power.
    """
    n = echo.samples.size
    if ref.n_body < n:
        raise ValueError("reference shorter than echo")
    values = np.empty((grid.delay_bins.size, grid.doppler_bins_hz.size), dtype=complex)
    for p, tau_p in enumerate(grid.delay_bins):
        if tau_p > ref.pad:
            raise ValueError("grid delay exceeds reference pad")
        shifted = ref.segment(-int(tau_p), n)
        norm = np.linalg.norm(shifted)
        if norm == 0:
            raise ValueError(f"zero-norm reference at delay bin {tau_p}")
        weighted = echo.samples * np.conj(shifted)
        values[p] = _doppler_correlate(weighted, grid.doppler_bins_hz,
                                       sample_period_s, -1.0) / norm
    return MatchedFilterMap(values, grid)


def estimate_target(mf: MatchedFilterMap) -> tuple[int, float]:
    """Argmax of |r| over the grid; ties break to the smallest delay, then Doppler bin."""
    if mf.values.size == 0:
        raise ValueError("empty matched-filter map")
    flat = int(np.argmax(np.abs(mf.values)))
    p, q = np.unravel_index(flat, mf.values.shape)
    return int(mf.grid.delay_bins[p]), float(mf.grid.doppler_bins_hz[q])


def empirical_af(ref: BeamSequence, d_tau_taps: Sequence[int] | np.ndarray,
                 d_nu_hz: Sequence[float] | np.ndarray, true_tau: int,
                 true_nu_hz: float, sample_period_s: float) -> AmbiguitySurface:
    """Finite-N normalized ambiguity over a difference grid.

    chi(d_tau, d_nu) = sum_n u[n - tau] conj(u[n - tau_p]) e^{j2pi d_nu n Ts}
                       / ||u(tau_p)||^2,  tau_p = tau + d_tau,
    normalized by the per-bin reference energy.
    """
    d_tau = np.asarray(d_tau_taps, dtype=int)
    d_nu = np.asarray(d_nu_hz, dtype=float)
    n = ref.n_body
    base = ref.segment(-true_tau, n)
    values = np.empty((d_tau.size, d_nu.size), dtype=complex)
    for p, dt in enumerate(d_tau):
        tau_p = true_tau + int(dt)
        shifted = ref.segment(-tau_p, n)
        energy = float(np.sum(np.abs(shifted) ** 2))
        if energy == 0:
            raise ValueError(f"zero-energy reference at delay offset {dt}")
        weighted = base * np.conj(shifted)
        values[p] = _doppler_correlate(weighted, d_nu, sample_period_s, +1.0) / energy
    return AmbiguitySurface(d_tau, d_nu, values, "empirical", n, sample_period_s)


def asinc(d_nu_hz, n: int, sample_period_s: float):
    """Doppler correlation kernel psi(d_nu) = e^{j pi d_nu (N-1) Ts} sin(pi d_nu N Ts) / (N sin(pi d_nu Ts)).

    The removable singularities at d_nu * Ts integer evaluate to 1 via the limit.
    Accepts scalars or arrays.
    """
    x = np.asarray(d_nu_hz, dtype=float) * sample_period_s
    num = np.sin(np.pi * x * n)
    den = n * np.sin(np.pi * x)
    singular = np.abs(np.sin(np.pi * x)) < 1e-12
    ratio = np.divide(num, den, out=np.zeros_like(num), where=~singular)
    phase = np.exp(1j * np.pi * x * (n - 1))
    out = np.where(singular, 1.0 + 0.0j, phase * ratio)
    return out if out.ndim else complex(out)


def delay_diff_sets(kappas: Sequence[int] | np.ndarray
                    ) -> tuple[dict[int, list[tuple[int, int]]], np.ndarray]:
    """Pair index sets S(d) = {(i, j): kappa_i - kappa_j = d} and the skew-symmetric
    difference matrix Delta_{i,j} = kappa_i - kappa_j (0-based indices)."""
    k = np.asarray(kappas, dtype=int)
    if len(set(k.tolist())) != k.size:
        raise ValueError("kappas must be pairwise distinct")
    delta = k[:, None] - k[None, :]
    sets: dict[int, list[tuple[int, int]]] = {}
    for i in range(k.size):
        for j in range(k.size):
            d = int(delta[i, j])
            if d != 0:
                sets.setdefault(d, []).append((i, j))
    return sets, delta


def asymptotic_ddcm(kappas: Sequence[int] | np.ndarray, d_tau: int, d_nu_hz: float,
                    n: int, sample_period_s: float) -> DDCM:
    """Large-N limit of the shifted-stream correlation matrix.

    Entry (i, j) is psi(d_nu) where kappa_i - kappa_j = d_tau and 0 elsewhere, so
    the matched matrix (d_tau = 0, d_nu = 0) is the identity.
    """
    k = np.asarray(kappas, dtype=int)
    mask = (k[:, None] - k[None, :]) == d_tau
    psi = asinc(d_nu_hz, n, sample_period_s)
    return DDCM(np.where(mask, psi, 0.0 + 0.0j),
                {"d_tau": d_tau, "d_nu_hz": d_nu_hz, "n": n})


def empirical_ddcm(frame: SymbolFrame, kappas: Sequence[int] | np.ndarray,
                   tau_p: int, nu_q_hz: float, tau: int, nu_hz: float,
                   sample_period_s: float) -> DDCM:
    """Finite-N correlation matrix of the kappa-shifted symbol streams.

    Entry (i, j) = N^{-1} sum_n s[n - kappa_i - tau] conj(s[n - kappa_j - tau_p])
    e^{j 2 pi (nu - nu_q) n Ts}.
    """
    k = np.asarray(kappas, dtype=int)
    n = frame.length_n
    d_nu = nu_hz - nu_q_hz
    rot = np.exp(2j * np.pi * d_nu * np.arange(n) * sample_period_s)
    rows = np.stack([frame.segment(-int(ki) - tau, n) * rot for ki in k])
    cols = np.stack([frame.segment(-int(kj) - tau_p, n) for kj in k])
    values = rows @ np.conj(cols.T) / n
    return DDCM(values, {"tau_p": tau_p, "nu_q_hz": nu_q_hz, "tau": tau, "nu_hz": nu_hz})


def _default_geom(bf: BeamformerSet, geom: UlaGeometry | None) -> UlaGeometry:
    return geom if geom is not None else UlaGeometry(bf.num_antennas)


def _beam_gain_terms(bf: BeamformerSet, theta_rad: float, geom: UlaGeometry | None
                     ) -> tuple[np.ndarray, float]:
    """Per-path beam responses a^H f_l and the total gain a^H (sum f f^H) a."""
    a = steering_vector(_default_geom(bf, geom), theta_rad)
    resp = np.conj(a) @ bf.vectors
    return resp, float(np.sum(np.abs(resp) ** 2))


def asymptotic_af(bf: BeamformerSet, theta_rad: float, d_tau: int, d_nu_hz: float,
                  n: int, sample_period_s: float,
                  geom: UlaGeometry | None = None) -> complex:
    """Large-N ambiguity chi(d_tau, d_nu) via the limiting correlation matrix.

    chi = a^H F Lambda(d_tau, d_nu) F^H a / a^H F F^H a; it equals 1 at the matched
    bin and factors as chi(d_tau, 0) * chi(0, d_nu).
    """
    resp, denom = _beam_gain_terms(bf, theta_rad, geom)
    if denom <= 0:
        raise ValueError("beamformer orthogonal to the steering direction")
    lam = asymptotic_ddcm(bf.kappas, d_tau, d_nu_hz, n, sample_period_s).values
    return complex(resp @ lam @ np.conj(resp)) / denom


def delay_cut_ratios(bf: BeamformerSet, theta_rad: float,
                     geom: UlaGeometry | None = None) -> dict[int, complex]:
    """Normalized Doppler-cut values chi(d_tau, 0) for every nonzero delay difference."""
    resp, denom = _beam_gain_terms(bf, theta_rad, geom)
    if denom <= 0:
        raise ValueError("beamformer orthogonal to the steering direction")
    sets, _ = delay_diff_sets(bf.kappas)
    return {d: sum(resp[i] * np.conj(resp[j]) for i, j in pairs) / denom
            for d, pairs in sets.items()}


def asymptotic_af_surface(bf: BeamformerSet, theta_rad: float,
                          d_tau_taps: Sequence[int] | np.ndarray,
                          d_nu_hz: Sequence[float] | np.ndarray,
                          n: int, sample_period_s: float,
                          geom: UlaGeometry | None = None) -> AmbiguitySurface:
    """Closed-form asymptotic ambiguity surface over a difference grid."""
    d_tau = np.asarray(d_tau_taps, dtype=int)
    d_nu = np.asarray(d_nu_hz, dtype=float)
    ratios = delay_cut_ratios(bf, theta_rad, geom)
    delay_part = np.array([1.0 + 0.0j if dt == 0 else ratios.get(int(dt), 0.0 + 0.0j)
                           for dt in d_tau])
    doppler_part = np.atleast_1d(asinc(d_nu, n, sample_period_s))
    values = delay_part[:, None] * doppler_part[None, :]
    return AmbiguitySurface(d_tau, d_nu, values, "asymptotic", n, sample_period_s)


def sensing_snr(bf: BeamformerSet, theta_rad: float, gain: complex, n: int,
                noise_power: float, geom: UlaGeometry | None = None) -> float:
    """Matched-bin output SNR |alpha|^2 N a^H (sum_l f_l f_l^H) a / sigma^2."""
    _, total = _beam_gain_terms(bf, theta_rad, geom)
    return abs(gain) ** 2 * n * total / noise_power


def psr_doppler(surface: AmbiguitySurface, mainlobe_hz: float | None = None) -> float:
    """Peak sidelobe of the Doppler axis at the matched delay, as a linear ratio.

    The mainlobe is excluded out to the first null (|d_nu| >= 1/(N Ts)) unless a
    custom boundary is given.
    """
    idx = np.flatnonzero(surface.d_tau_taps == 0)
    if idx.size != 1:
        raise ValueError("surface must contain the matched delay row d_tau = 0")
    cut = np.abs(surface.values[idx[0]])
    null = mainlobe_hz if mainlobe_hz is not None else 1.0 / (surface.n_cpi * surface.sample_period_s)
    side = np.abs(surface.d_nu_hz) >= null * (1 - 1e-12)
    if not np.any(side):
        raise ValueError("no grid points outside the mainlobe")
    return float(cut[side].max())


def isr(bf: BeamformerSet, theta_rad: float, geom: UlaGeometry | None = None,
        n_d: int | None = None) -> float:
    """Integrated sidelobe ratio sum_{0<|d|<=n_d} |chi(d, 0)|^2 of the Doppler cut."""
    ratios = delay_cut_ratios(bf, theta_rad, geom)
    if n_d is None:
        k = bf.kappas
        n_d = int(k.max() - k.min())
    return float(sum(abs(v) ** 2 for d, v in ratios.items() if 0 < abs(d) <= n_d))


def surface_rows(surface: AmbiguitySurface) -> list[tuple[int, float, float, float]]:
    """Delay-major CSV rows (d_tau_taps, d_nu_hz, mag_db, phase_rad)."""
    floor = 1e-300  # keep log finite for structural zeros
    rows = []
    for p, dt in enumerate(surface.d_tau_taps):
        for q, dn in enumerate(surface.d_nu_hz):
            v = surface.values[p, q]
            rows.append((int(dt), float(dn),
                         float(20.0 * np.log10(max(abs(v), floor))),
                         float(np.angle(v))))
    return rows
