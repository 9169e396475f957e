"""Symbol generation, delay-precompensated single-carrier synthesis, OFDM synthesis, PAPR.

The single-carrier transmit frame is x[n] = sum_l f_l s[n - kappa_l] with per-path
beamformers f_l and pairwise-distinct integer pre-compensation delays kappa_l.
Symbol frames carry an explicit pad region so delayed reads at negative time
indices stay in range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Constellation:
    """Unit-average-power symbol alphabet."""

    kind: str
    points: np.ndarray
    a_max: float

    @classmethod
    def qpsk(cls) -> "Constellation":
        pts = (np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])) / np.sqrt(2.0)
        return cls("qpsk", pts, 1.0)

    @classmethod
    def qam16(cls) -> "Constellation":
        levels = np.array([-3.0, -1.0, 1.0, 3.0])
        pts = (levels[:, None] + 1j * levels[None, :]).ravel() / np.sqrt(10.0)
        return cls("qam16", pts, float(np.abs(pts).max()))

    @classmethod
    def qam64(cls) -> "Constellation":
        levels = np.array([-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0])
        pts = (levels[:, None] + 1j * levels[None, :]).ravel() / np.sqrt(42.0)
        return cls("qam64", pts, float(np.abs(pts).max()))

    @classmethod
    def from_name(cls, name: str) -> "Constellation":
        table = {"qpsk": cls.qpsk, "qam16": cls.qam16, "qam64": cls.qam64}
        try:
            return table[name.lower()]()
        except KeyError:
            raise ValueError(f"unknown constellation {name!r}") from None

    def draw(self, shape, rng: np.random.Generator) -> np.ndarray:
        return self.points[rng.integers(0, self.points.size, size=shape)]


@dataclass(frozen=True)
class SymbolFrame:
    """I.i.d. unit-power symbols over time indices [-pad, length_n + tail).

    ``symbols[pad + n]`` is the symbol at time index n; the body is [0, length_n)
    and the pad/tail margins keep shifted reads in range.
    """

    symbols: np.ndarray
    pad: int
    length_n: int

    def __post_init__(self):
        if self.pad < 0:
            raise ValueError("pad must be nonnegative")
        if self.symbols.size < self.pad + self.length_n:
            raise ValueError("symbols must cover at least pad + length_n entries")

    @property
    def tail(self) -> int:
        return self.symbols.size - self.pad - self.length_n

    @classmethod
    def draw(cls, constellation: Constellation, length_n: int, pad: int,
             rng: np.random.Generator, tail: int = 0) -> "SymbolFrame":
        return cls(constellation.draw(pad + length_n + tail, rng), pad, length_n)

    def segment(self, start: int, length: int) -> np.ndarray:
        """View of symbols for time indices [start, start + length); start >= -pad."""
        if start < -self.pad or start + length > self.length_n + self.tail:
            raise ValueError("segment out of range for this frame's pad/tail")
        i0 = self.pad + start
        return self.symbols[i0:i0 + length]


@dataclass(frozen=True)
class BeamformerSet:
    """Per-path beamformers F = [f_1..f_L] (columns) with pre-compensation delays kappa."""

    vectors: np.ndarray
    kappas: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=complex)
        kap = np.asarray(self.kappas, dtype=int)
        if vec.ndim != 2:
            raise ValueError("vectors must have shape (M, L)")
        if kap.ndim != 1 or kap.size != vec.shape[1]:
            raise ValueError("kappas must list one delay per beamformer column")
        if np.any(kap < 0):
            raise ValueError("kappas must be nonnegative")
        if len(set(kap.tolist())) != kap.size:
            raise ValueError("kappas must be pairwise distinct")
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "kappas", kap)

    @property
    def num_antennas(self) -> int:
        return self.vectors.shape[0]

    @property
    def num_paths(self) -> int:
        return self.vectors.shape[1]

    def power(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))


@dataclass(frozen=True)
class TxFrame:
    """Per-antenna baseband at symbol rate over time indices [-pad, n_body).

    ``samples`` has shape (M, pad + n_body); the CPI body is ``samples[:, pad:]``.
    """

    samples: np.ndarray
    pad: int

    @property
    def num_antennas(self) -> int:
        return self.samples.shape[0]

    @property
    def n_body(self) -> int:
        return self.samples.shape[1] - self.pad

    @property
    def body(self) -> np.ndarray:
        return self.samples[:, self.pad:]


def kappas_from_delays(delays: Sequence[int] | np.ndarray) -> np.ndarray:
    """Pre-compensation delays kappa_l = max(delays) - n_l.

    The smallest kappa is 0 and distinctness is preserved.
    """
    d = np.asarray(delays, dtype=int)
    if np.any(d < 0):
        raise ValueError("delays must be nonnegative")
    if len(set(d.tolist())) != d.size:
        raise ValueError("delays must be pairwise distinct")
    return d.max() - d


def dam_modulate(bf: BeamformerSet, frame: SymbolFrame) -> TxFrame:
    """Synthesize x[n] = sum_l f_l s[n - kappa_l] over n in [-(pad - max kappa), N).

    Equivalently X = F S with row l of S the kappa_l-shifted symbol stream.
    """
    kmax = int(bf.kappas.max())
    if frame.pad < kmax:
        raise ValueError(f"frame pad {frame.pad} too small for max kappa {kmax}")
    out_pad = frame.pad - kmax
    n_out = out_pad + frame.length_n
    out = np.zeros((bf.num_antennas, n_out), dtype=complex)
    for l in range(bf.num_paths):
        seg = frame.segment(-out_pad - int(bf.kappas[l]), n_out)
        out += np.outer(bf.vectors[:, l], seg)
    return TxFrame(out, out_pad)


def ofdm_modulate(precoders: np.ndarray, data: np.ndarray, cp_len: int) -> TxFrame:
    """Per-symbol inverse DFT of precoded subcarrier loads, scaled by K^{-1/2}, with CP.

    ``precoders`` is (M, K) with column k the beamformer of subcarrier k; ``data``
    is (I, K).  Each OFDM symbol body has K samples and is prepended with its last
    ``cp_len`` samples; the frame concatenates the I symbols.
    """
    precoders = np.asarray(precoders, dtype=complex)
    data = np.asarray(data, dtype=complex)
    if precoders.ndim != 2 or data.ndim != 2 or precoders.shape[1] != data.shape[1]:
        raise ValueError("precoders (M, K) and data (I, K) must share K")
    if cp_len < 0:
        raise ValueError("cp_len must be nonnegative")
    M, K = precoders.shape
    I = data.shape[0]
    # loads[i, m, k] = w_k^{(m)} X_i[k]; body[i, m, n] = K^{-1/2} sum_k loads e^{j2pi kn/K}
    loads = data[:, None, :] * precoders[None, :, :]
    body = np.fft.ifft(loads, axis=2) * np.sqrt(K)
    with_cp = np.concatenate([body[:, :, K - cp_len:], body], axis=2) if cp_len else body
    samples = np.concatenate([with_cp[i] for i in range(I)], axis=1)
    return TxFrame(samples, 0)


def papr(tx: TxFrame, window_len: int, mean_power: np.ndarray | None = None
         ) -> tuple[np.ndarray, float]:
    """Peak-to-average power ratio per antenna over the frame body, and the max over antennas.

    The peak is the max of |x|^2 over all length-``window_len`` sliding windows,
    which for a full frame collapses to the global per-antenna peak; the average
    is the per-antenna empirical mean |x|^2 unless ``mean_power`` pins it (one
    value per antenna, e.g. the ensemble power for bound comparisons).
    """
    body = tx.body
    n = body.shape[1]
    if not 1 <= window_len <= n:
        raise ValueError("window_len must be in [1, n_body]")
    p = np.abs(body) ** 2
    peak = p.max(axis=1)
    mean = np.asarray(mean_power, dtype=float) if mean_power is not None else p.mean(axis=1)
    if np.any(mean <= 0):
        raise ValueError("antenna with zero mean power has undefined PAPR")
    per_antenna = peak / mean
    return per_antenna, float(per_antenna.max())


def papr_bound_dam(bf: BeamformerSet, a_max: float) -> np.ndarray:
    """Coherent-addition PAPR bound per antenna: a_max^2 (sum_l |f_l|)^2 / sum_l |f_l|^2."""
    mags = np.abs(bf.vectors)
    denom = np.sum(mags**2, axis=1)
    if np.any(denom == 0):
        raise ValueError("zero beamformer row has undefined PAPR bound")
    return a_max**2 * np.sum(mags, axis=1) ** 2 / denom


def papr_bound_ofdm(precoders: np.ndarray, a_max: float) -> np.ndarray:
    """Coherent-addition PAPR bound per antenna with K subcarrier terms."""
    mags = np.abs(np.asarray(precoders, dtype=complex))
    denom = np.sum(mags**2, axis=1)
    if np.any(denom == 0):
        raise ValueError("zero precoder row has undefined PAPR bound")
    return a_max**2 * np.sum(mags, axis=1) ** 2 / denom


@dataclass(frozen=True)
class CcdfTable:
    """Empirical P(PAPR > threshold) with the sample count that produced it."""

    thresholds_db: np.ndarray
    probabilities: np.ndarray
    num_samples: int


def papr_ccdf(sampler: Iterable[np.ndarray], thresholds_db: Sequence[float],
              min_samples: int = 10_000) -> CcdfTable:
    """Tabulate the PAPR complementary CDF from batches of linear PAPR samples."""
    thr = 10.0 ** (np.asarray(thresholds_db, dtype=float) / 10.0)
    counts = np.zeros(thr.size, dtype=np.int64)
    total = 0
    for batch in sampler:
        b = np.asarray(batch, dtype=float)
        total += b.size
        counts += (b[None, :] > thr[:, None]).sum(axis=1)
    if total < min_samples:
        raise ValueError(f"need at least {min_samples} PAPR samples, got {total}")
    return CcdfTable(np.asarray(thresholds_db, dtype=float), counts / total, total)


def dam_papr_sampler(path_amplitudes: Sequence[float], constellation: Constellation,
                     window_len: int, num_windows: int, rng: np.random.Generator,
                     batch_windows: int = 4096) -> Iterator[np.ndarray]:
    """Per-window PAPR samples of a single-antenna delay-precompensated stream.

    One sample is the peak |x|^2 over a length-``window_len`` observation window
    divided by the ensemble mean power sum_l |f_l|^2.  Windows are disjoint so
    samples are independent observations of equal length.
    """
    amps = np.asarray(path_amplitudes, dtype=float)
    kappas = np.arange(amps.size)  # distinct unit-spaced taps; levels depend only on |f_l|
    mean_power = float(np.sum(amps**2))
    done = 0
    while done < num_windows:
        nwin = min(batch_windows, num_windows - done)
        n = nwin * window_len
        s = constellation.draw(n + kappas.max(), rng)
        x = np.zeros(n, dtype=complex)
        for a, k in zip(amps, kappas):
            x += a * s[kappas.max() - k:kappas.max() - k + n]
        peaks = (np.abs(x) ** 2).reshape(nwin, window_len).max(axis=1)
        done += nwin
        yield peaks / mean_power


def ofdm_papr_sampler(precoder_row: np.ndarray, constellation: Constellation,
                      num_symbols: int, rng: np.random.Generator,
                      batch_symbols: int = 2048) -> Iterator[np.ndarray]:
    """Per-symbol PAPR samples of a single-antenna OFDM stream (no CP needed).

    One sample is the peak |x|^2 over one K-sample symbol body divided by the
    ensemble mean power K^{-1} sum_k |w_k|^2.
    """
    w = np.asarray(precoder_row, dtype=complex)
    K = w.size
    mean_power = float(np.sum(np.abs(w) ** 2)) / K
    done = 0
    while done < num_symbols:
        nsym = min(batch_symbols, num_symbols - done)
        loads = constellation.draw((nsym, K), rng) * w[None, :]
        body = np.fft.ifft(loads, axis=1) * np.sqrt(K)
        peaks = (np.abs(body) ** 2).max(axis=1)
        done += nsym
        yield peaks / mean_power


def write_frame(tx: TxFrame, path) -> None:
    """Export the frame body as little-endian interleaved complex64 for debugging."""
    flat = np.ascontiguousarray(tx.body, dtype=np.complex64)
    if flat.dtype.byteorder == ">":  # big-endian hosts only
        flat = flat.byteswap()
    flat.tofile(path)
