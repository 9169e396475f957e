import numpy as np
import pytest

from damisac.waveform import (
    BeamformerSet,
    Constellation,
    SymbolFrame,
    TxFrame,
    dam_modulate,
    kappas_from_delays,
    ofdm_modulate,
    papr,
    papr_bound_dam,
    papr_bound_ofdm,
    papr_ccdf,
    dam_papr_sampler,
    ofdm_papr_sampler,
    write_frame,
)


def _rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------- constellations

def test_constellations_unit_power_and_amax():
    for name, amax in (("qpsk", 1.0), ("qam16", np.sqrt(18 / 10)), ("qam64", np.sqrt(98 / 42))):
        c = Constellation.from_name(name)
        assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0)
        assert c.a_max == pytest.approx(amax)


def test_unknown_constellation_rejected():
    with pytest.raises(ValueError):
        Constellation.from_name("qam256")


# ---------------------------------------------------------------- kappa mapping

def test_kappas_three_paths():
    np.testing.assert_array_equal(kappas_from_delays([1, 3, 5]), [4, 2, 0])


def test_kappas_unsorted_delays():
    np.testing.assert_array_equal(kappas_from_delays([7, 18, 11]), [11, 0, 7])


def test_kappas_single_path():
    np.testing.assert_array_equal(kappas_from_delays([9]), [0])


def test_kappas_reject_duplicates():
    with pytest.raises(ValueError):
        kappas_from_delays([4, 4, 1])


# ---------------------------------------------------------------- DAM synthesis

def test_dam_modulate_identity_precoding():
    frame = SymbolFrame.draw(Constellation.qpsk(), 128, pad=0, rng=_rng(1))
    f = np.zeros((3, 1), dtype=complex)
    f[0, 0] = 1.0
    tx = dam_modulate(BeamformerSet(f, np.array([0])), frame)
    np.testing.assert_array_equal(tx.body[0], frame.segment(0, 128))
    np.testing.assert_array_equal(tx.body[1], 0)


def test_dam_modulate_matches_matrix_form():
    rng = _rng(2)
    M, L, N = 4, 3, 64
    kappas = np.array([5, 2, 0])
    frame = SymbolFrame.draw(Constellation.qam16(), N, pad=5, rng=rng)
    F = rng.standard_normal((M, L)) + 1j * rng.standard_normal((M, L))
    bf = BeamformerSet(F, kappas)
    tx = dam_modulate(bf, frame)
    # brute-force sample-by-sample: column n = sum_l f_l s[n - kappa_l]
    S = np.stack([frame.segment(-int(k), N) for k in kappas])
    np.testing.assert_allclose(tx.body, F @ S, rtol=1e-12)


def test_dam_modulate_requires_pad():
    frame = SymbolFrame.draw(Constellation.qpsk(), 16, pad=1, rng=_rng(0))
    bf = BeamformerSet(np.ones((2, 1), dtype=complex), np.array([3]))
    with pytest.raises(ValueError):
        dam_modulate(bf, frame)


def test_dam_modulate_linearity():
    rng = _rng(7)
    frame = SymbolFrame.draw(Constellation.qpsk(), 50, pad=4, rng=rng)
    kappas = np.array([0, 4])
    F1 = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    F2 = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    t1 = dam_modulate(BeamformerSet(F1, kappas), frame)
    t2 = dam_modulate(BeamformerSet(F2, kappas), frame)
    t12 = dam_modulate(BeamformerSet(F1 + F2, kappas), frame)
    np.testing.assert_allclose(t12.samples, t1.samples + t2.samples, rtol=1e-12)


def test_dam_average_power_matches_beamformer_power():
    rng = _rng(3)
    F = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    bf = BeamformerSet(F, np.array([0, 3, 7]))
    frame = SymbolFrame.draw(Constellation.qpsk(), 100_000, pad=7, rng=rng)
    tx = dam_modulate(bf, frame)
    mean_power = np.mean(np.sum(np.abs(tx.body) ** 2, axis=0))
    assert mean_power == pytest.approx(bf.power(), rel=0.01)


# ---------------------------------------------------------------- OFDM synthesis

def test_ofdm_single_subcarrier_is_pure_tone():
    K, M = 64, 2
    w = np.ones((M, K), dtype=complex)
    data = np.zeros((1, K), dtype=complex)
    k0 = 5
    data[0, k0] = 1.0
    tx = ofdm_modulate(w, data, cp_len=0)
    n = np.arange(K)
    expected = np.exp(2j * np.pi * k0 * n / K) / np.sqrt(K)
    np.testing.assert_allclose(tx.body[0], expected, atol=1e-12)


def test_ofdm_cyclic_prefix_copies_tail():
    rng = _rng(4)
    K, M, I, cp = 32, 3, 4, 8
    w = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    data = Constellation.qpsk().draw((I, K), rng)
    tx = ofdm_modulate(w, data, cp_len=cp)
    assert tx.n_body == I * (K + cp)
    for i in range(I):
        sym = tx.body[:, i * (K + cp):(i + 1) * (K + cp)]
        np.testing.assert_array_equal(sym[:, :cp], sym[:, K:])


def test_ofdm_demod_roundtrip_recovers_data():
    rng = _rng(5)
    K, I, cp = 128, 3, 16
    w = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(1, K)))
    data = Constellation.qam64().draw((I, K), rng)
    tx = ofdm_modulate(w, data, cp_len=cp)
    for i in range(I):
        body = tx.body[0, i * (K + cp) + cp:(i + 1) * (K + cp)]
        spec = np.fft.fft(body) / np.sqrt(K)
        np.testing.assert_allclose(spec, w[0] * data[i], atol=1e-10)


def test_ofdm_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        ofdm_modulate(np.ones((2, 8), dtype=complex), np.ones((1, 4), dtype=complex), 0)


# ---------------------------------------------------------------- PAPR

def test_papr_constant_modulus_stream_is_unity():
    frame = SymbolFrame.draw(Constellation.qpsk(), 4096, pad=0, rng=_rng(6))
    bf = BeamformerSet(np.ones((1, 1), dtype=complex), np.array([0]))
    tx = dam_modulate(bf, frame)
    per, overall = papr(tx, window_len=256)
    assert overall == pytest.approx(1.0)
    assert per[0] == pytest.approx(1.0)


def test_papr_rejects_zero_row():
    tx = TxFrame(np.zeros((1, 64), dtype=complex), 0)
    with pytest.raises(ValueError):
        papr(tx, 16)


def test_papr_bound_dam_values():
    # constant modulus, PSK: bound is the number of paths
    bf = BeamformerSet(np.ones((2, 5), dtype=complex) / np.sqrt(10), np.arange(5))
    np.testing.assert_allclose(papr_bound_dam(bf, 1.0), 5.0)
    # single path: bound is a_max^2
    bf1 = BeamformerSet(0.3 * np.ones((1, 1), dtype=complex), np.array([0]))
    np.testing.assert_allclose(papr_bound_dam(bf1, 1.5), 2.25)
    # mixed magnitudes (1, 2): (1+2)^2 / (1+4)
    bfm = BeamformerSet(np.array([[1.0, 2.0]], dtype=complex), np.array([0, 1]))
    np.testing.assert_allclose(papr_bound_dam(bfm, 1.0), 9 / 5)


def test_papr_bound_ofdm_values():
    w = np.ones((1, 2048), dtype=complex)
    np.testing.assert_allclose(papr_bound_ofdm(w, 1.0), 2048.0)
    np.testing.assert_allclose(papr_bound_ofdm(np.ones((1, 1), dtype=complex), 1.3), 1.69)
    np.testing.assert_allclose(papr_bound_ofdm(np.array([[1.0, 1.0, 2.0]]), 1.0), 16 / 6)


def test_papr_never_below_one_and_below_bound():
    rng = _rng(8)
    for trial in range(20):
        M, L, N = 3, 4, 2048
        F = rng.standard_normal((M, L)) + 1j * rng.standard_normal((M, L))
        bf = BeamformerSet(F, np.array([0, 2, 5, 9]))
        const = Constellation.qpsk()
        frame = SymbolFrame.draw(const, N, pad=9, rng=rng)
        tx = dam_modulate(bf, frame)
        ensemble = np.sum(np.abs(F) ** 2, axis=1)
        per, overall = papr(tx, window_len=N, mean_power=ensemble)
        bound = papr_bound_dam(bf, const.a_max)
        assert overall >= 1.0 - 1e-12
        assert np.all(per <= bound * (1 + 1e-12))


def test_dam_coherent_peak_reaches_path_count():
    # aligned-phase constant-modulus beamformer: peak/average approaches L
    L = 5
    sampler = dam_papr_sampler(np.ones(L), Constellation.qpsk(), window_len=4096,
                               num_windows=256, rng=_rng(9))
    peak = max(float(b.max()) for b in sampler)
    assert 10 * np.log10(peak) == pytest.approx(10 * np.log10(L), abs=0.5)


def test_papr_ccdf_basics_and_ordering():
    thresholds = np.arange(0.0, 13.0, 0.5)
    tables = {}
    for L, seed in ((5, 1), (20, 2)):
        sampler = dam_papr_sampler(np.ones(L), Constellation.qpsk(), window_len=512,
                                   num_windows=12_000, rng=_rng(seed))
        tables[L] = papr_ccdf(sampler, thresholds)
    ofdm = papr_ccdf(ofdm_papr_sampler(np.ones(2048), Constellation.qpsk(), 12_000, _rng(3)),
                     thresholds)
    for t in list(tables.values()) + [ofdm]:
        assert t.num_samples == 12_000
        assert t.probabilities[0] == pytest.approx(1.0)  # threshold 0 dB
        assert np.all(np.diff(t.probabilities) <= 1e-12)  # monotone nonincreasing
    mid = 8  # 4 dB: distributions well separated here
    assert tables[5].probabilities[mid] < tables[20].probabilities[mid] < ofdm.probabilities[mid]


def test_papr_ccdf_enforces_sample_floor():
    with pytest.raises(ValueError):
        papr_ccdf(iter([np.ones(10)]), [0.0, 3.0])


# ---------------------------------------------------------------- binary export

def test_write_frame_complex64_roundtrip(tmp_path):
    rng = _rng(10)
    tx = TxFrame(rng.standard_normal((2, 16)) + 1j * rng.standard_normal((2, 16)), 0)
    path = tmp_path / "frame.c64"
    write_frame(tx, path)
    back = np.fromfile(path, dtype="<c8").reshape(2, 16)
    np.testing.assert_allclose(back, tx.body.astype(np.complex64))
