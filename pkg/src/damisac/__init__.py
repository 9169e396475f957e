"""Delay alignment modulation for integrated sensing and communication.

Library layout:

- ``channel`` — multipath MISO channel, sensing target, steering vectors, scenario config
- ``waveform`` — symbols, delay-precompensated single-carrier synthesis, OFDM synthesis, PAPR
- ``sensing`` — echo synthesis, matched-filter delay-Doppler maps, ambiguity analysis
- ``ofdm_radar`` — FFT-based OFDM radar baseline
- ``conic`` — small in-house solver for Hermitian-PSD trace programs with one SOC bound
- ``beamforming`` — zero-forcing projectors, lifted relaxation, rank-one recovery, baselines
- ``cli`` — scenario-driven experiments emitting CSV tables and SVG figures
"""

__all__ = ["beamforming", "channel", "conic", "ofdm_radar", "sensing", "waveform", "cli"]
__version__ = "0.1.0"
