"""mdst: micro-Doppler spectrogram simulation, texture transfer, and benchmarks."""

__version__ = "0.1.0"
