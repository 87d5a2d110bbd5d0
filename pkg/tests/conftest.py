import numpy as np
import pytest

from speakerseg.audio_io import AudioBuffer
from speakerseg.synth import SynthSpec, synth_speakers


def sine(freq_hz, fs, n, amplitude=0.4, phase=0.0):
    t = np.arange(n) / fs
    return amplitude * np.sin(2 * np.pi * freq_hz * t + phase)


def harmonic_tone(freq_hz, fs, n, n_harmonics=8, amplitude=0.3):
    """Equal-amplitude harmonic complex with staggered phases."""
    t = np.arange(n) / fs
    sig = np.zeros(n)
    for h in range(1, n_harmonics + 1):
        if freq_hz * h >= 0.45 * fs:
            break
        sig += np.sin(2 * np.pi * freq_hz * h * t + 0.37 * h)
    return amplitude * sig / np.max(np.abs(sig))


@pytest.fixture(scope="session")
def two_speaker_buffer():
    buffer, truth = synth_speakers(
        SynthSpec(n_speakers=2, duration_s=5.0, f0_hz=(110.0, 220.0), seed=11)
    )
    return buffer, truth


@pytest.fixture(scope="session")
def single_speaker_buffer():
    buffer, _ = synth_speakers(
        SynthSpec(n_speakers=1, duration_s=10.0, f0_hz=(140.0,), seed=4)
    )
    return buffer


def buffer_from(samples, fs=8000):
    return AudioBuffer(samples=np.asarray(samples, dtype=np.float64), sample_rate_hz=fs)
