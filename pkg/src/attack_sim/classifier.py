"""Eve's modulation classifier and SNR estimator.

Classification thresholds the normalised fourth-order cumulant C42 of the
received frame.  Eve knows her own noise floor, which lets her remove the
noise contribution from the second-order moment before normalising.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError, SignalBelowNoise
from .mcs import Modulation
from .waveform import IqFrame, read_iqf

MIN_CLASSIFY_LENGTH = 64


@dataclass(frozen=True)
class ClassifierConfig:
    noise_power: float
    frame_length: int = 4096
    thresholds: tuple[float, float, float] = (-1.5, -0.84, -0.6495)

    def __post_init__(self):
        if not self.noise_power > 0:
            raise ConfigError("noise_power must be positive")
        if self.frame_length < MIN_CLASSIFY_LENGTH:
            raise ConfigError(f"frame_length must be at least {MIN_CLASSIFY_LENGTH}")
        t = self.thresholds
        if len(t) != 3 or not (t[0] < t[1] < t[2]):
            raise ConfigError("thresholds must be three strictly increasing values")


def _signal_power(samples: np.ndarray, noise_power: float) -> np.ndarray:
    return np.mean(samples.real ** 2 + samples.imag ** 2, axis=-1) - noise_power


def estimate_snr(frame: IqFrame, noise_power: float) -> float:
    """SNR in dB from the excess of mean received power over the noise floor."""
    if len(frame) == 0:
        raise DomainError("empty frame")
    signal = float(_signal_power(frame.samples, noise_power))
    if not signal > 0:
        raise SignalBelowNoise("mean received power does not exceed the noise floor")
    return 10 * math.log10(signal / noise_power)


def estimate_c42(frame: IqFrame, noise_power: float) -> float:
    """Noise-corrected, power-normalised sample estimate of C42."""
    if len(frame) == 0:
        raise DomainError("empty frame")
    r = frame.samples
    p = r.real ** 2 + r.imag ** 2
    m20 = np.mean(r * r)
    m21 = float(np.mean(p))
    m42 = float(np.mean(p * p))
    signal = m21 - noise_power
    if not signal > 0:
        raise SignalBelowNoise("mean received power does not exceed the noise floor")
    # strip the Gaussian noise terms from E|r|^4 (4*S*N + 2*N^2); E r^2 has none
    m42_signal = m42 - 4 * signal * noise_power - 2 * noise_power ** 2
    return (m42_signal - abs(m20) ** 2 - 2 * signal ** 2) / signal ** 2


class Classification(NamedTuple):
    modulation: Modulation
    c42: float
    snr_db: float


def analyze(frame: IqFrame, config: ClassifierConfig) -> Classification:
    if len(frame) < MIN_CLASSIFY_LENGTH:
        raise DomainError(f"classification needs at least {MIN_CLASSIFY_LENGTH} samples")
    c42 = estimate_c42(frame, config.noise_power)
    label = int(np.searchsorted(config.thresholds, c42, side="right"))
    return Classification(Modulation(label), c42, estimate_snr(frame, config.noise_power))


def classify(frame: IqFrame, config: ClassifierConfig) -> Modulation:
    return analyze(frame, config).modulation


CSV_COLUMNS = ("frame_id", "true_mod", "predicted_mod", "c42_estimate", "snr_estimate_db")


def classify_files(paths, config: ClassifierConfig) -> str:
    """Classify IQF1 files and return CSV text, one row per file.

    Frames whose power sits below the noise floor get an empty prediction.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for path in paths:
        frame = read_iqf(path)
        true_mod = "" if frame.modulation is None else frame.modulation.label
        try:
            result = analyze(frame, config)
        except SignalBelowNoise:
            writer.writerow([Path(path).stem, true_mod, "", "", ""])
            continue
        writer.writerow([Path(path).stem, true_mod, result.modulation.label,
                         repr(result.c42), repr(result.snr_db)])
    return buf.getvalue()

