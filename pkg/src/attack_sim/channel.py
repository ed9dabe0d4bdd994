"""Line-of-sight free-space propagation, receiver noise and AWGN.

All public functions speak dB for SNR and path loss and SI units for
everything else.  Alice sits at the origin.
"""

from __future__ import annotations

import dataclasses
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError
from .waveform import IqFrame

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K

# Lowest Table-1 minimum SNR; Bob is unserved below it.
COVERAGE_FLOOR_DB = 2.0


class Position2D(NamedTuple):
    x: float
    y: float

    @classmethod
    def polar(cls, radius: float, angle_rad: float) -> Position2D:
        return cls(radius * math.cos(angle_rad), radius * math.sin(angle_rad))

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def distance_to(self, other: Position2D) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclasses.dataclass(frozen=True)
class Scenario:
    """Link budget and cell geometry.

    ``cell_radius`` defaults to the coverage radius of Alice, i.e. the
    distance at which her downlink SNR drops to the 2 dB MCS floor.
    Antenna gains are linear (1.0 == 0 dBi).
    """

    carrier_frequency: float
    alice_tx_power: float = 0.2
    bob_tx_power: float = 0.1
    tx_antenna_gain: float = 1.0
    rx_antenna_gain: float = 1.0
    bandwidth: float = 20e6
    noise_figure: float = 7.0
    temperature: float = 290.0
    reference_distance: float = 0.01
    cell_radius: float | None = None

    def __post_init__(self):
        positive = {
            "carrier_frequency": self.carrier_frequency,
            "alice_tx_power": self.alice_tx_power,
            "bob_tx_power": self.bob_tx_power,
            "tx_antenna_gain": self.tx_antenna_gain,
            "rx_antenna_gain": self.rx_antenna_gain,
            "bandwidth": self.bandwidth,
            "temperature": self.temperature,
            "reference_distance": self.reference_distance,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be finite and positive, got {value!r}")
        if not math.isfinite(self.noise_figure):
            raise ConfigError("noise_figure must be finite")
        if self.cell_radius is None:
            radius = snr_to_distance(COVERAGE_FLOOR_DB, self.alice_tx_power, self).distance
            object.__setattr__(self, "cell_radius", radius)
        elif not self.cell_radius > self.reference_distance:
            raise ConfigError("cell_radius must exceed reference_distance")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def noise_power(self) -> float:
        """Thermal noise k*T*B scaled by the noise figure, in watts."""
        return BOLTZMANN * self.temperature * self.bandwidth * 10 ** (self.noise_figure / 10)

    @property
    def noise_power_db(self) -> float:
        return 10 * math.log10(self.noise_power)


def free_space_path_loss(distance, scenario: Scenario):
    """Friis free-space loss 20*log10(4*pi*d/lambda) in dB.

    Distances below ``scenario.reference_distance`` are clamped to it.
    Accepts scalars or arrays.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise DomainError("distance must be positive")
    d = np.maximum(d, scenario.reference_distance)
    loss = 20 * np.log10(4 * math.pi * d / scenario.wavelength)
    return float(loss) if loss.ndim == 0 else loss


def _budget_db(tx_power: float, scenario: Scenario) -> float:
    # EIRP times receive gain, over the noise floor, in dB
    if not tx_power > 0:
        raise DomainError("tx_power must be positive")
    gains = tx_power * scenario.tx_antenna_gain * scenario.rx_antenna_gain
    return 10 * math.log10(gains) - scenario.noise_power_db


def snr_at(tx_power: float, distance, scenario: Scenario):
    """Received SNR in dB at ``distance`` for a transmitter of ``tx_power`` watts."""
    return _budget_db(tx_power, scenario) - free_space_path_loss(distance, scenario)


class RangeEstimate(NamedTuple):
    distance: float
    clamped: bool


def snr_to_distance(snr: float, tx_power: float, scenario: Scenario) -> RangeEstimate:
    """Invert :func:`snr_at`.

    SNRs above the reference-distance value clamp to ``reference_distance``
    with ``clamped=True``.  An SNR of -inf maps to an infinite distance.
    """
    if math.isnan(snr):
        raise DomainError("snr is NaN")
    loss = _budget_db(tx_power, scenario) - snr
    distance = scenario.wavelength / (4 * math.pi) * 10 ** (loss / 20)
    if distance < scenario.reference_distance:
        return RangeEstimate(scenario.reference_distance, True)
    return RangeEstimate(distance, False)


def apply_awgn(frame: IqFrame, snr: float, rng: np.random.Generator) -> IqFrame:
    """Add circular complex Gaussian noise of variance 10**(-snr/10) per sample.

    The frame is assumed to carry unit average symbol power.
    """
    if len(frame) == 0:
        raise DomainError("empty frame")
    if snr == math.inf:
        return dataclasses.replace(frame, samples=frame.samples.copy(), nominal_snr=snr)
    sigma = math.sqrt(10 ** (-snr / 10) / 2)
    noise = rng.standard_normal((len(frame), 2)) @ np.array([sigma, 1j * sigma])
    return dataclasses.replace(frame, samples=frame.samples + noise, nominal_snr=snr)


_CONFIG_KEYS = {
    "frequency_hz": "carrier_frequency",
    "alice_tx_power_w": "alice_tx_power",
    "bob_tx_power_w": "bob_tx_power",
    "bandwidth_hz": "bandwidth",
    "noise_figure_db": "noise_figure",
    "temperature_k": "temperature",
    "reference_distance_m": "reference_distance",
    "cell_radius_m": "cell_radius",
    "tx_gain": "tx_antenna_gain",
    "rx_gain": "rx_antenna_gain",
}


def parse_scenario(text: str) -> Scenario:
    """Build a Scenario from ``key = value`` lines.  ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unrecognised entry {raw.strip()!r}")
        try:
            values[_CONFIG_KEYS[key]] = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} is not a number") from None
    if "carrier_frequency" not in values:
        raise ConfigError("frequency_hz is required")
    return Scenario(**values)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def format_scenario(scenario: Scenario) -> str:
    lines = [f"{key} = {getattr(scenario, attr)!r}" for key, attr in _CONFIG_KEYS.items()]
    return "\n".join(lines) + "\n"
