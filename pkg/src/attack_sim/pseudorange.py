"""Downlink phase: AMC at Alice, interception and classification at Eve,
and the reverse mapping of a detected modulation to a ring around Alice."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Position2D, Scenario, apply_awgn, snr_at, snr_to_distance
from .classifier import ClassifierConfig, analyze
from .errors import DomainError, EmptyRegion
from .mcs import DEFAULT_TABLE, McsTable, Modulation, select_mcs, snr_interval_for_modulation
from .waveform import IqFrame, modulate

# Eve's downlink listening distance as a fraction of the cell radius.
EVE_PRESETS = {"near": 0.10, "mid": 0.45, "far": 0.90}


@dataclass(frozen=True)
class Ring:
    """Annulus centred on Alice; a disk when ``inner`` is the reference distance."""

    inner_radius: float
    outer_radius: float

    def __post_init__(self):
        if not (0 < self.inner_radius < self.outer_radius):
            raise EmptyRegion(f"degenerate ring [{self.inner_radius}, {self.outer_radius}]")

    @property
    def width(self) -> float:
        return self.outer_radius - self.inner_radius

    @property
    def area(self) -> float:
        return math.pi * (self.outer_radius ** 2 - self.inner_radius ** 2)

    def contains(self, distance: float) -> bool:
        return self.inner_radius <= distance <= self.outer_radius


@dataclass(frozen=True)
class DownlinkObservation:
    true_modulation: Modulation
    predicted_modulation: Modulation
    eve_snr: float
    correct: bool
    c42_estimate: float = math.nan

    def as_row(self) -> dict:
        return {
            "true_mod": self.true_modulation.label,
            "pred_mod": self.predicted_modulation.label,
            "eve_snr_db": self.eve_snr,
            "correct": int(self.correct),
            "c42": self.c42_estimate,
        }


def coverage_ring(scenario: Scenario) -> Ring:
    """Everything Alice serves: from the reference distance to the cell edge."""
    return Ring(scenario.reference_distance, scenario.cell_radius)


def ring_for_modulation(m: Modulation, scenario: Scenario, table: McsTable = DEFAULT_TABLE) -> Ring:
    lo, hi = snr_interval_for_modulation(m, table)
    power = scenario.alice_tx_power
    if math.isinf(hi):
        inner = scenario.reference_distance
    else:
        inner = snr_to_distance(hi, power, scenario).distance
    outer = min(snr_to_distance(lo, power, scenario).distance, scenario.cell_radius)
    if not inner < outer:
        raise EmptyRegion(f"{m.label} band lies outside the cell")
    return Ring(inner, outer)


def eve_preset_position(preset: str, scenario: Scenario, bearing_rad: float = 0.0) -> Position2D:
    try:
        fraction = EVE_PRESETS[preset]
    except KeyError:
        raise DomainError(f"unknown Eve preset {preset!r}; expected one of {sorted(EVE_PRESETS)}") from None
    return Position2D.polar(fraction * scenario.cell_radius, bearing_rad)


def intercept(m: Modulation, eve_snr: float, scenario: Scenario, length: int,
              rng: np.random.Generator) -> IqFrame:
    """Alice's frame as seen by Eve, in absolute units (noise power = scenario.noise_power)."""
    clean = modulate(m, length, rng)
    noisy = apply_awgn(clean, eve_snr, rng)
    scale = math.sqrt(scenario.noise_power * 10 ** (eve_snr / 10))
    return IqFrame(noisy.samples * scale, nominal_snr=eve_snr, modulation=m)


def downlink_phase(bob_position, eve_position, scenario: Scenario, table: McsTable,
                   config: ClassifierConfig, rng: np.random.Generator):
    """Run one downlink interception.

    Returns ``(DownlinkObservation, Ring)`` where the ring belongs to the
    *predicted* modulation.  Raises OutOfCoverage when Bob is unserved and
    SignalBelowNoise when Eve cannot detect Alice.
    """
    bob_distance = Position2D(*bob_position).norm()
    if bob_distance > scenario.cell_radius:
        raise DomainError("Bob lies outside the cell")
    true_mod = select_mcs(snr_at(scenario.alice_tx_power, max(bob_distance, scenario.reference_distance),
                                 scenario), table).modulation
    eve_distance = max(Position2D(*eve_position).norm(), scenario.reference_distance)
    eve_snr = snr_at(scenario.alice_tx_power, eve_distance, scenario)
    frame = intercept(true_mod, eve_snr, scenario, config.frame_length, rng)
    result = analyze(frame, config)
    obs = DownlinkObservation(true_mod, result.modulation, eve_snr,
                              result.modulation == true_mod, result.c42)
    return obs, ring_for_modulation(result.modulation, scenario, table)
