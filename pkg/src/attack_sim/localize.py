"""Uplink phase: circular SNR sweep inside the ring, coarse Friis ranging
and iterative circular refinement, for one or several Bobs.

The attacker functions never receive Bob's position.  They talk to an
:class:`UplinkChannel`, which owns the ground truth and only answers SNR
(and, for an array, snapshot) queries at positions Eve chooses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import Position2D, Scenario, snr_at, snr_to_distance
from .classifier import estimate_snr
from .errors import AttackSimError, ConfigError, SweepFailed
from .mcs import Modulation
from .pseudorange import Ring
from .waveform import IqFrame, modulate

UPLINK_MODULATION = Modulation.QPSK


@dataclass(frozen=True)
class SweepParams:
    """Step sizes in degrees, tolerance in metres.

    ``frame_synthesis`` selects how estimated-mode measurements are drawn:
    ``"frame"`` builds every QPSK frame sample by sample, ``"statistic"``
    draws the frame's mean power directly from its exact noncentral
    chi-square law (same distribution, ~1000x cheaper).
    """

    delta_theta_1: float = 1.0
    delta_theta_2: float = 1.0
    tolerance: float = 0.5
    max_refinements: int = 1
    measurement_frame_length: int = 4096
    sweep_radius_rule: str = "midpoint"
    frame_synthesis: str = "statistic"

    def __post_init__(self):
        for name in ("delta_theta_1", "delta_theta_2"):
            step = getattr(self, name)
            if not 0 < step <= 90:
                raise ConfigError(f"{name} must lie in (0, 90] degrees")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.max_refinements < 1:
            raise ConfigError("max_refinements must be at least 1")
        if self.measurement_frame_length < 1:
            raise ConfigError("measurement_frame_length must be at least 1")
        if self.sweep_radius_rule not in ("midpoint", "half_width"):
            raise ConfigError("sweep_radius_rule must be 'midpoint' or 'half_width'")
        if self.frame_synthesis not in ("frame", "statistic"):
            raise ConfigError("frame_synthesis must be 'frame' or 'statistic'")


def measure_uplink_snr(eve_position, bob_position, scenario: Scenario, params: SweepParams,
                       rng: np.random.Generator, oracle: bool = False):
    """SNR (dB) Eve measures on Bob's uplink at one or many positions.

    ``eve_position`` may be a single point or an ``(n, 2)`` array.  In
    oracle mode the geometric SNR is returned exactly; otherwise the value
    is the estimate from a ``measurement_frame_length``-sample QPSK frame,
    and undetectable frames come back as ``-inf``.
    """
    eve = np.asarray(eve_position, dtype=float)
    single = eve.ndim == 1
    eve = np.atleast_2d(eve)
    offset = eve - np.asarray(bob_position, dtype=float)
    # co-located Eve sees the reference-distance SNR
    distance = np.maximum(np.hypot(offset[:, 0], offset[:, 1]), scenario.reference_distance)
    true_snr = np.atleast_1d(snr_at(scenario.bob_tx_power, distance, scenario))
    if oracle:
        result = true_snr
    elif params.frame_synthesis == "statistic":
        result = _statistic_snr(true_snr, params.measurement_frame_length, rng)
    else:
        result = np.array([_frame_snr(s, scenario, params.measurement_frame_length, rng)
                           for s in true_snr])
    return float(result[0]) if single else result


def _frame_snr(snr_db: float, scenario: Scenario, length: int, rng) -> float:
    noise = scenario.noise_power
    symbols = modulate(UPLINK_MODULATION, length, rng).samples
    noise_samples = rng.standard_normal((length, 2)) @ np.array([1, 1j]) * math.sqrt(noise / 2)
    frame = IqFrame(math.sqrt(noise * 10 ** (snr_db / 10)) * symbols + noise_samples)
    try:
        return estimate_snr(frame, noise)
    except AttackSimError:
        return -math.inf


def _statistic_snr(snr_db: np.ndarray, length: int, rng) -> np.ndarray:
    # For constant-envelope symbols, sum_k |r_k|^2 / (N/2) ~ chi'^2(2L, 2L*snr).
    dof = 2 * length
    power = rng.noncentral_chisquare(dof, dof * 10 ** (snr_db / 10)) / dof
    excess = power - 1.0
    with np.errstate(divide="ignore"):
        return np.where(excess > 0, 10 * np.log10(np.maximum(excess, 1e-300)), -np.inf)


class UplinkChannel:
    """Ground-truth side of one Bob's uplink.

    Holds Bob's position and the measurement RNG; exposes measurements only.
    """

    def __init__(self, bob_position, scenario: Scenario, params: SweepParams,
                 rng: np.random.Generator, oracle: bool = False):
        self._bob = np.asarray(bob_position, dtype=float)
        self._scenario = scenario
        self._params = params
        self._rng = rng
        self.oracle = oracle
        self.measurements = 0

    def snr(self, eve_positions):
        n = 1 if np.ndim(eve_positions) == 1 else len(eve_positions)
        self.measurements += n
        return measure_uplink_snr(eve_positions, self._bob, self._scenario, self._params,
                                  self._rng, self.oracle)

    def snapshots(self, eve_position, boresight, ula):
        """ULA snapshots at ``eve_position`` with broadside along ``boresight``."""
        from .doa import ula_snapshots

        eve = np.asarray(eve_position, dtype=float)
        b = np.asarray(boresight, dtype=float)
        axis = np.array([-b[1], b[0]])
        to_bob = self._bob - eve
        dist = max(float(np.hypot(*to_bob)), self._scenario.reference_distance)
        sin_theta = float(np.clip(np.dot(to_bob, axis) / max(np.hypot(*to_bob), 1e-300), -1, 1))
        snr = math.inf if self.oracle else snr_at(self._scenario.bob_tx_power, dist, self._scenario)
        return ula_snapshots(math.degrees(math.asin(sin_theta)), snr, ula, self._rng)


def circle_points(center, radius: float, step_deg: float) -> np.ndarray:
    """Sweep positions on a circle, starting at 0 degrees, counter-clockwise."""
    n = max(1, math.ceil(360.0 / step_deg - 1e-9))
    angles = np.radians(step_deg * np.arange(n))
    c = np.asarray(center, dtype=float)
    return c + radius * np.column_stack([np.cos(angles), np.sin(angles)])


def _sweep(link: UplinkChannel, center, radius: float, step_deg: float):
    points = circle_points(center, radius, step_deg)
    return points, np.atleast_1d(link.snr(points))


def _argmax(points: np.ndarray, snrs: np.ndarray):
    if np.all(np.isneginf(snrs)):
        raise SweepFailed("no detectable uplink measurement on the sweep circle")
    k = int(np.argmax(snrs))  # first occurrence wins ties
    return Position2D(float(points[k, 0]), float(points[k, 1])), float(snrs[k])


def sweep_radius(ring: Ring, rule: str = "midpoint") -> float:
    if rule == "half_width":
        return (ring.outer_radius - ring.inner_radius) / 2
    return (ring.outer_radius + ring.inner_radius) / 2


@dataclass
class SweepResult:
    position: Position2D
    snr: float
    radius: float
    visited: np.ndarray
    snrs: np.ndarray


@dataclass
class LocalizationTrace:
    """Everything Eve did during one uplink localization."""

    initial_estimate: Position2D | None
    final_estimate: Position2D | None = None
    refinement_centers: list = field(default_factory=list)
    coarse_ranges: list = field(default_factory=list)
    visited: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    measured_snrs: np.ndarray = field(default_factory=lambda: np.empty(0))
    sweep_radius: float | None = None
    initial_sweep_steps: int = 0
    aborted: bool = False
    failure: str | None = None
    doa: dict | None = None
    distance_error: float | None = None

    @property
    def steps_taken(self) -> int:
        return len(self.measured_snrs)

    def record(self, positions, snrs) -> None:
        self.visited = np.vstack([self.visited, np.atleast_2d(positions)])
        self.measured_snrs = np.concatenate([self.measured_snrs, np.atleast_1d(snrs)])

    def to_dict(self) -> dict:
        def pos(p):
            return None if p is None else [float(p[0]), float(p[1])]

        return {
            "initial_estimate": pos(self.initial_estimate),
            "final_estimate": pos(self.final_estimate),
            "refinement_centers": [pos(p) for p in self.refinement_centers],
            "coarse_ranges": [float(r) for r in self.coarse_ranges],
            "sweep_radius": self.sweep_radius,
            "initial_sweep_steps": self.initial_sweep_steps,
            "steps_taken": self.steps_taken,
            "visited": self.visited.tolist(),
            "measured_snrs": [None if math.isinf(s) else float(s) for s in self.measured_snrs],
            "aborted": self.aborted,
            "failure": self.failure,
            "doa": self.doa,
            "distance_error": self.distance_error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)


def initial_sweep(ring: Ring, link: UplinkChannel, params: SweepParams) -> SweepResult:
    """Walk the circle at the ring's sweep radius; keep the loudest point."""
    radius = sweep_radius(ring, params.sweep_radius_rule)
    points, snrs = _sweep(link, (0.0, 0.0), radius, params.delta_theta_1)
    best, best_snr = _argmax(points, snrs)
    return SweepResult(best, best_snr, radius, points, snrs)


def refine(initial, link: UplinkChannel, scenario: Scenario, params: SweepParams,
           trace: LocalizationTrace | None = None) -> LocalizationTrace:
    """Coarse-range from the current centre, sweep the circle of that range,
    move to the loudest point; repeat.

    Stops once the estimated range drops below ``params.tolerance`` or after
    ``params.max_refinements`` range measurements.
    """
    center = Position2D(*initial)
    if trace is None:
        trace = LocalizationTrace(initial_estimate=center)
    for _ in range(params.max_refinements):
        snr = link.snr(center)
        trace.record(center, snr)
        d_be = snr_to_distance(snr, scenario.bob_tx_power, scenario).distance if snr > -math.inf else math.inf
        if not math.isfinite(d_be):
            trace.aborted = True
            break
        trace.coarse_ranges.append(d_be)
        if d_be < params.tolerance:
            break
        points, snrs = _sweep(link, center, d_be, params.delta_theta_2)
        trace.record(points, snrs)
        center, _ = _argmax(points, snrs)
        trace.refinement_centers.append(center)
    trace.final_estimate = center
    return trace


def localize_single(ring: Ring, link: UplinkChannel, scenario: Scenario,
                    params: SweepParams) -> LocalizationTrace:
    sweep = initial_sweep(ring, link, params)
    trace = trace_from_sweep(sweep)
    return refine(sweep.position, link, scenario, params, trace)


def trace_from_sweep(sweep: SweepResult) -> LocalizationTrace:
    trace = LocalizationTrace(initial_estimate=sweep.position, sweep_radius=sweep.radius,
                              initial_sweep_steps=len(sweep.snrs))
    trace.record(sweep.visited, sweep.snrs)
    return trace


def localize_multi(rings, links, scenario: Scenario, params: SweepParams) -> list[LocalizationTrace]:
    """Localize several Bobs on orthogonal uplink subcarriers.

    Bobs sharing a ring share one initial sweep, each measured on its own
    channel.  A failure for one Bob is recorded in its trace and does not
    affect the others.
    """
    if len(rings) != len(links):
        raise ConfigError("need exactly one ring per Bob")
    sweeps: dict[int, SweepResult | AttackSimError] = {}
    groups: dict[Ring, list[int]] = {}
    for k, ring in enumerate(rings):
        groups.setdefault(ring, []).append(k)
    for ring, members in groups.items():
        radius = sweep_radius(ring, params.sweep_radius_rule)
        points = circle_points((0.0, 0.0), radius, params.delta_theta_1)
        for k in members:
            snrs = np.atleast_1d(links[k].snr(points))
            try:
                best, best_snr = _argmax(points, snrs)
                sweeps[k] = SweepResult(best, best_snr, radius, points, snrs)
            except AttackSimError as exc:
                sweeps[k] = exc

    traces = []
    for k, link in enumerate(links):
        sweep = sweeps[k]
        if isinstance(sweep, AttackSimError):
            traces.append(LocalizationTrace(None, failure=f"{type(sweep).__name__}: {sweep}"))
            continue
        trace = trace_from_sweep(sweep)
        try:
            traces.append(refine(sweep.position, link, scenario, params, trace))
        except AttackSimError as exc:
            trace.failure = f"{type(exc).__name__}: {exc}"
            traces.append(trace)
    return traces
