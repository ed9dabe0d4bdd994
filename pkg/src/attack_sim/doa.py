"""Multi-antenna Eve: ULA snapshots, root-MUSIC bearings and the single-shot
jump from the initial sweep estimate towards Bob."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Position2D, Scenario, snr_to_distance
from .errors import ConfigError, DomainError, EstimationFailed
from .localize import LocalizationTrace, SweepParams, UplinkChannel, initial_sweep, refine, trace_from_sweep
from .mcs import Modulation
from .waveform import Constellation


@dataclass(frozen=True)
class UlaConfig:
    wavelength: float
    num_elements: int = 10
    element_spacing: float | None = None  # metres; None means half a wavelength
    num_snapshots: int = 128

    def __post_init__(self):
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2)
        if self.num_elements < 2:
            raise ConfigError("a ULA needs at least two elements")
        if not 0 < self.element_spacing <= self.wavelength / 2 * (1 + 1e-12):
            raise ConfigError("element spacing must lie in (0, lambda/2]")
        if self.num_snapshots < self.num_elements:
            raise ConfigError("need at least as many snapshots as elements")

    @classmethod
    def for_scenario(cls, scenario: Scenario, **kwargs) -> UlaConfig:
        return cls(scenario.wavelength, **kwargs)

    @property
    def spacing_wavelengths(self) -> float:
        return self.element_spacing / self.wavelength


@dataclass(frozen=True)
class DoaEstimate:
    theta: float  # degrees, broadside
    range: float  # metres
    target: Position2D
    hypothesis: str  # "front" (towards Alice) or "back"

    def to_dict(self) -> dict:
        return {"theta_deg": self.theta, "range_m": self.range,
                "target": [self.target.x, self.target.y], "hypothesis": self.hypothesis}


def steering_vector(theta_deg: float, config: UlaConfig) -> np.ndarray:
    m = np.arange(config.num_elements)
    return np.exp(2j * np.pi * config.spacing_wavelengths * m * math.sin(math.radians(theta_deg)))


def ula_snapshots(bearing: float, snr: float, config: UlaConfig, rng: np.random.Generator) -> np.ndarray:
    """``num_elements x num_snapshots`` matrix ``a(theta) s_k + n_k``.

    Symbols are unit-power QPSK; per-element noise variance is 10**(-snr/10).
    """
    if not abs(bearing) < 90:
        raise DomainError("bearing must lie strictly inside (-90, 90) degrees")
    pts = Constellation(Modulation.QPSK).points
    symbols = pts[rng.integers(0, len(pts), config.num_snapshots)]
    x = np.outer(steering_vector(bearing, config), symbols)
    if snr != math.inf:
        sigma = math.sqrt(10 ** (-snr / 10) / 2)
        shape = (config.num_elements, config.num_snapshots)
        x = x + sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return x


def root_music(snapshots: np.ndarray, num_sources: int = 1, config: UlaConfig | None = None):
    """Bearing estimate(s) in degrees from a ULA snapshot matrix.

    Each source contributes a reciprocal-conjugate root pair ``(z, 1/z*)``
    of the noise-subspace polynomial.  The pair's angle is taken as
    ``arg(z1*z2)/2``, which equals ``arg(z)`` for an exact pair and cancels
    the first-order split of the double root noiseless data produces.
    """
    x = np.asarray(snapshots)
    m, n = x.shape
    if not 0 < num_sources < m:
        raise DomainError("need 0 < num_sources < num_elements")
    spacing = 0.5 if config is None else config.spacing_wavelengths
    if config is not None and config.num_elements != m:
        raise DomainError("snapshot rows do not match the array size")
    if not np.all(np.isfinite(x)):
        raise EstimationFailed("non-finite snapshots")

    cov = x @ x.conj().T / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    if not eigvals[-1] > 0 or eigvals[m - num_sources] <= eigvals[m - num_sources - 1] * (1 + 1e-12):
        raise EstimationFailed("covariance does not separate signal and noise subspaces")
    noise = eigvecs[:, : m - num_sources]
    proj = noise @ noise.conj().T
    coeffs = np.array([np.trace(proj, offset=k) for k in range(m - 1, -m, -1)])
    roots = np.roots(coeffs)
    if len(roots) < 2 * num_sources:
        raise EstimationFailed("noise-subspace polynomial is degenerate")

    nearest = roots[np.argsort(np.abs(np.abs(roots) - 1))][: 2 * num_sources]
    nearest = nearest[np.argsort(np.angle(nearest))]
    bearings = []
    for z1, z2 in zip(nearest[0::2], nearest[1::2]):
        w0 = np.angle(z1)
        w = w0 + np.angle(z1 * z2 * np.exp(-2j * w0)) / 2
        s = w / (2 * np.pi * spacing)
        if abs(s) > 1:
            raise EstimationFailed("root phase maps outside the visible region")
        bearings.append(math.degrees(math.asin(s)))
    bearings.sort()
    return bearings[0] if num_sources == 1 else np.array(bearings)


def array_frame(position) -> tuple[np.ndarray, np.ndarray]:
    """Boresight (pointing at Alice) and array axis unit vectors at ``position``."""
    p = np.asarray(position, dtype=float)
    r = float(np.hypot(*p))
    boresight = -p / r if r > 0 else np.array([1.0, 0.0])
    return boresight, np.array([-boresight[1], boresight[0]])


def localize_with_ula(initial_estimate, link: UplinkChannel, scenario: Scenario,
                      sweep_params: SweepParams, ula: UlaConfig,
                      trace: LocalizationTrace | None = None) -> LocalizationTrace:
    """From the sweep estimate, measure bearing and range once and jump to Bob.

    A ULA cannot tell a source in front of the array from its mirror behind
    it, so Eve probes half the range along both candidate directions and
    keeps the louder one.  Falls back to single-antenna refinement when
    root-MUSIC or the range estimate fails.
    """
    center = Position2D(*initial_estimate)
    if trace is None:
        trace = LocalizationTrace(initial_estimate=center)
    boresight, axis = array_frame(center)
    snapshots = link.snapshots(center, boresight, ula)
    snr = link.snr(center)
    trace.record(center, snr)
    try:
        if snr == -math.inf:
            raise EstimationFailed("uplink undetectable at the sweep estimate")
        theta = root_music(snapshots, 1, ula)
    except EstimationFailed as exc:
        trace.doa = {"fallback": f"{type(exc).__name__}: {exc}"}
        return refine(center, link, scenario, sweep_params, trace)

    rng_est = snr_to_distance(snr, scenario.bob_tx_power, scenario).distance
    trace.coarse_ranges.append(rng_est)
    t = math.radians(theta)
    c = center.as_array()
    candidates = {
        "front": math.cos(t) * boresight + math.sin(t) * axis,
        "back": -math.cos(t) * boresight + math.sin(t) * axis,
    }
    probes = np.array([c + 0.5 * rng_est * u for u in candidates.values()])
    probe_snrs = np.atleast_1d(link.snr(probes))
    trace.record(probes, probe_snrs)
    hypothesis = "front" if probe_snrs[0] >= probe_snrs[1] else "back"
    target = c + rng_est * candidates[hypothesis]
    final = Position2D(float(target[0]), float(target[1]))
    trace.doa = DoaEstimate(theta, rng_est, final, hypothesis).to_dict()
    trace.final_estimate = final
    return trace


def localize_ula(ring, link: UplinkChannel, scenario: Scenario, sweep_params: SweepParams,
                 ula: UlaConfig) -> LocalizationTrace:
    """Initial sweep inside the ring, then the ULA single-shot jump."""
    sweep = initial_sweep(ring, link, sweep_params)
    trace = trace_from_sweep(sweep)
    return localize_with_ula(sweep.position, link, scenario, sweep_params, ula, trace)
