"""Monte-Carlo experiment driver, statistics and result files.

Per-trial randomness is derived from ``(master_seed, trial_id)`` only:

    trial_seed = first 8 bytes (little endian) of
                 blake2b(pack('<QQ', master_seed, trial_id))

and each trial splits ``trial_seed`` into independent numpy streams
(``SeedSequence(trial_seed, spawn_key=(k,))``), three per Bob: placement,
downlink frame, uplink measurements.  Reports therefore do not depend on
trial order or on the number of worker threads.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import Position2D, Scenario, load_scenario
from .classifier import ClassifierConfig
from .doa import UlaConfig, localize_ula
from .errors import AttackSimError, ConfigError, DomainError, EmptyRegion, SignalBelowNoise
from .localize import LocalizationTrace, SweepParams, UplinkChannel, localize_multi, localize_single
from .mcs import DEFAULT_TABLE, McsTable, Modulation
from .pseudorange import (DownlinkObservation, Ring, coverage_ring, downlink_phase,
                          eve_preset_position, ring_for_modulation)

# id -> (carrier frequency in Hz, Alice transmit power in W)
SCENARIOS = {
    "a": (5e9, 0.2), "b": (5e9, 0.3), "c": (5e9, 0.4),
    "d": (28e9, 0.2), "e": (28e9, 0.3), "f": (28e9, 0.4),
    "g": (100e9, 0.2), "h": (100e9, 0.3), "k": (100e9, 0.4),
}
VARIANTS = ("single", "multi_ue", "ula")
MODES = ("oracle", "estimated")
HISTOGRAM_BIN = 0.1  # metres
_STREAMS_PER_UE = 3


class PartialResults(AttackSimError):
    """Writing experiment outputs failed part-way."""


def scenario(scenario_id: str) -> Scenario:
    """Preset scenario ``a``..``k`` or a path to a key-value config file."""
    if scenario_id in SCENARIOS:
        freq, power = SCENARIOS[scenario_id]
        return Scenario(freq, alice_tx_power=power)
    path = Path(scenario_id)
    if not path.is_file():
        raise ConfigError(f"unknown scenario {scenario_id!r}: not a preset id nor a file")
    return load_scenario(path)


def trial_seed(master_seed: int, trial_id: int) -> int:
    digest = hashlib.blake2b(struct.pack("<QQ", master_seed % 2 ** 64, trial_id), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def trial_stream(seed: int, k: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(k,))))


def place_bob(ring: Ring, rng: np.random.Generator) -> Position2D:
    """Area-uniform point in the annulus."""
    ra, rb = ring.inner_radius, ring.outer_radius
    if not rb > ra:
        raise DomainError("cannot place Bob in an empty ring")
    theta = rng.uniform(0.0, 2 * math.pi)
    r = math.sqrt(rng.uniform() * (rb * rb - ra * ra) + ra * ra)
    return Position2D.polar(min(max(r, ra), rb), theta)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte-Carlo experiment.

    ``bob_region`` is ``"coverage"`` (area-uniform over the whole served
    disk), ``"balanced"`` (modulation drawn uniformly, then area-uniform in
    its ring) or a modulation name (always that ring).
    """

    scenario: Scenario
    scenario_id: str = "custom"
    num_trials: int = 1000
    master_seed: int = 0
    eve_downlink_preset: str = "near"
    mode: str = "estimated"
    attack_variant: str = "single"
    bob_region: str = "coverage"
    sweep: SweepParams = SweepParams()
    classifier_frame_length: int = 4096
    ula_elements: int = 10
    ula_snapshots: int = 128
    table: McsTable = DEFAULT_TABLE
    output_dir: Path | None = None
    workers: int = 1

    def __post_init__(self):
        if self.attack_variant not in VARIANTS:
            raise ConfigError(f"attack_variant must be one of {VARIANTS}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.num_trials < 1:
            raise ConfigError("num_trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        eve_preset_position(self.eve_downlink_preset, self.scenario)
        if self.bob_region not in ("coverage", "balanced"):
            try:
                Modulation.parse(self.bob_region)
            except DomainError:
                raise ConfigError(f"bad bob_region {self.bob_region!r}") from None

    @classmethod
    def preset(cls, scenario_id: str, **kwargs) -> ExperimentConfig:
        return cls(scenario(scenario_id), scenario_id=scenario_id, **kwargs)

    @property
    def num_ues(self) -> int:
        return 2 if self.attack_variant == "multi_ue" else 1

    @property
    def classifier(self) -> ClassifierConfig:
        return ClassifierConfig(self.scenario.noise_power, self.classifier_frame_length)

    @property
    def ula(self) -> UlaConfig:
        return UlaConfig.for_scenario(self.scenario, num_elements=self.ula_elements,
                                      num_snapshots=self.ula_snapshots)


@dataclass
class UeOutcome:
    bob: Position2D
    status: str = "ok"  # ok | no-ring | failed
    observation: DownlinkObservation | None = None
    ring: Ring | None = None
    trace: LocalizationTrace | None = None
    distance_error: float | None = None
    detail: str = ""


@dataclass
class TrialRecord:
    trial_id: int
    ues: list[UeOutcome]
    wall_time: float = 0.0


def _bob_ring(config: ExperimentConfig, rng: np.random.Generator) -> Ring:
    if config.bob_region == "coverage":
        return coverage_ring(config.scenario)
    if config.bob_region == "balanced":
        mods = config.table.modulations
        return ring_for_modulation(mods[int(rng.integers(len(mods)))], config.scenario, config.table)
    return ring_for_modulation(Modulation.parse(config.bob_region), config.scenario, config.table)


def run_trial(config: ExperimentConfig, trial_id: int) -> TrialRecord:
    start = time.perf_counter()
    seed = trial_seed(config.master_seed, trial_id)
    sc = config.scenario
    eve = eve_preset_position(config.eve_downlink_preset, sc)
    oracle = config.mode == "oracle"

    ues, links = [], []
    for u in range(config.num_ues):
        place_rng, down_rng, up_rng = (trial_stream(seed, _STREAMS_PER_UE * u + k) for k in range(3))
        outcome = UeOutcome(place_bob(_bob_ring(config, place_rng), place_rng))
        try:
            outcome.observation, outcome.ring = downlink_phase(
                outcome.bob, eve, sc, config.table, config.classifier, down_rng)
        except (SignalBelowNoise, EmptyRegion) as exc:
            outcome.status, outcome.detail = "no-ring", f"{type(exc).__name__}: {exc}"
        ues.append(outcome)
        links.append(UplinkChannel(outcome.bob, sc, config.sweep, up_rng, oracle=oracle))

    active = [k for k, ue in enumerate(ues) if ue.status == "ok"]
    if config.attack_variant == "multi_ue":
        traces = localize_multi([ues[k].ring for k in active], [links[k] for k in active], sc, config.sweep)
        for k, trace in zip(active, traces):
            ues[k].trace = trace
    else:
        for k in active:
            try:
                if config.attack_variant == "ula":
                    ues[k].trace = localize_ula(ues[k].ring, links[k], sc, config.sweep, config.ula)
                else:
                    ues[k].trace = localize_single(ues[k].ring, links[k], sc, config.sweep)
            except AttackSimError as exc:
                ues[k].status, ues[k].detail = "failed", f"{type(exc).__name__}: {exc}"

    for k in active:
        trace = ues[k].trace
        if trace is None or trace.final_estimate is None:
            ues[k].status = "failed"
            if trace is not None and trace.failure:
                ues[k].detail = trace.failure
            continue
        ues[k].distance_error = trace.final_estimate.distance_to(ues[k].bob)
        trace.distance_error = ues[k].distance_error
    return TrialRecord(trial_id, ues, time.perf_counter() - start)


def error_statistics(errors) -> dict:
    e = np.asarray([x for x in errors if x is not None], dtype=float)
    if e.size == 0:
        return {"count": 0, "mean": None, "median": None, "p90": None, "histogram": None}
    # sort first so the float sums do not depend on trial order
    e = np.sort(e)
    nbins = max(1, math.ceil(e[-1] / HISTOGRAM_BIN + 1e-12))
    counts, _ = np.histogram(e, bins=nbins, range=(0.0, nbins * HISTOGRAM_BIN))
    return {
        "count": int(e.size),
        "mean": float(math.fsum(e) / e.size),
        "median": float(np.median(e)),
        "p90": float(np.percentile(e, 90)),
        "histogram": {"bin_width_m": HISTOGRAM_BIN, "counts": counts.tolist()},
    }


def summarize(config: ExperimentConfig, records: list[TrialRecord]) -> dict:
    per_ue = []
    for u in range(config.num_ues):
        outcomes = [r.ues[u] for r in records]
        observed = [o.observation for o in outcomes if o.observation is not None]
        per_ue.append({
            "ue": u + 1,
            "trials": len(outcomes),
            "failed_interceptions": sum(o.status == "no-ring" for o in outcomes),
            # failed interceptions count as misclassifications
            "classification_accuracy": sum(o.correct for o in observed) / len(outcomes),
            "localization_failures": sum(o.status == "failed" for o in outcomes),
            "distance_error": error_statistics(o.distance_error for o in outcomes),
        })
    return {
        "scenario_id": config.scenario_id,
        "scenario": dataclasses.asdict(config.scenario),
        "variant": config.attack_variant,
        "mode": config.mode,
        "eve_downlink_preset": config.eve_downlink_preset,
        "bob_region": config.bob_region,
        "num_trials": config.num_trials,
        "master_seed": config.master_seed,
        "sweep": dataclasses.asdict(config.sweep),
        "ues": per_ue,
    }


_UE_COLUMNS = ("status", "bob_x", "bob_y", "bob_distance", "true_mod", "pred_mod", "eve_snr_db",
               "c42", "correct", "ring_inner", "ring_outer", "init_x", "init_y",
               "final_x", "final_y", "error_m", "steps", "detail")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _ue_row(ue: UeOutcome) -> list[str]:
    obs, ring, trace = ue.observation, ue.ring, ue.trace
    init = trace.initial_estimate if trace is not None else None
    final = trace.final_estimate if trace is not None else None
    values = [
        ue.status, ue.bob.x, ue.bob.y, ue.bob.norm(),
        obs.true_modulation.label if obs else None,
        obs.predicted_modulation.label if obs else None,
        obs.eve_snr if obs else None,
        obs.c42_estimate if obs else None,
        int(obs.correct) if obs else None,
        ring.inner_radius if ring else None,
        ring.outer_radius if ring else None,
        init.x if init else None, init.y if init else None,
        final.x if final else None, final.y if final else None,
        ue.distance_error,
        trace.steps_taken if trace is not None else None,
        ue.detail,
    ]
    return [_cell(v) for v in values]


def trials_csv(config: ExperimentConfig, records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["trial_id"]
    for u in range(config.num_ues):
        header += [f"ue{u + 1}_{c}" for c in _UE_COLUMNS]
    writer.writerow(header)
    for rec in records:
        row = [str(rec.trial_id)]
        for ue in rec.ues:
            row += _ue_row(ue)
        writer.writerow(row)
    return buf.getvalue()


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[TrialRecord]
    summary: dict = field(default_factory=dict)

    def errors(self, ue: int = 0) -> np.ndarray:
        return np.array([r.ues[ue].distance_error for r in self.records
                         if r.ues[ue].distance_error is not None])

    def mean_error(self, ue: int = 0) -> float:
        return self.summary["ues"][ue]["distance_error"]["mean"]

    def accuracy(self, ue: int = 0) -> float:
        return self.summary["ues"][ue]["classification_accuracy"]


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    ids = range(config.num_trials)
    start = time.perf_counter()
    if config.workers == 1:
        records = [run_trial(config, k) for k in ids]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(lambda k: run_trial(config, k), ids))
    report = ExperimentReport(config, records, summarize(config, records))
    report.summary["timing"] = {"wall_time_s": time.perf_counter() - start,
                                "trial_time_s": math.fsum(r.wall_time for r in records)}
    if config.output_dir is not None:
        write_outputs(report, Path(config.output_dir))
    return report


def write_outputs(report: ExperimentReport, out_dir: Path) -> None:
    """Write trials.csv, summary.json and traces/trial_<k>.json.

    On an I/O failure a ``PARTIAL`` marker is left behind (when possible)
    and :class:`PartialResults` is raised.
    """
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "trials.csv").write_text(trials_csv(report.config, report.records))
        (out_dir / "summary.json").write_text(json.dumps(report.summary, indent=2) + "\n")
        traces = out_dir / "traces"
        traces.mkdir(exist_ok=True)
        for rec in report.records:
            payload = {"trial_id": rec.trial_id,
                       "ues": [None if ue.trace is None else ue.trace.to_dict() for ue in rec.ues]}
            (traces / f"trial_{rec.trial_id}.json").write_text(json.dumps(payload, allow_nan=False))
    except OSError as exc:
        try:
            (out_dir / "PARTIAL").write_text(f"{exc}\n")
        except OSError:
            pass
        raise PartialResults(f"could not write all outputs to {out_dir}: {exc}") from exc


def compare_variants(config: ExperimentConfig) -> dict:
    """Run single, multi-UE and ULA attacks on matched seeds and compare errors."""
    reports = {}
    for variant in VARIANTS:
        out = None if config.output_dir is None else Path(config.output_dir) / variant
        reports[variant] = run_experiment(dataclasses.replace(config, attack_variant=variant, output_dir=out))
    single = reports["single"].mean_error()
    multi = [reports["multi_ue"].mean_error(u) for u in range(2)]
    ula = reports["ula"].mean_error()

    def ratio(a, b):
        return None if a is None or not b else a / b

    result = {
        "scenario_id": config.scenario_id,
        "num_trials": config.num_trials,
        "master_seed": config.master_seed,
        "single_mean_error": single,
        "ula_mean_error": ula,
        "multi_ue_mean_errors": multi,
        "ula_over_single": ratio(ula, single),
        "multi_ue_over_single": [ratio(m, single) for m in multi],
        "multi_ue_bob2_over_bob1": ratio(multi[1], multi[0]),
    }
    if config.output_dir is not None:
        try:
            Path(config.output_dir).mkdir(parents=True, exist_ok=True)
            (Path(config.output_dir) / "comparison.json").write_text(json.dumps(result, indent=2) + "\n")
        except OSError as exc:
            raise PartialResults(str(exc)) from exc
    result["reports"] = reports
    return result
