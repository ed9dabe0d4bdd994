"""Passive localization of a wireless user from its MCS and uplink SNR.

Phase one reads Alice's modulation off the air and maps it, through the
public MCS table and the Friis equation, to a ring around Alice.  Phase two
sweeps the ring on Bob's uplink SNR and refines the estimate.
"""

from .channel import (Position2D, RangeEstimate, Scenario, apply_awgn, free_space_path_loss,
                      load_scenario, snr_at, snr_to_distance)
from .classifier import ClassifierConfig, classify, estimate_c42, estimate_snr
from .doa import DoaEstimate, UlaConfig, localize_ula, localize_with_ula, root_music, ula_snapshots
from .errors import (AttackSimError, ConfigError, DomainError, EmptyRegion, EstimationFailed,
                     OutOfCoverage, SignalBelowNoise, SweepFailed)
from .harness import ExperimentConfig, compare_variants, place_bob, run_experiment
from .localize import (LocalizationTrace, SweepParams, UplinkChannel, initial_sweep, localize_multi,
                       localize_single, measure_uplink_snr, refine)
from .mcs import DEFAULT_TABLE, McsEntry, McsTable, Modulation, select_mcs, snr_interval_for_modulation
from .pseudorange import DownlinkObservation, Ring, downlink_phase, ring_for_modulation
from .waveform import Constellation, IqFrame, modulate, theoretical_c42

__version__ = "0.1.0"
