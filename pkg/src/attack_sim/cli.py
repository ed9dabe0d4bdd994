"""``attack-sim`` command line.

Exit codes: 0 success, 2 configuration error, 3 partial results.
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
from pathlib import Path

from .classifier import ClassifierConfig, classify_files
from .errors import ConfigError, DomainError, EmptyRegion
from .harness import ExperimentConfig, PartialResults, compare_variants, run_experiment, scenario
from .mcs import Modulation
from .pseudorange import ring_for_modulation

EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _experiment(args, variant: str) -> ExperimentConfig:
    return ExperimentConfig(
        scenario(args.scenario),
        scenario_id=args.scenario,
        num_trials=args.trials,
        master_seed=args.seed,
        eve_downlink_preset=getattr(args, "eve", "near"),
        mode=getattr(args, "mode", "estimated"),
        attack_variant=variant,
        output_dir=Path(args.out_dir),
        workers=args.workers,
    )


def cmd_run(args) -> int:
    report = run_experiment(_experiment(args, args.variant.replace("-", "_")))
    for ue in report.summary["ues"]:
        err = ue["distance_error"]
        mean = "n/a" if err["mean"] is None else f"{err['mean']:.4f} m"
        print(f"UE{ue['ue']}: accuracy {ue['classification_accuracy']:.4f}, "
              f"localized {err['count']}/{ue['trials']}, mean error {mean}")
    return 0


def cmd_compare(args) -> int:
    result = compare_variants(_experiment(args, "single"))
    result.pop("reports")
    print(json.dumps(result, indent=2))
    return 0


def cmd_classify(args) -> int:
    paths = sorted(glob.glob(args.frames))
    if not paths:
        raise ConfigError(f"no frames match {args.frames!r}")
    noise = args.noise_power if args.noise_power is not None else scenario(args.scenario).noise_power
    text = classify_files(paths, ClassifierConfig(noise))
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    return 0


def cmd_ring(args) -> int:
    ring = ring_for_modulation(Modulation.parse(args.modulation), scenario(args.scenario))
    print(f"inner_m {ring.inner_radius:.6f}")
    print(f"outer_m {ring.outer_radius:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attack-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_args(p):
        p.add_argument("--scenario", required=True, help="preset a..k or path to a scenario file")
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", required=True)
        p.add_argument("--workers", type=int, default=1)

    run = sub.add_parser("run", help="Monte-Carlo localization experiment")
    experiment_args(run)
    run.add_argument("--variant", choices=("single", "multi-ue", "ula"), default="single")
    run.add_argument("--mode", choices=("oracle", "estimated"), default="estimated")
    run.add_argument("--eve", choices=("near", "mid", "far"), default="near")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="single vs multi-UE vs ULA on matched seeds")
    experiment_args(compare)
    compare.set_defaults(func=cmd_compare)

    classify = sub.add_parser("classify", help="batch-classify IQF1 frame files")
    classify.add_argument("--frames", required=True, help="glob of IQF1 files")
    classify.add_argument("--out", required=True)
    classify.add_argument("--noise-power", type=float, default=None,
                          help="Eve's noise power in W (default: from --scenario)")
    classify.add_argument("--scenario", default="a")
    classify.set_defaults(func=cmd_classify)

    ring = sub.add_parser("ring", help="print the ring for a detected modulation")
    ring.add_argument("--modulation", required=True, choices=("bpsk", "qpsk", "qam16", "qam64"))
    ring.add_argument("--scenario", required=True)
    ring.set_defaults(func=cmd_ring)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, EmptyRegion) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PartialResults as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
