#!/usr/bin/env python3
"""
Run the E1/E2/E3 feature-replacement evasion experiments against trained models.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from lib.dataset.io import load_csv
from lib.evasion.report import EXPERIMENTS, robustness_delta, run_experiments, write_report
from lib.models.io import load_model_directory
from lib.utils.config import PipelineConfig

from cli.common import add_common_arguments, resolve_config, run_tool, write_resolved_config


def main(argv: Optional[List[str]] = None) -> int:
    defaults = PipelineConfig.from_env()
    evasion = defaults.evasion
    parser = argparse.ArgumentParser(
        description="Perturb Ransomware-only test samples and count each model's predictions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Experiments:
  E1  unmodified cohort
  E2  features 183 and 185 set to a low percentile of the Downloader-only samples
  E3  features 183, 185, 199, 17 and 16 set to a low percentile of the cohort itself

Examples:
  %(prog)s --models runs/models --test test.csv --out runs/attack
  %(prog)s --models runs/models --test test.csv --inclusive --out runs/attack-inclusive
    """,
    )
    parser.add_argument("--models", required=True, help="Directory of *.model files")
    parser.add_argument("--test", required=True, help="Test feature CSV")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument(
        "--inclusive",
        action="store_true",
        help="Cohorts contain every sample carrying the label (default: exact single-label sets)",
    )
    parser.add_argument("--main-labels-only", action="store_true", help="Restrict test labels to the four main classes first")
    parser.add_argument("--e2-percentile", type=float, help=f"E2 percentile (default: {evasion.e2_percentile:g})")
    parser.add_argument("--e3-percentile", type=float, help=f"E3 percentile (default: {evasion.e3_percentile:g})")
    add_common_arguments(parser, defaults)
    args = parser.parse_args(argv)

    def body() -> int:
        config = resolve_config(
            args,
            {
                "evasion.exclusive": False if args.inclusive else None,
                "evasion.main_labels_only": True if args.main_labels_only else None,
                "evasion.e2_percentile": args.e2_percentile,
                "evasion.e3_percentile": args.e3_percentile,
            },
            config_file=args.config,
        )
        models = load_model_directory(args.models)
        print(f"🤖 Loaded models: {', '.join(model.display_name for model in models.values())}")
        test = load_csv(args.test)

        report = run_experiments(models, test, config.evasion)
        print(f"🎯 {report.target_label} cohort: {report.cohort_size} samples")
        for name, spec in report.specs.items():
            if spec.edits:
                edits = ", ".join(f"{index}={value:g}" for index, value in spec.edits)
                print(f"   {name}: {edits}")

        for model, delta in robustness_delta(report).items():
            counts = " ".join(f"{e}={report.count(model, e, report.target_label)}" for e in EXPERIMENTS)
            print(f"   {model}: {counts} (E3 drop {delta.target_drop_e3:.1%})")

        out = Path(args.out)
        write_report(report, out)
        write_resolved_config(
            config,
            out,
            {"tool": "attack", "models": args.models, "test": args.test, "out": str(out)},
        )
        print(f"💾 Report written to: {out}")
        return 0

    return run_tool(body)


if __name__ == "__main__":
    sys.exit(main())
