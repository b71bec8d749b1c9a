#!/usr/bin/env python3
"""
Synthetic dataset generator CLI.

Writes a feature CSV drawn from one of the built-in corpus profiles (d5, d10,
d20, d30, d40) or from a custom generator config file.
"""

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import List, Optional

from lib.dataset.io import write_csv
from lib.synthgen.generator import generate
from lib.synthgen.profiles import DATASET_PROFILES, dataset_profile, dump_config, load_config
from lib.utils.config import PipelineConfig

from cli.common import add_common_arguments, resolve_config, run_tool, write_resolved_config


def build_parser(config: PipelineConfig) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Generate a synthetic multi-label Tor malware feature dataset",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --profile d5 --seed 1 --out d5.csv
  %(prog)s --profile d5 --dump-config d5.conf --out d5.csv
  %(prog)s --profile d20 --seed 3 --out d20.csv
  %(prog)s --profile custom --config my_profile.conf --out custom.csv
    """,
    )
    parser.add_argument(
        "--profile",
        choices=[*DATASET_PROFILES, "custom"],
        default="d5",
        help="Corpus profile or custom config (default: d5)",
    )
    parser.add_argument("--seed", type=int, help="Random seed (default: 0, or the seed in a custom config)")
    parser.add_argument("--out", required=True, help="Output feature CSV")
    parser.add_argument("--dump-config", help="Also write the resolved generator config to this file")
    parser.add_argument("--with-source-ids", action="store_true", help="Write a leading source_id column")
    add_common_arguments(parser, config, config_help="Generator config file (required with --profile custom)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser(PipelineConfig.from_env())
    args = parser.parse_args(argv)

    if args.profile == "custom" and not args.config:
        parser.error("--profile custom requires --config FILE")
    if args.profile != "custom" and args.config:
        parser.error("--config is only used with --profile custom")

    def body() -> int:
        config = resolve_config(args)
        if args.profile != "custom":
            generator_config = dataset_profile(args.profile, args.seed if args.seed is not None else 0)
        else:
            generator_config = load_config(args.config)
            if args.seed is not None:
                generator_config = dataclasses.replace(generator_config, seed=args.seed)

        print(f"🎲 Generating {generator_config.total} samples ({args.profile} profile, seed {generator_config.seed})...")
        data = generate(generator_config)
        out = Path(args.out)
        write_csv(data, out, include_source_ids=args.with_source_ids)
        print(f"💾 Dataset written to: {out}")

        if args.dump_config:
            dump_config(generator_config, args.dump_config)
            print(f"📝 Generator config written to: {args.dump_config}")

        write_resolved_config(
            config,
            out,
            {"tool": "gen-data", "profile": args.profile, "seed": generator_config.seed, "out": str(out)},
        )
        return 0

    return run_tool(body)


if __name__ == "__main__":
    sys.exit(main())
