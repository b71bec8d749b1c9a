#!/usr/bin/env python3
"""
Train one multi-label classifier (BR, CC, LP or LaMP) on a feature CSV.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from lib.baselines.multilabel import fit_br, fit_cc, fit_lp
from lib.dataset.core import drop_zero_variance, filter_to_labels, split
from lib.dataset.io import load_csv, write_csv
from lib.dataset.schema import LabelSet
from lib.lamp.training import fit_lamp
from lib.models.base import DISPLAY_NAMES, MODEL_KINDS
from lib.models.io import save_model
from lib.utils.config import PipelineConfig

from cli.common import add_common_arguments, parse_label_list, resolve_config, run_tool, write_resolved_config


def build_parser(config: PipelineConfig) -> argparse.ArgumentParser:
    lamp = config.lamp
    parser = argparse.ArgumentParser(
        description="Train a multi-label Tor malware classifier",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --model lamp --train d5.csv --seed 1 --out lamp.model
  %(prog)s --model br --train d5.csv --holdout test.csv --drop-zero-variance --out br.model
  %(prog)s --model lp --train d5.csv --filter-labels Downloader,Grayware,Miner,Ransomware --out lp.model
    """,
    )
    parser.add_argument("--model", required=True, choices=MODEL_KINDS, help="Model kind")
    parser.add_argument("--train", required=True, help="Training feature CSV")
    parser.add_argument("--out", required=True, help="Output model file")
    parser.add_argument("--seed", type=int, help="Seed for forests / network (default: 0)")
    parser.add_argument(
        "--holdout",
        help=f"Split the input first ({config.split.train_fraction:.0%} train) and write the held-out part here",
    )
    parser.add_argument("--drop-zero-variance", action="store_true", help="Remove all-zero feature columns")
    parser.add_argument("--filter-labels", help="Comma-separated labels to keep (others are projected away)")

    forest = parser.add_argument_group("forest options (br, cc, lp)")
    forest.add_argument("--trees", type=int, help=f"Trees per forest (default: {config.forest.n_trees})")
    forest.add_argument("--max-depth", type=int, help="Maximum tree depth (default: unlimited)")

    network = parser.add_argument_group("LaMP options")
    network.add_argument("--mask", choices=["prior", "full", "none"], help=f"Label mask (default: {lamp.label_mask})")
    network.add_argument("--epochs", type=int, help=f"Training epochs (default: {lamp.epochs})")
    network.add_argument("--lr", type=float, help=f"Adam learning rate (default: {lamp.learning_rate})")
    network.add_argument("--batch-size", type=int, help=f"Mini-batch size (default: {lamp.batch_size})")
    network.add_argument("--d-model", type=int, help=f"Embedding width (default: {lamp.d_model})")
    network.add_argument("--d-hidden", type=int, help=f"Feedforward width (default: {lamp.d_hidden})")
    network.add_argument("--dropout", type=float, help=f"Dropout rate (default: {lamp.dropout})")
    network.add_argument("--rounds", type=int, help=f"Message passing rounds (default: {lamp.message_rounds})")
    network.add_argument("--heads", type=int, help=f"Attention heads (default: {lamp.attention_heads})")

    add_common_arguments(parser, config)
    return parser


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "forest.seed": args.seed,
        "forest.n_trees": args.trees,
        "forest.max_depth": args.max_depth,
        "lamp.seed": args.seed,
        "lamp.label_mask": args.mask,
        "lamp.epochs": args.epochs,
        "lamp.learning_rate": args.lr,
        "lamp.batch_size": args.batch_size,
        "lamp.d_model": args.d_model,
        "lamp.d_hidden": args.d_hidden,
        "lamp.dropout": args.dropout,
        "lamp.message_rounds": args.rounds,
        "lamp.attention_heads": args.heads,
    }


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser(PipelineConfig.from_env())
    args = parser.parse_args(argv)

    def body() -> int:
        config = resolve_config(args, flag_overrides(args), config_file=args.config)
        name = DISPLAY_NAMES[args.model]

        print(f"📂 Loading training data from {args.train}...")
        data = load_csv(args.train)
        if args.holdout:
            data, test = split(data, config.split.train_fraction, config.split.seed)
            write_csv(test, args.holdout, include_source_ids=True)
            print(f"✂️  Split {len(data) + len(test)} samples: {len(data)} train, {len(test)} held out -> {args.holdout}")

        labels = parse_label_list(args.filter_labels)
        if labels:
            data = filter_to_labels(data, LabelSet.from_names(labels))
            print(f"🏷️  Restricted to labels {', '.join(labels)}: {len(data)} samples")
        if args.drop_zero_variance:
            data, removed = drop_zero_variance(data)
            print(f"🧹 Removed {len(removed)} zero-variance features, {data.n_features} remain")

        print(f"🏋️  Training {name} on {len(data)} samples x {data.n_features} features...")
        if args.model == "lamp":

            def report(epoch: int, epochs: int, loss: float) -> None:
                if epoch == epochs or epoch % 10 == 0:
                    print(f"   epoch {epoch}/{epochs}: loss {loss:.4f}")

            model, _ = fit_lamp(data, config.lamp, threads=config.threads, progress_callback=report)
        else:
            fit = {"br": fit_br, "cc": fit_cc, "lp": fit_lp}[args.model]
            model = fit(data, config.forest, n_jobs=config.threads)

        out = save_model(model, args.out)
        print(f"💾 {name} model saved to: {out}")
        write_resolved_config(
            config,
            out,
            {
                "tool": "train",
                "model": args.model,
                "train": args.train,
                "holdout": args.holdout,
                "drop_zero_variance": args.drop_zero_variance,
                "filter_labels": ",".join(labels),
                "schema_hash": model.schema_hash,
                "out": str(out),
            },
        )
        return 0

    return run_tool(body)


if __name__ == "__main__":
    sys.exit(main())
