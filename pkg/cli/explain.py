#!/usr/bin/env python3
"""
Shapley attributions for a trained model, exported as plot-ready CSVs.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from lib.dataset.io import load_csv
from lib.dataset.schema import LABEL_INDEX, LABELS
from lib.explain.aggregate import global_importance
from lib.explain.exports import write_exports
from lib.explain.shapley import draw_background, explain_dataset
from lib.models.base import align_dataset
from lib.models.io import load_model
from lib.utils.config import PipelineConfig
from lib.utils.errors import DataError

from cli.common import add_common_arguments, parse_label_list, resolve_config, run_tool, write_resolved_config


def main(argv: Optional[List[str]] = None) -> int:
    defaults = PipelineConfig.from_env()
    explain = defaults.explain
    parser = argparse.ArgumentParser(
        description="Explain a trained model's per-label outputs with Shapley values",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --model runs/br.model --data test.csv --background-data train.csv --out runs/shap
  %(prog)s --model runs/lamp.model --data test.csv --labels Downloader,Ransomware --perms 200 --out runs/shap

Exports per label: importance, summary, force, decision and dependence CSVs plus manifest.json
    """,
    )
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument(
        "--data", required=True, help="Feature CSV with the samples to explain (empty label cells allowed)"
    )
    parser.add_argument(
        "--background-data",
        help="Training feature CSV to draw the background set from. Without it the background "
        "is drawn from --data itself, i.e. from the samples being explained",
    )
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--estimator", choices=["exact", "sampled"], help=f"Estimator (default: {explain.estimator})")
    parser.add_argument("--perms", type=int, help=f"Permutations per sample and label (default: {explain.n_perms})")
    parser.add_argument("--background", type=int, help=f"Background rows (default: {explain.background})")
    parser.add_argument("--max-samples", type=int, help="Explain at most this many samples")
    parser.add_argument("--top-k", type=int, help=f"Features kept in summary exports (default: {explain.top_k})")
    parser.add_argument("--labels", help="Comma-separated labels to explain (default: all)")
    parser.add_argument("--seed", type=int, help=f"Seed for background and permutations (default: {explain.seed})")
    add_common_arguments(parser, defaults)
    args = parser.parse_args(argv)

    def body() -> int:
        config = resolve_config(
            args,
            {
                "explain.estimator": args.estimator,
                "explain.n_perms": args.perms,
                "explain.background": args.background,
                "explain.max_samples": args.max_samples,
                "explain.top_k": args.top_k,
                "explain.seed": args.seed,
            },
            config_file=args.config,
        )
        settings = config.explain
        names = parse_label_list(args.labels) or list(LABELS)
        unknown = [name for name in names if name not in LABEL_INDEX]
        if unknown:
            raise DataError(f"unknown label(s): {', '.join(unknown)}")

        model = load_model(args.model)
        data = align_dataset(load_csv(args.data, allow_unlabeled=True), model)
        if args.background_data:
            background_source = align_dataset(load_csv(args.background_data), model)
        else:
            print("⚠️  No --background-data given: drawing the background from the explained samples")
            background_source = data
        background = draw_background(background_source, settings.background, settings.seed)

        print(
            f"🔍 Explaining {model.display_name} ({settings.estimator}, {len(background)} background rows, "
            f"{len(names)} labels)..."
        )
        explanations = explain_dataset(
            model,
            data,
            background,
            [LABEL_INDEX[name] for name in names],
            estimator=settings.estimator,
            n_perms=settings.n_perms,
            seed=settings.seed,
            max_samples=settings.max_samples,
            n_jobs=config.threads,
        )

        importance = global_importance(explanations)
        for name in names:
            top = ", ".join(feature for feature, _ in importance.top_k(LABEL_INDEX[name], 3))
            print(f"   {name}: {top}")

        out = Path(args.out)
        manifest = write_exports(
            explanations,
            out,
            {
                "model": model.display_name,
                "dataset": data.name,
                "n_perms": settings.n_perms if settings.estimator == "sampled" else None,
                "seed": settings.seed,
                "background": len(background),
                "background_source": args.background_data or args.data,
            },
            top_k=settings.top_k,
        )
        write_resolved_config(
            config,
            out,
            {"tool": "explain", "model": args.model, "data": args.data, "labels": ",".join(names), "out": str(out)},
        )
        print(f"💾 Exports written to: {out} (manifest: {manifest.name})")
        return 0

    return run_tool(body)


if __name__ == "__main__":
    sys.exit(main())
