#!/usr/bin/env python3
"""
Evaluate trained models on a test CSV and write the overall and class-wise tables.
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from lib.dataset.io import load_csv
from lib.metrics.report import evaluate_model, write_predictions, write_table4, write_table6
from lib.models.base import MultiLabelModel, align_dataset
from lib.models.io import load_model, load_model_directory
from lib.utils.config import PipelineConfig

from cli.common import add_common_arguments, resolve_config, run_tool, write_resolved_config


def load_models(paths: List[str]) -> Dict[str, MultiLabelModel]:
    """Models from files and/or directories of ``*.model`` files, keyed by display name."""
    models: Dict[str, MultiLabelModel] = {}
    for path in paths:
        found = load_model_directory(path).values() if Path(path).is_dir() else [load_model(path)]
        for model in found:
            models[model.display_name] = model
    return models


def main(argv: Optional[List[str]] = None) -> int:
    defaults = PipelineConfig.from_env()
    parser = argparse.ArgumentParser(
        description="Score trained models with micro precision/recall, Hamming loss and accuracies",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --model runs/lamp.model --test test.csv --out runs/eval
  %(prog)s --model runs/models --test test.csv --out runs/eval

Outputs: table4.csv, table6.csv, predictions.csv, resolved.conf
    """,
    )
    parser.add_argument("--model", required=True, action="append", help="Model file or directory (repeatable)")
    parser.add_argument("--test", required=True, help="Test feature CSV")
    parser.add_argument("--out", required=True, help="Output directory")
    add_common_arguments(parser, defaults)
    args = parser.parse_args(argv)

    def body() -> int:
        config = resolve_config(args, config_file=args.config)
        models = load_models(args.model)
        print(f"📂 Loading test data from {args.test}...")
        data = load_csv(args.test)

        results = []
        predictions: Dict[str, np.ndarray] = {}
        for name, model in models.items():
            print(f"📊 Evaluating {name}...")
            result = evaluate_model(model, data)
            results.append(result)
            predictions[name] = model.predict(align_dataset(data, model).features)
            print(
                f"   MAP {result.micro_precision:.4f} | MAR {result.micro_recall:.4f} | "
                f"HL {result.hamming_loss:.4f} | AC {result.subset_accuracy:.4f}"
            )

        out = Path(args.out)
        write_table4(results, out / "table4.csv")
        write_table6(results, out / "table6.csv")
        write_predictions(predictions, data, out / "predictions.csv")
        write_resolved_config(
            config,
            out,
            {"tool": "evaluate", "models": ",".join(args.model), "test": args.test, "out": str(out)},
        )
        print(f"💾 Tables written to: {out}")
        return 0

    return run_tool(body)


if __name__ == "__main__":
    sys.exit(main())
