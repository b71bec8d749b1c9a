#!/usr/bin/env python3
"""
Collate the tables of many runs into combined tables with a ``run`` column.
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from lib.utils.config import PipelineConfig
from lib.utils.errors import DataError

from cli.common import add_common_arguments, resolve_config, run_tool, write_resolved_config

TABLES = ("table4.csv", "table6.csv", "table8.csv")


def collate(runs: Path, out: Path) -> Dict[str, pd.DataFrame]:
    """One frame per table name, rows tagged with the run directory (relative to ``runs``)."""
    if not runs.is_dir():
        raise FileNotFoundError(f"Runs directory not found: {runs}")
    combined: Dict[str, pd.DataFrame] = {}
    for table in TABLES:
        frames = []
        for path in sorted(runs.rglob(table)):
            if out.resolve() in path.resolve().parents:
                continue
            frame = pd.read_csv(path)
            frame.insert(0, "run", path.parent.relative_to(runs).as_posix() or ".")
            frames.append(frame)
        if frames:
            combined[table] = pd.concat(frames, ignore_index=True)
    if not combined:
        raise DataError(f"no {', '.join(TABLES)} files under {runs}")
    return combined


def main(argv: Optional[List[str]] = None) -> int:
    defaults = PipelineConfig.from_env()
    parser = argparse.ArgumentParser(
        description="Combine evaluation and attack tables from several runs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --runs runs --out runs/summary
    """,
    )
    parser.add_argument("--runs", default=defaults.output_directory, help=f"Runs directory (default: {defaults.output_directory})")
    parser.add_argument("--out", required=True, help="Output directory")
    add_common_arguments(parser, defaults)
    args = parser.parse_args(argv)

    def body() -> int:
        config = resolve_config(args, config_file=args.config)
        runs, out = Path(args.runs), Path(args.out)
        combined = collate(runs, out)
        out.mkdir(parents=True, exist_ok=True)
        for table, frame in combined.items():
            frame.to_csv(out / table, index=False, lineterminator="\n")
            print(f"📋 {table}: {frame['run'].nunique()} run(s), {len(frame)} rows")
        write_resolved_config(config, out, {"tool": "report", "runs": str(runs), "out": str(out)})
        print(f"💾 Combined tables written to: {out}")
        return 0

    return run_tool(body)


if __name__ == "__main__":
    sys.exit(main())
