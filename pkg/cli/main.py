#!/usr/bin/env python3
"""
Main CLI entry point for onionlabel.

Dispatches ``onionlabel TOOL ...`` to the tool module's ``main(argv)``.
"""

import argparse
import importlib
import sys
from typing import List, Optional

TOOLS = {
    "gen-data": "Generate a synthetic feature dataset",
    "featurize": "Turn Tor session logs into feature CSVs",
    "train": "Train BR, CC, LP or LaMP",
    "evaluate": "Score models (overall and class-wise tables)",
    "explain": "Shapley attributions and plot-data exports",
    "attack": "E1/E2/E3 evasion experiments",
    "report": "Collate tables from several runs",
}


def build_parser() -> argparse.ArgumentParser:
    listing = "\n".join(f"  {name:<10} - {summary}" for name, summary in TOOLS.items())
    return argparse.ArgumentParser(
        prog="onionlabel",
        description="onionlabel: multi-label Tor malware traffic classification",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Available tools:
{listing}

Exit codes: 0 ok, 1 failure, 2 usage, 3 data, 4 training, 5 schema mismatch

Examples:
  %(prog)s gen-data --profile d5 --seed 1 --out d5.csv
  %(prog)s train --model lamp --train d5.csv --holdout test.csv --out runs/models/lamp.model
  %(prog)s evaluate --model runs/models --test test.csv --out runs/eval

Use '%(prog)s TOOL --help' for tool-specific options.
    """,
    )


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()

    # Only the tool name is parsed here; the tool parses its own flags
    if not argv:
        parser.print_help()
        return 2
    tool_name, tool_args = argv[0], argv[1:]
    if tool_name in ("-h", "--help"):
        parser.print_help()
        return 0
    if tool_name not in TOOLS:
        print(f"❌ Unknown tool: {tool_name}", file=sys.stderr)
        print(f"Available tools: {', '.join(TOOLS)}", file=sys.stderr)
        return 2

    module = importlib.import_module(f"cli.{tool_name.replace('-', '_')}")
    return module.main(tool_args)


if __name__ == "__main__":
    sys.exit(main())
