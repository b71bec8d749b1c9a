#!/usr/bin/env python3
"""
Featurize captured Tor host sessions (JSON lines) into a feature CSV.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from lib.dataset.io import write_csv
from lib.featurizer.pipeline import featurize_file
from lib.utils.config import PipelineConfig

from cli.common import add_common_arguments, resolve_config, run_tool, write_resolved_config


def main(argv: Optional[List[str]] = None) -> int:
    defaults = PipelineConfig.from_env()
    parser = argparse.ArgumentParser(
        description="Turn per-host Tor session logs into 215-feature classifier instances",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --sessions captures.jsonl --out features.csv
  %(prog)s --sessions captures.jsonl --out features.csv --threads 4
    """,
    )
    parser.add_argument("--sessions", required=True, help="JSON-lines session file")
    parser.add_argument("--out", required=True, help="Output feature CSV")
    parser.add_argument("--no-source-ids", action="store_true", help="Omit the leading source_id column")
    add_common_arguments(parser, defaults)
    args = parser.parse_args(argv)

    def body() -> int:
        config = resolve_config(args, config_file=args.config)
        print(f"🧮 Featurizing sessions from {args.sessions}...")
        data = featurize_file(args.sessions, n_jobs=config.threads)
        out = Path(args.out)
        write_csv(data, out, include_source_ids=not args.no_source_ids)
        print(f"✅ {len(data)} instances x {data.n_features} features written to: {out}")
        write_resolved_config(config, out, {"tool": "featurize", "sessions": args.sessions, "out": str(out)})
        return 0

    return run_tool(body)


if __name__ == "__main__":
    sys.exit(main())
