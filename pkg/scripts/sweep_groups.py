"""Run the reference comparison: three parameter groups and FCP, 48..72 users.

Writes a compare directory (see docs/formats.md) and prints the joined table.

    python scripts/sweep_groups.py --days 1 -j 8
"""

import argparse
import sys
from pathlib import Path

from jcpd import cli

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--days", type=float, default=1.0, help="horizon in days (default 1, the full scenario is 7)")
    ap.add_argument("--users", default="48,56,64,72")
    ap.add_argument("--configs", default="jcpd-group1,jcpd-group2,jcpd-group3,fcp")
    ap.add_argument("-j", "--jobs", type=int, default=0)
    ap.add_argument("-o", "--output")
    args = ap.parse_args()
    argv = ["compare", str(ROOT / "configs" / "default.json"),
            "--sweep", f"configs={args.configs};users={args.users}",
            "--set", f"clock.horizon_s={args.days * 86400:g}", "-j", str(args.jobs)]
    if args.output:
        argv += ["-o", args.output]
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
