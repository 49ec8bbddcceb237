#!/usr/bin/env python3
"""Run the acceptance suite with per-criterion PASS lines visible.

By default this uses configs/acceptance.toml (96³ lattice, full schedule;
expect on the order of fifteen minutes).  Pass a different config to iterate
faster:

    python scripts/run_acceptance.py [path/to/config.toml]
"""

import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    env = dict(os.environ)
    if len(sys.argv) > 1:
        env["WARPGEO_ACCEPTANCE_CONFIG"] = str(Path(sys.argv[1]).resolve())
    cmd = [
        sys.executable, "-m", "pytest",
        str(ROOT / "tests" / "test_acceptance.py"),
        "-v", "-s",
    ]
    return subprocess.call(cmd, cwd=ROOT, env=env)


if __name__ == "__main__":
    sys.exit(main())
