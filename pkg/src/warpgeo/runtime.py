"""Process-level runtime knobs."""

import os


def worker_count() -> int:
    """Worker parallelism cap, from the WARPGEO_THREADS environment variable.

    Defaults to 1 (fully deterministic serial execution). Values below 1 are
    clamped to 1.
    """
    raw = os.environ.get("WARPGEO_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
