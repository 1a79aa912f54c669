"""Compare the JIT and pure-numpy kernel paths.

The kernel module selects its backend at import time from the
CONVBOUND_NO_NUMBA environment variable, so each backend runs in a
fresh subprocess and reports wall times for the tiling search and the
block convolution.

Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys

WORKER = r"""
import json, time
import numpy as np
from convbound import _kernels
from convbound.bounds import MemoryBudget
from convbound.dataflow import DataflowKind, tiling_search
from convbound.workload import vgg16_workload

# warm up so JIT compilation is not counted
_kernels.search_proposed(1, 8, 8, 8, 8, 3, 3, 1, 256)
_kernels.conv_block(np.zeros((1, 1, 3, 3), dtype=np.int64),
                    np.zeros((1, 1, 3, 3), dtype=np.int64), 1)

wl = vgg16_workload(3)
bud = MemoryBudget(88832)
t0 = time.perf_counter()
for _ in range(3):
    total = sum(tiling_search(DataflowKind.PROPOSED, l, wl.batch, bud)
                .volume.total for l in wl.layers)
t_search = (time.perf_counter() - t0) / 3

rng = np.random.default_rng(0)
inp = rng.integers(-8, 8, (2, 64, 30, 30)).astype(np.int64)
wts = rng.integers(-8, 8, (64, 64, 3, 3)).astype(np.int64)
t0 = time.perf_counter()
for _ in range(5):
    out = _kernels.conv_block(inp, wts, 1)
t_conv = (time.perf_counter() - t0) / 5

print(json.dumps({"numba": _kernels.HAS_NUMBA, "search_s": t_search,
                  "conv_s": t_conv, "checksum": int(out.sum()),
                  "volume": int(total)}))
"""


def run(no_numba: bool) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["CONVBOUND_NO_NUMBA"] = "1"
    else:
        env.pop("CONVBOUND_NO_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    jit = run(no_numba=False)
    plain = run(no_numba=True)
    if jit["checksum"] != plain["checksum"] or jit["volume"] != plain["volume"]:
        raise SystemExit("backends disagree; this is a bug")
    print(f"{'':14}{'jit':>12}{'numpy':>12}{'speedup':>10}")
    for key, label in (("search_s", "vgg search"), ("conv_s", "conv block")):
        ratio = plain[key] / jit[key]
        print(f"{label:14}{jit[key]:>11.4f}s{plain[key]:>11.4f}s{ratio:>9.1f}x")
    print(f"jit backend active: {jit['numba']}, "
          f"fallback backend active: {not plain['numba']}")


if __name__ == "__main__":
    main()
