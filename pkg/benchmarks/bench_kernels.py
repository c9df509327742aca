"""Compiled kernels vs. the interpreted fallback.

Runs every workload in this process (numba) and again in a child process
with TRACESYNC_DISABLE_NUMBA=1, checks that both produce identical
checksums, and prints per-item times and the speedup.

    python benchmarks/bench_kernels.py [--scale 0.1]
"""

import argparse
import json
import os
import subprocess
import sys
import time

# workload name -> item count at scale 1; the fallback gets a tenth of it
SIZES = {"psa_batch": 200_000, "pfsa_increments": 20_000, "naive_cylinder": 50_000}


def run_workloads(scale):
    from tracesync._jit import NUMBA_ENABLED
    from tracesync.models import ring_network
    from tracesync.rng import RandomStream
    from tracesync.sampler import psa_batch
    from tracesync.scenarios import ring4_pfsa_config, uniform_half
    from tracesync.pfsa import sample_increments
    from tracesync.stats import NaiveSource, estimate_cylinder
    from tracesync.traces import normalize

    ring = ring_network(4)
    dists = uniform_half(ring)
    cfg = ring4_pfsa_config()

    def psa(n):
        lengths, _ = psa_batch(ring, dists, RandomStream(7), n)
        return int(lengths.sum())

    def pfsa(n):
        return int(sample_increments(cfg, RandomStream(7), n).word.sum())

    def naive(n):
        est = estimate_cylinder(NaiveSource(ring, dists, 7), normalize(ring.monoid, ["a0"]), n)
        return round(est.estimate * n)

    work = {"psa_batch": psa, "pfsa_increments": pfsa, "naive_cylinder": naive}
    out = {"numba": NUMBA_ENABLED}
    for name, fn in work.items():
        n = max(10, int(SIZES[name] * scale))
        fn(10)  # compile, or load the cache
        t0 = time.perf_counter()
        checksum = fn(n)
        out[name] = {"n": n, "seconds": time.perf_counter() - t0, "checksum": checksum}
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        print(json.dumps(run_workloads(args.scale)))
        return

    fast = run_workloads(args.scale)
    env = dict(os.environ, TRACESYNC_DISABLE_NUMBA="1")
    proc = subprocess.run([sys.executable, __file__, "--child", "--scale", str(args.scale / 10)],
                          env=env, capture_output=True, text=True, check=True)
    slow = json.loads(proc.stdout)
    assert fast["numba"] and not slow["numba"], "backend switch did not take effect"

    print(f"{'workload':<18}{'numba us/item':>15}{'python us/item':>16}{'speedup':>10}")
    for name in SIZES:
        f, s = fast[name], slow[name]
        fu = 1e6 * f["seconds"] / f["n"]
        su = 1e6 * s["seconds"] / s["n"]
        print(f"{name:<18}{fu:>15.2f}{su:>16.2f}{su / fu:>9.0f}x")

    # same seeds on both backends must give the same draws
    check = run_workloads(args.scale / 10)
    for name in SIZES:
        if check[name]["checksum"] != slow[name]["checksum"]:
            sys.exit(f"{name}: numba and fallback disagree ({check[name]['checksum']} vs {slow[name]['checksum']})")
    print("checksums agree across backends")


if __name__ == "__main__":
    main()
