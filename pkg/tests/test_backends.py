"""The interpreted fallback must reproduce the compiled kernels exactly."""

import json
import os
import subprocess
import sys

from tracesync._jit import NUMBA_ENABLED

PROBE = """
import json
from tracesync._jit import NUMBA_ENABLED
from tracesync.models import ring_network
from tracesync.rng import RandomStream
from tracesync.sampler import bernoulli_lengths, psa_batch, psa_run
from tracesync.scenarios import ring4_pfsa_config, uniform_half
from tracesync.pfsa import sample_increments, naive_walk_state
from tracesync.stats import NaiveSource, PfsaSource, PsaSource
from tracesync.traces import normalize

ring = ring_network(4)
half = uniform_half(ring)
cfg = ring4_pfsa_config()
x = normalize(ring.monoid, [0, 1])
lengths, statuses = psa_batch(ring, half, RandomStream(1), 300)
state = sample_increments(cfg, RandomStream(2), 200)
print(json.dumps({
    "numba": NUMBA_ENABLED,
    "psa": lengths.tolist(),
    "status": statuses.tolist(),
    "word": list(psa_run(ring, half, RandomStream(3)).word),
    "bern": bernoulli_lengths(cfg.dists[1], RandomStream(4), 50).tolist(),
    "pfsa": state.word.tolist(),
    "rejects": state.increment_rejects.tolist(),
    "naive": naive_walk_state(ring, half, RandomStream(5), 300).word.tolist(),
    "cyl_psa": PsaSource(ring, half, 6).cylinder_counts(x, 500, 70).tolist(),
    "cyl_pfsa": PfsaSource(cfg, 7).cylinder_counts(x, 300, 70).tolist(),
    "cyl_naive": NaiveSource(ring, half, 8).cylinder_counts(x, 300, 70).tolist(),
}))
"""


def probe(disable):
    env = dict(os.environ)
    env.pop("TRACESYNC_DISABLE_NUMBA", None)
    if disable:
        env["TRACESYNC_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_fallback_matches_numba():
    fast, slow = probe(False), probe(True)
    assert fast.pop("numba") is True
    assert slow.pop("numba") is False
    assert fast == slow


def test_flag_read_at_import():
    assert NUMBA_ENABLED == (os.environ.get("TRACESYNC_DISABLE_NUMBA", "") not in ("1", "true", "yes", "on"))
