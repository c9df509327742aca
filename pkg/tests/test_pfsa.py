import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tracesync.errors import InputError, ResourceError
from tracesync.models import path_network, ring_network
from tracesync.moebius import Valuation
from tracesync.pfsa import (
    PfsaConfig,
    first_hitting,
    format_increment_log,
    naive_walk,
    naive_walk_state,
    pfsa_generate,
    sample_increments,
    sample_pyramidal,
    sample_pyramidal_reference,
)
from tracesync.rng import RandomStream
from tracesync.sampler import LocalDistribution
from tracesync.scenarios import Q1, ring4_pfsa_config, tampered_pfsa, uniform_half
from tracesync.solver import solve_ring, uniform_targets
from tracesync.stats import two_sample_chi2
from tracesync.traces import EMPTY, in_hitting_set, left_divides, normalize


@pytest.fixture(scope="module")
def cfg():
    return ring4_pfsa_config()


def test_target_valuation(cfg):
    assert cfg.target_valuation().weights == pytest.approx((Q1,) * 4, abs=1e-12)
    assert cfg.letter == "a3" and cfg.letter_id == 3


@given(st.integers(0, 2**40))
def test_kernel_matches_reference(seed):
    cfg = ring4_pfsa_config()
    r1, r2 = RandomStream(seed), RandomStream(seed)
    v1 = sample_pyramidal(cfg, r1)
    v2, _ = sample_pyramidal_reference(cfg, r2)
    assert v1 == v2
    assert r1.next_u64() == r2.next_u64()


def test_increments_are_pyramids(cfg):
    state = sample_increments(cfg, RandomStream(2), 500)
    assert state.iterations == 500
    incs = state.increments()
    assert all(in_hitting_set(cfg.monoid, v, "a3") for v in incs)
    assert sum(len(v) for v in incs) == state.length
    assert state.rejections == int(state.increment_rejects.sum()) >= 0


def test_first_increment_is_first_hitting(cfg):
    state = pfsa_generate(cfg, RandomStream(9), 300)
    assert state.length >= 300
    first = state.increments()[0]
    assert first_hitting(cfg.monoid, state.trace, "a3") == first
    assert left_divides(cfg.monoid, first, state.trace) is not None
    # a prefix of the word gives a prefix of the trace
    assert left_divides(cfg.monoid, state.prefix(100), state.trace) is not None


def test_reproducible_prefix(cfg):
    a = pfsa_generate(cfg, RandomStream(1), 100).prefix(100)
    b = pfsa_generate(cfg, RandomStream(1), 100).prefix(100)
    assert a == b and len(a) == 100


def test_first_hitting_small(ring4):
    m = ring4.monoid
    x = normalize(m, [0, 2, 3, 1, 0])
    assert first_hitting(m, x, "a3") == normalize(m, [0, 2, 3])
    assert first_hitting(m, x, "a1") == normalize(m, [0, 2, 1])
    # everything below the a3 counts, including the later a0
    y = normalize(m, [0, 2, 1, 0, 3])
    assert first_hitting(m, y, "a3") == y
    assert first_hitting(m, normalize(m, [0]), "a3") is None


def test_renewal_two_sample():
    """Kernel increments and interpreted ones share a law; tampered weights do not."""
    cfg = ring4_pfsa_config()
    kernel = sample_increments(cfg, RandomStream(31), 20000).increments()
    rng = RandomStream(32)
    ref = [sample_pyramidal_reference(cfg, rng)[0] for _ in range(3000)]
    same = two_sample_chi2(kernel, ref, cfg.monoid)
    assert same.p_value > 1e-3
    bad_dists = [LocalDistribution({"a0": 0.35, "a1": 0.65}), LocalDistribution({"a1": 0.40, "a2": 0.30})]
    bad = ring4_pfsa_config(dists=bad_dists)
    other = sample_increments(bad, RandomStream(33), 20000).increments()
    assert two_sample_chi2(kernel, other, cfg.monoid).p_value < 1e-6


def test_config_validation(ring4):
    _, params = solve_ring(ring4, uniform_targets(ring4.monoid), removed="a3")
    with pytest.raises(InputError):
        PfsaConfig(ring4, "a3", uniform_half(ring4))
    with pytest.raises(InputError):
        # probability rows on the reduced path never terminate
        PfsaConfig(ring4, "a3", [LocalDistribution({"a0": 0.5, "a1": 0.5}), LocalDistribution({"a1": 0.5, "a2": 0.5})])
    with pytest.raises(InputError):
        PfsaConfig(ring4, "zz", params.dists)
    with pytest.raises(InputError):
        PfsaConfig(ring4, "a3", params.dists, max_rejects=-1)


def test_rejection_budget_keeps_partial(cfg):
    tight = PfsaConfig(cfg.network, cfg.letter, cfg.dists, max_rejects=2)
    with pytest.raises(ResourceError) as info:
        sample_increments(tight, RandomStream(0), 10**5)
    part = info.value.partial
    assert part.iterations > 0
    assert all(in_hitting_set(cfg.monoid, v, "a3") for v in part.increments())


def test_increment_log(cfg):
    log = format_increment_log(sample_increments(cfg, RandomStream(4), 3))
    assert log.count("# rejected:") == 3 and log.count("%\n") == 3


def test_naive_walk(ring4):
    x = naive_walk(ring4, uniform_half(ring4), RandomStream(5), 200)
    assert len(x) >= 200
    state = naive_walk_state(ring4, uniform_half(ring4), RandomStream(5), 200)
    assert state.trace == x and state.rejections == 0
    with pytest.raises(InputError):
        naive_walk(path_network(3), uniform_half(path_network(3)), RandomStream(0), 10)


def test_buffers_grow(cfg):
    state = pfsa_generate(cfg, RandomStream(6), 300_000)
    assert state.length >= 300_000
    freq = np.bincount(state.word, minlength=4) / state.length
    assert np.ptp(freq) < 0.01
