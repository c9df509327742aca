import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tracesync.errors import InconclusiveError, InputError
from tracesync.models import path_network, ring_network
from tracesync.moebius import Valuation
from tracesync.rng import RandomStream
from tracesync.sampler import psa_run
from tracesync.scenarios import Q1, ring4_pfsa_config, uniform_half
from tracesync.stats import (
    Z99,
    EstimateReport,
    NaiveSource,
    PfsaSource,
    PsaSource,
    _merge,
    estimate_cylinder,
    estimate_mean_length,
    fit_first_hitting,
    letter_frequencies,
    proportion,
    two_sample_chi2,
)
from tracesync.traces import EMPTY, enumerate_traces, in_hitting_set, left_divides, normalize

RING4 = ring_network(4)
HALF = uniform_half(RING4)


def test_report_arithmetic():
    r = proportion(30, 100)
    assert r.estimate == 0.3 and r.stderr == pytest.approx(math.sqrt(0.21 / 100))
    lo, hi = r.ci
    assert hi - lo == pytest.approx(2 * Z99 * r.stderr)
    assert r.contains(0.3) and not r.contains(0.9)
    assert r.z_score(0.3) == 0
    assert "estimate=0.300000" in r.to_kv()
    assert r.to_table().splitlines()[1].startswith("--")
    assert EstimateReport(1.0, 0.0, 5).z_score(0.5) == math.inf


@settings(max_examples=25)
@given(st.lists(st.integers(0, 3), max_size=4))
def test_psa_decider_matches_left_division(word):
    """With a cap no run reaches, the kernel tally equals brute-force prefix tests on the same runs."""
    m = RING4.monoid
    x = normalize(m, word)
    counts = PsaSource(RING4, HALF, seed=17).cylinder_counts(x, 300, cap=10**5)
    rng = RandomStream(17)
    hits = sum(left_divides(m, x, psa_run(RING4, HALF, rng).trace) is not None for _ in range(300))
    assert counts.tolist() == [hits, 300 - hits, 0]


def test_psa_cylinders_follow_valuation():
    m = RING4.monoid
    for word, want in [([0], 0.25), ([0, 1], 1 / 16), ([0, 2], 1 / 16)]:
        est = estimate_cylinder(PsaSource(RING4, HALF, seed=3), normalize(m, word), 40000)
        assert abs(est.z_score(want)) < 4.5


def test_cylinder_of_empty_trace():
    assert estimate_cylinder(PsaSource(RING4, HALF), EMPTY, 10).estimate == 1.0
    with pytest.raises(InputError):
        estimate_cylinder(PsaSource(RING4, HALF), EMPTY, 0)


def test_undecided_samples_raise():
    path = path_network(5)
    src = PsaSource(path, uniform_half(path), seed=1)
    # a4 is pushed far away by long runs of a0 a1 synchronizations
    with pytest.raises(InconclusiveError):
        estimate_cylinder(src, normalize(path.monoid, [4, 4, 4, 4, 4, 4]), 2000, slack=0)


def test_pfsa_and_naive_cylinders():
    cfg = ring4_pfsa_config()
    a0 = normalize(cfg.monoid, [0])
    good = estimate_cylinder(PfsaSource(cfg, seed=5), a0, 20000)
    assert abs(good.estimate - Q1) < 0.01 and good.undecided == 0
    naive = estimate_cylinder(NaiveSource(RING4, HALF, seed=5), a0, 20000)
    assert naive.estimate > good.estimate - 0.02
    with pytest.raises(InputError):
        NaiveSource(path_network(3), uniform_half(path_network(3)))


def test_mean_length():
    est = estimate_mean_length(PsaSource(RING4, HALF, seed=2), 50000)
    assert est.contains(6.0) or abs(est.z_score(6.0)) < 4
    with pytest.raises(InputError):
        estimate_mean_length(PsaSource(path_network(3), uniform_half(path_network(3))), 10)


def exact_sample(f, a, horizon, n):
    """A sample whose histogram matches ``n f`` on short pyramids, rounded."""
    m = f.monoid
    out = []
    for v in enumerate_traces(m, horizon):
        if v and in_hitting_set(m, v, a):
            out += [v] * round(n * f(v))
    # the rest of the mass sits on longer pyramids
    long = normalize(m, [0, 0, 0, 0, m.letter_id(a)])
    return out + [long] * (n - len(out))


def test_fit_accepts_exact_and_rejects_wrong():
    m = RING4.monoid
    f = Valuation.uniform(m, Q1)
    incs = exact_sample(f, "a3", 3, 20000)
    fit = fit_first_hitting(incs, f, "a3", horizon=3)
    assert fit.p_value > 0.99
    assert fit.dof == len(fit.buckets) - 1
    assert "chi2=" in fit.to_kv() and "bucket" in fit.to_table()
    assert fit_first_hitting(incs, Valuation.uniform(m, 0.25), "a3", horizon=3).p_value < 1e-6


def test_fit_input_checks():
    m = RING4.monoid
    f = Valuation.uniform(m, Q1)
    with pytest.raises(InputError):
        fit_first_hitting([], f, "a3")
    with pytest.raises(InputError):
        fit_first_hitting([normalize(m, [3, 3])], f, "a3")


def test_merge_pools_small_buckets():
    rows = [["a", 10, 20.0], ["b", 1, 2.0], ["c", 2, 1.0], ["d", 30, 40.0]]
    merged = _merge([r[:] for r in rows], 5.0)
    assert sum(r[1] for r in merged) == 43 and all(r[2] >= 5 for r in merged)
    assert min(r[2] for r in merged) == 23.0


def test_two_sample_controls():
    m = RING4.monoid
    xs = [normalize(m, [k % 4]) for k in range(400)]
    same = two_sample_chi2(xs, xs[::-1], m)
    assert same.p_value == pytest.approx(1.0)
    skew = [normalize(m, [0])] * 300 + [normalize(m, [1])] * 100
    assert two_sample_chi2(xs, skew, m).p_value < 1e-6
    with pytest.raises(InputError):
        two_sample_chi2([], xs, m)


def test_letter_frequencies():
    m = RING4.monoid
    assert letter_frequencies(m, np.array([0, 0, 1, 3])).tolist() == [0.5, 0.25, 0, 0.25]
