import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from tracesync.errors import InputError, ResourceError
from tracesync.models import path_network, ring_network, star_network
from tracesync.moebius import Valuation, moebius_transform
from tracesync.rng import RandomStream, derive_seed
from tracesync.sampler import (
    DistKind,
    LocalDistribution,
    PsaClass,
    bernoulli_lengths,
    check_dists,
    classify_psa,
    expected_length_uniform,
    finite_bernoulli_word,
    psa_batch,
    psa_run,
    psa_valuation,
    split_network,
    structural_class,
)
from tracesync.scenarios import uniform_half
from tracesync.sync import AlphabetNetwork, SyncTag
from tracesync.traces import EMPTY, enumerate_traces


def test_rng_is_reproducible():
    a, b = RandomStream(5), RandomStream(5)
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]
    assert derive_seed(1, 0) != derive_seed(1, 1) != derive_seed(2, 1)
    u = RandomStream(0)
    xs = [u.random() for _ in range(1000)]
    assert 0 <= min(xs) and max(xs) < 1


def test_local_distribution_kinds():
    d = LocalDistribution({"a": 0.3, "b": 0.7})
    assert d.kind is DistKind.PROBABILITY and d.stop_mass == 0
    s = LocalDistribution({"a": 0.3, "b": 0.2}, "sub")
    assert s.kind is DistKind.SUB and s.stop_mass == pytest.approx(0.5)
    with pytest.raises(InputError):
        LocalDistribution({"a": 0.3, "b": 0.2}, "prob")
    with pytest.raises(InputError):
        LocalDistribution({"a": 0.8, "b": 0.3})
    with pytest.raises(InputError):
        LocalDistribution({"a": 0.0})
    with pytest.raises(InputError):
        LocalDistribution({})


def test_dists_must_match_alphabets(ring4):
    dists = uniform_half(ring4)
    check_dists(ring4, dists)
    with pytest.raises(InputError):
        check_dists(ring4, dists[:3])
    with pytest.raises(InputError):
        check_dists(ring4, dists[1:] + dists[:1])


def test_finite_bernoulli_words():
    d = LocalDistribution({"a": 0.5, "b": 0.25})
    w = finite_bernoulli_word(d, RandomStream(3))
    assert set(w) <= {"a", "b"}
    lengths = bernoulli_lengths(d, RandomStream(3), 40000)
    # geometric with stop probability 1/4: mean 3
    assert lengths.mean() == pytest.approx(3.0, abs=0.1)
    assert bernoulli_lengths(d, RandomStream(3), 1)[0] == len(w)
    with pytest.raises(InputError):
        finite_bernoulli_word(LocalDistribution({"a": 1.0}), RandomStream(0))
    with pytest.raises(ResourceError):
        bernoulli_lengths(LocalDistribution({"a": 0.999}), RandomStream(0), 10, max_length=5)


NETS = [ring_network(4), ring_network(5), path_network(4), star_network(3),
        AlphabetNetwork([["a", "b", "c"], ["a", "b"]])]


@st.composite
def configs(draw):
    net = draw(st.sampled_from(NETS))
    dists = []
    for i in range(net.size):
        names = net.alphabet_names(i)
        w = draw(st.lists(st.floats(0.05, 1.0), min_size=len(names), max_size=len(names)))
        scale = draw(st.sampled_from([1.0, 0.9, 0.6]))
        total = sum(w)
        dists.append(LocalDistribution({n: scale * x / total for n, x in zip(names, w)}))
    return net, dists


@settings(max_examples=40)
@given(configs(), st.integers(0, 2**32), st.sampled_from([1, 3, 64]))
def test_kernel_matches_reference(cfg, seed, chunk):
    net, dists = cfg
    budget = 200
    a = psa_run(net, dists, RandomStream(seed), budget=budget)
    rng_b = RandomStream(seed)
    b = psa_run(net, dists, rng_b, budget=budget, chunk=chunk, engine="reference")
    assert a.word == b.word and a.status == b.status and a.tag == b.tag
    assert a.trace == b.trace


def test_batch_matches_single_runs(ring4):
    dists = uniform_half(ring4)
    rng = RandomStream(11)
    singles = [len(psa_run(ring4, dists, rng).trace) for _ in range(50)]
    lengths, statuses = psa_batch(ring4, dists, RandomStream(11), 50)
    assert lengths.tolist() == singles and (statuses != 2).all()


def test_outcome_text(path5):
    half = uniform_half(path5)
    out = psa_run(path5, half, RandomStream(0), budget=1000)
    assert str(out) == "BudgetExhausted" and len(out.trace) == 1000
    ring = ring_network(4)
    out = psa_run(ring, uniform_half(ring), RandomStream(3))
    assert str(out) == f"Terminated({out.tag.value})" and out.tag is SyncTag.DL
    with pytest.raises(InputError):
        psa_run(ring, uniform_half(ring), RandomStream(3), budget=0)
    with pytest.raises(InputError):
        psa_run(ring, uniform_half(ring), RandomStream(3), engine="fast")


def test_output_law_is_sub_bernoulli(ring4):
    """P(y = x) = eps f(x) for the output y of a terminating PSA."""
    dists = uniform_half(ring4)
    f = psa_valuation(ring4, dists)
    eps = moebius_transform(ring4.monoid, f).epsilon
    support = enumerate_traces(ring4.monoid, 2)
    rng = RandomStream(21)
    n = 20000
    counts = Counter(psa_run(ring4, dists, rng).trace for _ in range(n))
    obs = [counts.get(x, 0) for x in support]
    exp = [n * eps * f(x) for x in support]
    obs.append(n - sum(obs))
    exp.append(n - sum(exp))
    stat = sum((o - e) ** 2 / e for o, e in zip(obs, exp))
    assert sps.chi2.sf(stat, len(obs) - 1) > 1e-3


def test_mean_length_formula():
    m = ring_network(4).monoid
    assert expected_length_uniform(m, 0.25) == pytest.approx(6.0)
    with pytest.raises(InputError):
        expected_length_uniform(m, 0.3)


def test_classification_examples(path5, ring4):
    q = psa_valuation(path5, uniform_half(path5))
    assert q["a0"] == 0.5 and q["a2"] == 0.25
    assert classify_psa(path5, uniform_half(path5)) is PsaClass.INFINITE
    assert classify_psa(ring4, uniform_half(ring4)) is PsaClass.FINITE
    assert structural_class(path5) is PsaClass.INFINITE
    sub = uniform_half(path5)[:-1] + [LocalDistribution({"a3": 0.5, "a4": 0.25})]
    assert classify_psa(path5, sub) is PsaClass.FINITE
    # two alphabets sharing two letters synchronize into a finite output
    net = AlphabetNetwork([["a", "b", "c"], ["a", "b"]])
    assert structural_class(net) is PsaClass.FINITE


@settings(max_examples=30)
@given(configs())
def test_structural_and_valuation_criteria_agree(cfg):
    net, dists = cfg
    # classify_psa cross-checks the two internally and raises on disagreement
    cls = classify_psa(net, dists)
    if all(d.kind is DistKind.PROBABILITY for d in dists):
        assert cls is structural_class(net)


def test_reducible_network_parts():
    net = AlphabetNetwork([["a", "b"], ["c", "d"], ["d", "e"], ["e", "c"]])
    parts = split_network(net)
    assert sorted(len(p.names) for p, _ in parts) == [2, 3]
    dists = [LocalDistribution({"a": 0.5, "b": 0.5})] + [
        LocalDistribution({n: 0.5 for n in net.alphabet_names(i)}) for i in range(1, 4)]
    # the free two-letter part never stops, so the whole output is infinite
    assert classify_psa(net, dists) is PsaClass.INFINITE
    dists[0] = LocalDistribution({"a": 0.4, "b": 0.4})
    assert classify_psa(net, dists) is PsaClass.FINITE


def test_empty_output_frequency(ring4):
    lengths, _ = psa_batch(ring4, uniform_half(ring4), RandomStream(1), 40000)
    assert (lengths == 0).mean() == pytest.approx(0.125, abs=0.01)
