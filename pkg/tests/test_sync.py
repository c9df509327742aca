import random

import pytest
from hypothesis import given, strategies as st

from tracesync.errors import InputError, StateError
from tracesync.models import path_network, ring_network, star_network
from tracesync.sync import (
    AlphabetNetwork,
    SyncState,
    SyncTag,
    TaggedWord,
    WordVector,
    has_synchronization_cycle,
    min_piece,
    stream_synchronize,
    synchronize,
)
from tracesync.traces import normalize

NETWORKS = [ring_network(4), path_network(5), ring_network(5), star_network(3),
            AlphabetNetwork([["a", "b", "c"], ["a", "b"]])]


def greedy_oracle(network, vector, rnd):
    """Consume enabled letters in random order; the result must not depend on it."""
    bufs = [list(c.letters) for c in vector.components]
    word = []
    while True:
        enabled = [a for a in range(len(network.names))
                   if all(bufs[j] and bufs[j][0] == a for j in network.resources[a])]
        if not enabled:
            break
        a = rnd.choice(enabled)
        for j in network.resources[a]:
            bufs[j].pop(0)
        word.append(a)
    return normalize(network.monoid, word), bufs


@st.composite
def vectors(draw):
    net = draw(st.sampled_from(NETWORKS))
    comps = []
    for i in range(net.size):
        letters = draw(st.lists(st.sampled_from(net.alphabets[i]), max_size=7))
        tag = draw(st.sampled_from([SyncTag.WFI, SyncTag.EOF]))
        comps.append(TaggedWord(tuple(letters), tag))
    return net, WordVector(tuple(comps))


@given(vectors(), st.randoms(use_true_random=False))
def test_trace_matches_random_order_oracle(nv, rnd):
    net, vec = nv
    x, tag = synchronize(net, vec)
    want, rest = greedy_oracle(net, vec, rnd)
    assert x == want
    closed = [c.tag is SyncTag.EOF for c in vec.components]
    if all(not b and c for b, c in zip(rest, closed)):
        assert tag is SyncTag.EOF
    else:
        # waiting is right exactly when feeding the open empty components could enable a letter
        could = any(all((rest[j] and rest[j][0] == a) or (not rest[j] and not closed[j])
                        for j in net.resources[a]) for a in range(len(net.names)))
        assert tag is (SyncTag.WFI if could else SyncTag.DL)


@given(vectors(), st.randoms(use_true_random=False))
def test_chunked_feeding_is_invariant(nv, rnd):
    net, vec = nv
    whole = synchronize(net, vec)
    state = SyncState(net)
    pos = [0] * net.size
    while not state.terminal and any(p < len(c.letters) or c.tag is SyncTag.EOF and not state.is_closed(i)
                                     for i, (p, c) in enumerate(zip(pos, vec.components))):
        parts = []
        for i, c in enumerate(vec.components):
            k = rnd.randint(0, len(c.letters) - pos[i])
            done = pos[i] + k == len(c.letters)
            closing = done and c.tag is SyncTag.EOF and not state.is_closed(i) and rnd.random() < 0.7
            parts.append(TaggedWord(c.letters[pos[i]:pos[i] + k], SyncTag.EOF if closing or state.is_closed(i) else SyncTag.WFI))
            pos[i] += k
        stream_synchronize(state, WordVector(tuple(parts)))
    assert (state.trace, state.tag) == whole


def test_worked_ring_vector(ring4):
    vec = WordVector.from_names(ring4, ["a0 a1 a1 a0", "a1 a2 a2 a1", "a3 a2 a3 a2", "a0 a3 a0 a3"])
    x, tag = synchronize(ring4, vec)
    assert x.format(ring4.monoid) == "{a0}·{a1,a3}·{a2}"
    assert tag is SyncTag.DL


def test_path_waits_for_input(path5):
    vec = WordVector.from_names(path5, ["a0", "a1", "", ""])
    x, tag = synchronize(path5, vec)
    assert x == normalize(path5.monoid, [0]) and tag is SyncTag.WFI
    assert min_piece(path5, vec) == 0


def test_eof_when_everything_consumed(ring4):
    vec = WordVector.from_names(ring4, ["a0", "", "", "a0"], [SyncTag.EOF] * 4)
    x, tag = synchronize(ring4, vec)
    assert len(x) == 1 and tag is SyncTag.EOF


def test_state_errors(ring4):
    state = SyncState(ring4).feed(WordVector.empty(ring4, SyncTag.EOF))
    assert state.tag is SyncTag.EOF
    with pytest.raises(StateError):
        state.append(WordVector.empty(ring4))
    s2 = SyncState(ring4)
    s2.append(WordVector.from_names(ring4, ["", "a1", "", ""], [SyncTag.EOF, "WFI", "WFI", "WFI"]))
    with pytest.raises(InputError):
        s2.append(WordVector.from_names(ring4, ["a0", "", "", ""]))
    with pytest.raises(InputError):
        s2.append(WordVector.from_names(ring4, ["a2", "", "", ""]))
    with pytest.raises(InputError):
        s2.append(WordVector.empty(path_network(3)))


def test_run_limit_and_residual(path5):
    vec = WordVector.from_names(path5, ["a0 a0 a0", "", "", ""])
    state = SyncState(path5)
    state.append(vec)
    assert state.run(limit=2) is None and state.length == 2
    assert state.residual.components[0].letters == (0,)
    assert state.run() is SyncTag.WFI


def test_long_streams_compact(path5):
    state = SyncState(path5)
    for _ in range(30):
        state.feed(WordVector.from_names(path5, [["a0"] * 300, [], [], []]))
    assert state.length == 9000 and state.buffered(0) == 0


def test_cycle_criterion():
    assert has_synchronization_cycle(ring_network(4))
    assert not has_synchronization_cycle(path_network(5))
    assert not has_synchronization_cycle(star_network(4))
    assert has_synchronization_cycle(AlphabetNetwork([["a", "b", "c"], ["a", "b"]]))
    # three alphabets, each pair sharing a different letter
    assert has_synchronization_cycle(AlphabetNetwork([["a", "b"], ["b", "c"], ["c", "a"]]))


def test_network_validation():
    with pytest.raises(InputError):
        AlphabetNetwork([])
    with pytest.raises(InputError):
        AlphabetNetwork([["a"], []])
    with pytest.raises(InputError):
        AlphabetNetwork([["a", "b"]], letters=["a"])
    net = AlphabetNetwork([["b", "a"]], letters=["a", "b"])
    assert net.names == ("a", "b") and net.alphabets == ((1, 0),)
