"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from tracesync.models import figure_monoid, free_commutative, free_monoid, path_network, ring_network

MONOIDS = [
    path_network(5).monoid,
    ring_network(4).monoid,
    ring_network(5).monoid,
    figure_monoid(),
    free_monoid(3),
    free_commutative(3),
]

monoids = st.sampled_from(MONOIDS)


def words(monoid, max_size=12):
    return st.lists(st.integers(0, monoid.size - 1), max_size=max_size)


@st.composite
def monoid_and_word(draw, max_size=12):
    m = draw(monoids)
    return m, draw(words(m, max_size))
