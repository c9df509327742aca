import itertools
import math

import pytest
from hypothesis import given, strategies as st

from strategies import monoids
from tracesync.errors import InputError
from tracesync.models import free_commutative, free_monoid, path_network, ring_network, star_network
from tracesync.moebius import (
    Polynomial,
    Valuation,
    ValuationClass,
    classify_detailed,
    classify_valuation,
    components,
    extend_valuation,
    factored_transform,
    format_valuation,
    growth_coefficients,
    is_irreducible,
    moebius_polynomial,
    moebius_transform,
    multivariate_eval,
    parse_valuation,
    restrict_valuation,
    smallest_root,
)
from tracesync.traces import TraceMonoid, enumerate_traces

Q1 = 1 - math.sqrt(2) / 2


def brute_cliques(m):
    for r in range(m.size + 1):
        for c in itertools.combinations(range(m.size), r):
            if all(not m.dep[a, b] for a, b in itertools.combinations(c, 2)):
                yield c


def brute_transform(m, f, c):
    return sum((-1) ** (len(d) - len(c)) * math.prod(f.weights[a] for a in d)
               for d in brute_cliques(m) if set(c) <= set(d))


@pytest.mark.parametrize("net, coeffs", [
    (path_network(5), (1, -5, 6, -1)),
    (ring_network(4), (1, -4, 2)),
    (ring_network(5), (1, -5, 5)),
])
def test_known_polynomials(net, coeffs):
    assert moebius_polynomial(net.monoid).coefficients == coeffs


def test_polynomial_text_and_algebra():
    p = Polynomial((1, -5, 6, -1))
    assert str(p) == "1 - 5t + 6t^2 - 1t^3"
    assert p.derivative().coefficients == (-5, 12, -3)
    assert (Polynomial((1, -1)) * Polynomial((1, -1))).coefficients == (1, -2, 1)
    assert Polynomial((1, 0, 0)).degree == 0


def test_trivial_polynomials():
    assert moebius_polynomial(free_monoid(4)).coefficients == (1, -4)
    assert moebius_polynomial(free_commutative(3)).coefficients == (1, -3, 3, -1)


def test_roots():
    assert smallest_root(ring_network(4).monoid) == pytest.approx(Q1, abs=1e-12)
    assert smallest_root(ring_network(5).monoid) == pytest.approx(0.5 - math.sqrt(5) / 10, abs=1e-12)
    # value frozen from an independent numpy.roots computation
    assert smallest_root(path_network(5).monoid) == pytest.approx(0.3079785283699721, abs=1e-12)
    # (1 - t)^3 has a triple root; the per-component search still finds it
    assert smallest_root(free_commutative(3)) == pytest.approx(1.0, abs=1e-9)


@given(monoids)
def test_root_agrees_with_numpy(m):
    import numpy as np

    coeffs = moebius_polynomial(m).coefficients
    real = [r.real for r in np.roots(coeffs[::-1]) if abs(r.imag) < 1e-9 and r.real > 0]
    if len(components(m)) == 1:
        assert smallest_root(m) == pytest.approx(min(real), abs=1e-7)


def test_growth_series_values():
    assert growth_coefficients(path_network(5).monoid, 8) == [1, 5, 19, 66, 221, 728, 2380, 7753, 25213]
    assert growth_coefficients(free_monoid(3), 4) == [1, 3, 9, 27, 81]


@given(monoids)
def test_growth_series_counts_traces(m):
    counts = [0] * 6
    for x in enumerate_traces(m, 5):
        counts[len(x)] += 1
    assert counts == growth_coefficients(m, 5)


def test_uniform_quarter_transform():
    m = ring_network(4).monoid
    h = moebius_transform(m, Valuation.uniform(m, 0.25))
    assert h.epsilon == pytest.approx(0.125)
    assert h[(0,)] == pytest.approx(0.1875)
    assert h[(0, 2)] == pytest.approx(0.0625)


@st.composite
def valuations(draw):
    m = draw(monoids)
    w = draw(st.lists(st.floats(0.01, 0.6), min_size=m.size, max_size=m.size))
    return Valuation(m, w)


@given(valuations())
def test_transform_forms_agree(f):
    m = f.monoid
    h1, h2 = moebius_transform(m, f), factored_transform(m, f)
    assert set(h1.values) == set(h2.values)
    for c in h1.values:
        assert h1.values[c] == pytest.approx(h2.values[c], abs=1e-12)
        assert h1.values[c] == pytest.approx(brute_transform(m, f, c), abs=1e-12)
    # inversion: f(e) = 1 is the sum of h over all cliques
    assert math.fsum(h1.values.values()) == pytest.approx(1.0, abs=1e-12)
    assert multivariate_eval(m, f) == pytest.approx(h1.epsilon, abs=1e-12)


def test_classification():
    m = ring_network(4).monoid
    assert classify_valuation(m, Valuation.uniform(m, Q1)) is ValuationClass.MOEBIUS
    assert classify_valuation(m, Valuation.uniform(m, 0.25)) is ValuationClass.SUB_MOEBIUS
    neither = classify_detailed(m, Valuation.uniform(m, 0.4))
    assert neither.kind is ValuationClass.NEITHER and "h(" in neither.message


def test_components_and_irreducibility(figure):
    assert is_irreducible(figure)
    assert not is_irreducible(free_commutative(2))
    assert components(free_commutative(3)) == [[0], [1], [2]]
    assert is_irreducible(star_network(3).monoid)


@pytest.mark.parametrize("n", [4, 5])
def test_extension_recovers_weight(n):
    m = ring_network(n).monoid
    f = Valuation.uniform(m, smallest_root(m))
    for a in m.names:
        sub = restrict_valuation(f, [b for b in m.names if b != a])
        assert classify_valuation(sub.monoid, sub) is ValuationClass.SUB_MOEBIUS
        back = extend_valuation(m, a, sub)
        assert back[a] == pytest.approx(f[a], abs=1e-12)
        assert classify_valuation(m, back) is ValuationClass.MOEBIUS


def test_extension_of_nonuniform_path_valuation():
    m = path_network(4).monoid
    sub_m = m.restrict(["a0", "a1", "a2"])
    f = Valuation(sub_m, [0.2, 0.3, 0.25])
    g = extend_valuation(m, "a3", f)
    assert classify_valuation(m, g) is ValuationClass.MOEBIUS


def test_extension_errors():
    m = ring_network(4).monoid
    sub_m = m.restrict(["a0", "a1", "a2"])
    with pytest.raises(InputError):
        extend_valuation(m, "a3", Valuation.uniform(sub_m, 0.5))
    with pytest.raises(InputError):
        extend_valuation(m, "a0", Valuation.uniform(sub_m, 0.2))


def test_valuation_validation_and_text():
    m = TraceMonoid(["x", "y"])
    with pytest.raises(InputError):
        Valuation(m, {"x": 0.1})
    with pytest.raises(InputError):
        Valuation(m, [0.1, -1])
    f = Valuation(m, {"x": 0.1, "y": 0.7})
    assert parse_valuation(m, format_valuation(f)).weights == f.weights
    with pytest.raises(InputError, match="line 2"):
        parse_valuation(m, "x=0.1\ny=abc")
