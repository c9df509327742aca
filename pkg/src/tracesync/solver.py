"""Local distributions realizing target letter weights on paths and rings.

On a path ``a_0 - a_1 - ... - a_N`` the alphabets are ``{a_{i-1}, a_i}``
for ``i = 1..N``.  Everything is expressed through the prefix values
``mu_i``, the multivariate Möbius polynomial of the sub-path
``a_0..a_i`` at the targets, which obey
``mu_{i+1} = mu_i - t_{i+1} mu_{i-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InputError, ResourceError
from .models import detect_topology, letter_names, path_network
from .moebius import ValuationClass, Valuation, classify_detailed, smallest_root
from .sampler import LocalDistribution, psa_valuation
from .sync import AlphabetNetwork
from .traces import TraceMonoid

MATCH_TOL = 1e-10
CLASSIFY_BUDGET = 10**5


class UnsupportedTopology(InputError):
    """Raised for networks that are neither paths nor rings."""


@dataclass(frozen=True)
class PathTargets:
    values: tuple[float, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise InputError("a path needs at least one target")
        if any(not (v > 0 and math.isfinite(v)) for v in vals):
            raise InputError(f"targets must be positive, got {vals}")
        names = tuple(self.names) or tuple(letter_names(len(vals)))
        if len(names) != len(vals):
            raise InputError("one name per target is required")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        """Index of the last letter, which is also the number of alphabets."""
        return len(self.values) - 1


@dataclass(frozen=True)
class SolvedParams:
    network: AlphabetNetwork
    dists: tuple[LocalDistribution, ...]
    meta: dict = field(default_factory=dict)

    def valuation(self) -> Valuation:
        return psa_valuation(self.network, self.dists)


def prefix_moebius(targets: PathTargets | Sequence[float]) -> list[float]:
    """``[mu_{-1}, mu_0, ..., mu_N]``."""
    t = targets.values if isinstance(targets, PathTargets) else tuple(targets)
    mu = [1.0, 1.0 - t[0]]
    for i in range(1, len(t)):
        mu.append(mu[-1] - t[i] * mu[-2])
    return mu


def _classify_path(targets: PathTargets):
    network = path_network(len(targets.values), targets.names)
    f = Valuation(network.monoid, dict(zip(targets.names, targets.values)))
    try:
        return classify_detailed(network.monoid, f)
    except ResourceError:
        return None


def _path_rows(targets: PathTargets, sub: bool) -> tuple[list[LocalDistribution], list[float]]:
    t, names, n = targets.values, targets.names, targets.n
    mu = prefix_moebius(targets)
    m = lambda i: 1.0 if i < -1 else mu[i + 1]
    if n == 0:
        return [LocalDistribution({names[0]: t[0]})], mu
    rows = []
    for i in range(1, n + 1):
        left = t[i - 1] * m(i - 3) / m(i - 2)
        right = t[n] if (sub and i == n) else m(i - 1) / m(i - 2)
        rows.append(LocalDistribution({names[i - 1]: left, names[i]: right}))
    return rows, mu


def _check_fit(params: SolvedParams, targets: PathTargets) -> None:
    f = params.valuation()
    for name, want in zip(targets.names, targets.values):
        if abs(f[name] - want) > MATCH_TOL * max(1.0, want):
            raise AssertionError(f"solved weight of {name} is {f[name]!r}, target {want!r}")


def solve_path_bernoulli(targets: PathTargets) -> SolvedParams:
    """Probability distributions whose PSA realizes Möbius path targets."""
    mu = prefix_moebius(targets)
    n = targets.n
    for i in range(0, n - 1):
        if mu[i + 1] <= 0:
            raise InputError(f"targets are not Möbius: prefix value mu_{i} = {mu[i + 1]:.6g} <= 0")
    if abs(mu[-1]) > 1e-9:
        raise InputError(f"targets are not Möbius: mu_{n} = {mu[-1]:.6g} differs from 0")
    cls = _classify_path(targets)
    if cls is not None and cls.kind is not ValuationClass.MOEBIUS:
        raise InputError(f"targets are not Möbius: {cls.message}")
    rows, mu = _path_rows(targets, sub=False)
    try:
        params = SolvedParams(path_network(n + 1, targets.names), tuple(rows), {"prefix": tuple(mu)})
    except InputError as exc:
        raise InputError(f"targets are not Möbius: {exc}") from None
    _check_fit(params, targets)
    return params


def solve_path_sub_bernoulli(targets: PathTargets) -> SolvedParams:
    """Distributions, the last possibly sub-probability, for sub-Möbius path targets."""
    mu = prefix_moebius(targets)
    for i in range(0, targets.n + 1):
        if mu[i + 1] <= 0:
            raise InputError(f"targets are not sub-Möbius: prefix value mu_{i} = {mu[i + 1]:.6g} <= 0")
    cls = _classify_path(targets)
    if cls is not None and cls.kind is not ValuationClass.SUB_MOEBIUS:
        raise InputError(f"targets are not sub-Möbius: {cls.message}")
    rows, mu = _path_rows(targets, sub=True)
    params = SolvedParams(path_network(targets.n + 1, targets.names), tuple(rows), {"prefix": tuple(mu)})
    _check_fit(params, targets)
    return params


def reduce_network(network: AlphabetNetwork, a) -> AlphabetNetwork:
    """The network left after deleting letter ``a``.

    Alphabets that become empty disappear, and so do one-letter alphabets
    whose letter still belongs to another alphabet: they add no
    synchronization constraint.
    """
    name = network.names[network.monoid.letter_id(a)]
    alphas = [[n for n in network.alphabet_names(i) if n != name] for i in range(network.size)]
    alphas = [al for al in alphas if al]
    counts: dict[str, int] = {}
    for al in alphas:
        for n in al:
            counts[n] = counts.get(n, 0) + 1
    kept = [al for al in alphas if len(al) > 1 or counts[al[0]] == 1]
    if not kept:
        raise InputError(f"removing {name} leaves no letters")
    return AlphabetNetwork(kept, [n for n in network.names if n != name])


def _align(rows: Sequence[LocalDistribution], network: AlphabetNetwork) -> tuple[LocalDistribution, ...]:
    by_set = {frozenset(d.names): d for d in rows}
    out = []
    for i in range(network.size):
        d = by_set[frozenset(network.alphabet_names(i))]
        out.append(LocalDistribution({n: d[n] for n in network.alphabet_names(i)}))
    return tuple(out)


def solve_ring(network: AlphabetNetwork, targets: Valuation, removed=None) -> tuple[str, SolvedParams]:
    """Sub-probability parameters on the ring minus one letter.

    The returned distributions belong to ``reduce_network(network, removed)``
    and realize the restricted targets; pyramidal rejection on top of them
    rebuilds the full Möbius targets.  ``removed`` defaults to the first
    letter of the ring.
    """
    topo = detect_topology(network)
    if topo is None or topo.kind != "ring":
        raise UnsupportedTopology("not a ring network")
    n = len(topo.order)
    if n < 4:
        raise InputError("the ring solver needs at least four letters")
    if targets.monoid != network.monoid:
        raise InputError("targets must live on the ring monoid")
    cls = classify_detailed(network.monoid, targets)
    if cls.kind is not ValuationClass.MOEBIUS:
        raise InputError(f"ring targets are not Möbius: {cls.message}")
    start = 0 if removed is None else topo.order.index(network.monoid.letter_id(removed))
    path = [topo.order[(start + k) % n] for k in range(1, n)]
    names = [network.names[a] for a in path]
    sub = solve_path_sub_bernoulli(PathTargets(tuple(targets[x] for x in names), tuple(names)))
    removed_name = network.names[topo.order[start]]
    reduced = reduce_network(network, removed_name)
    params = SolvedParams(reduced, _align(sub.dists, reduced), dict(sub.meta, removed=removed_name))
    return removed_name, params


def solve_path(network: AlphabetNetwork, targets: Valuation) -> SolvedParams:
    """Bernoulli or sub-Bernoulli solution for a path network, by classification."""
    topo = detect_topology(network)
    if topo is None or topo.kind != "path":
        raise UnsupportedTopology("not a path network")
    names = tuple(network.names[a] for a in topo.order)
    pt = PathTargets(tuple(targets[x] for x in names), names)
    cls = classify_detailed(network.monoid, targets)
    if cls.kind is ValuationClass.MOEBIUS:
        solved = solve_path_bernoulli(pt)
    elif cls.kind is ValuationClass.SUB_MOEBIUS:
        solved = solve_path_sub_bernoulli(pt)
    else:
        raise InputError(f"targets are neither Möbius nor sub-Möbius: {cls.message}")
    return SolvedParams(network, _align(solved.dists, network), solved.meta)


def solve(network: AlphabetNetwork, targets: Valuation, removed=None) -> SolvedParams:
    topo = detect_topology(network)
    if topo is None:
        raise UnsupportedTopology("general topology unsolved: only path and ring networks are supported")
    if topo.kind == "path":
        return solve_path(network, targets)
    return solve_ring(network, targets, removed)[1]


def scale_small_values(network: AlphabetNetwork, t: Valuation, epsilon: float) -> SolvedParams:
    """Local weights ``(epsilon t(a)) ** (1 / |R(a)|)`` with valuation ``epsilon t``."""
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    dists = []
    for i in range(network.size):
        weights = {}
        for a in network.alphabets[i]:
            name = network.names[a]
            weights[name] = (epsilon * t[name]) ** (1.0 / len(network.resources[a]))
        total = math.fsum(weights.values())
        if total >= 1:
            raise InputError(f"epsilon = {epsilon} too large: alphabet {i + 1} weights sum to {total:.6g}")
        dists.append(LocalDistribution(weights))
    return SolvedParams(network, tuple(dists), {"epsilon": epsilon})


def uniform_targets(monoid: TraceMonoid) -> Valuation:
    return Valuation.uniform(monoid, smallest_root(monoid))
