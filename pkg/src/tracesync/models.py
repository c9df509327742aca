"""Standard networks and monoids: paths, rings, free monoids."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .sync import AlphabetNetwork
from .traces import TraceMonoid


def letter_names(n: int, prefix: str = "a") -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


def path_network(n_letters: int, names=None) -> AlphabetNetwork:
    """Alphabets ``{a_{i-1}, a_i}``; a single letter gets the alphabet ``{a0}``."""
    if n_letters < 1:
        raise InputError("a path needs at least one letter")
    names = list(names) if names is not None else letter_names(n_letters)
    if n_letters == 1:
        return AlphabetNetwork([[names[0]]], names)
    return AlphabetNetwork([[names[i - 1], names[i]] for i in range(1, n_letters)], names)


def ring_network(n: int, names=None) -> AlphabetNetwork:
    """Alphabets ``{a_0,a_1}, ..., {a_{n-1}, a_0}``."""
    if n < 3:
        raise InputError("a ring needs at least three letters")
    names = list(names) if names is not None else letter_names(n)
    return AlphabetNetwork([[names[i], names[(i + 1) % n]] for i in range(n)], names)


def star_network(leaves: int) -> AlphabetNetwork:
    names = ["c"] + letter_names(leaves, "l")
    return AlphabetNetwork([["c", leaf] for leaf in names[1:]], names)


def free_monoid(n: int) -> TraceMonoid:
    return TraceMonoid(letter_names(n))


def free_commutative(n: int) -> TraceMonoid:
    names = letter_names(n)
    return TraceMonoid(names, [(a, b) for i, a in enumerate(names) for b in names[i + 1 :]])


def figure_monoid() -> TraceMonoid:
    """``<a, b, c, d | ac = ca, ad = da, bd = db>``."""
    return TraceMonoid("abcd", [("a", "c"), ("a", "d"), ("b", "d")])


@dataclass(frozen=True)
class Topology:
    kind: str
    order: tuple[int, ...]
    """Letter ids along the path or around the ring."""
    alphabets: tuple[int, ...]
    """Alphabet index joining ``order[k]`` and ``order[k + 1]`` (cyclically for rings)."""


def detect_topology(network: AlphabetNetwork) -> Topology | None:
    """Recognize path and ring networks; anything else gives None."""
    n_let = len(network.names)
    alphas = network.alphabets
    if n_let == 1 and len(alphas) == 1:
        return Topology("path", (0,), ())
    if any(len(al) != 2 for al in alphas):
        return None
    edges = {}
    adj: list[list[int]] = [[] for _ in range(n_let)]
    for i, (u, v) in enumerate(alphas):
        key = frozenset((u, v))
        if key in edges:
            return None
        edges[key] = i
        adj[u].append(v)
        adj[v].append(u)
    degrees = [len(x) for x in adj]
    if max(degrees) > 2:
        return None
    if len(alphas) == n_let - 1:
        ends = [a for a in range(n_let) if degrees[a] == 1]
        if len(ends) != 2:
            return None
        kind, start = "path", min(ends)
    elif len(alphas) == n_let and all(d == 2 for d in degrees):
        kind, start = "ring", 0
    else:
        return None
    order = [start]
    prev = -1
    while len(order) < n_let:
        cur = order[-1]
        nxt = sorted(b for b in adj[cur] if b != prev)
        if not nxt or nxt[0] in order:
            return None
        prev = cur
        order.append(nxt[0])
    if kind == "ring" and order[0] not in adj[order[-1]]:
        return None
    k = len(order) if kind == "ring" else len(order) - 1
    joins = tuple(edges[frozenset((order[i], order[(i + 1) % n_let]))] for i in range(k))
    return Topology(kind, tuple(order), joins)
