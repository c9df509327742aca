"""Trace monoids, Cartier-Foata normal forms and heap queries.

Letters are small integers ``0..n-1``; names are only for display and
parsing.  A :class:`Trace` is its Cartier-Foata normal form, a tuple of
nonempty cliques stored as sorted tuples, so structural equality is trace
equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InputError, ResourceError

DEFAULT_WORK_BUDGET = 10**7


class Letter(NamedTuple):
    id: int
    name: str


class TraceMonoid:
    """The monoid ``M(Sigma, I)`` on letters ``0..n-1``.

    ``independence`` holds unordered pairs, given as letter ids or names.
    """

    def __init__(self, names: Sequence[str], independence: Iterable[Sequence] = ()):
        names = tuple(str(n) for n in names)
        if len(set(names)) != len(names):
            raise InputError(f"duplicate letter names in {names!r}")
        for n in names:
            if not n or any(ch.isspace() for ch in n) or n in ("%", "|"):
                raise InputError(f"invalid letter name {n!r}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}
        size = len(names)
        pairs = set()
        for pair in independence:
            a, b = (self.letter_id(p) for p in pair)
            if a == b:
                raise InputError(f"independence must be irreflexive: {names[a]!r}")
            pairs.add(frozenset((a, b)))
        self.independence = frozenset(pairs)
        dep = np.ones((size, size), dtype=np.bool_)
        for pair in pairs:
            a, b = tuple(pair)
            dep[a, b] = dep[b, a] = False
        dep.setflags(write=False)
        self.dep = dep
        self.dependents = tuple(tuple(int(b) for b in np.flatnonzero(dep[a])) for a in range(size))
        self.parallel = tuple(frozenset(int(b) for b in np.flatnonzero(~dep[a])) for a in range(size))

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def letters(self) -> tuple[Letter, ...]:
        return tuple(Letter(i, n) for i, n in enumerate(self.names))

    def letter_id(self, letter) -> int:
        if isinstance(letter, Letter):
            letter = letter.id
        if isinstance(letter, str):
            try:
                return self._index[letter]
            except KeyError:
                raise InputError(f"unknown letter {letter!r}") from None
        if isinstance(letter, (int, np.integer)) and 0 <= letter < self.size:
            return int(letter)
        raise InputError(f"unknown letter {letter!r}")

    def independent(self, a: int, b: int) -> bool:
        return not self.dep[a, b]

    def restrict(self, keep: Iterable) -> "TraceMonoid":
        """The submonoid generated by ``keep``, letters renumbered in order."""
        ids = sorted({self.letter_id(x) for x in keep})
        pairs = [
            (self.names[a], self.names[b]) for a, b in combinations(ids, 2) if not self.dep[a, b]
        ]
        return TraceMonoid([self.names[i] for i in ids], pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TraceMonoid):
            return NotImplemented
        return self.names == other.names and self.independence == other.independence

    def __hash__(self) -> int:
        return hash((self.names, self.independence))

    def __repr__(self) -> str:
        pairs = sorted(tuple(sorted(p)) for p in self.independence)
        rel = ", ".join(f"{self.names[a]}{self.names[b]}={self.names[b]}{self.names[a]}" for a, b in pairs)
        return f"<{' '.join(self.names)} | {rel}>"


@dataclass(frozen=True)
class Trace:
    """A trace as its sequence of Cartier-Foata cliques."""

    cliques: tuple[tuple[int, ...], ...] = ()

    def __len__(self) -> int:
        return sum(len(c) for c in self.cliques)

    def __bool__(self) -> bool:
        return bool(self.cliques)

    @property
    def height(self) -> int:
        return len(self.cliques)

    def count(self, a: int) -> int:
        return sum(1 for c in self.cliques if a in c)

    def word(self) -> tuple[int, ...]:
        """A representative word, cliques in order and letters sorted."""
        return tuple(a for c in self.cliques for a in c)

    def format(self, monoid: TraceMonoid, sep: str = "·") -> str:
        if not self.cliques:
            return "e"
        return sep.join("{" + ",".join(monoid.names[a] for a in c) + "}" for c in self.cliques)


EMPTY = Trace()


def _validate_word(monoid: TraceMonoid, word) -> list[int]:
    return [monoid.letter_id(a) for a in word]


def _push(monoid: TraceMonoid, levels: list[list[int]], height: list[int], word) -> None:
    dependents = monoid.dependents
    for a in word:
        lvl = max(height[b] for b in dependents[a]) + 1
        if lvl == len(levels):
            levels.append([a])
        else:
            levels[lvl].append(a)
        height[a] = lvl


def _freeze(levels: list[list[int]]) -> Trace:
    return Trace(tuple(tuple(sorted(c)) for c in levels))


def _heights(monoid: TraceMonoid, x: Trace) -> tuple[list[list[int]], list[int]]:
    height = [-1] * monoid.size
    levels = []
    for k, c in enumerate(x.cliques):
        levels.append(list(c))
        for a in c:
            height[a] = k
    return levels, height


class TraceBuilder:
    """Grows a normal form one letter at a time."""

    __slots__ = ("monoid", "levels", "height", "length")

    def __init__(self, monoid: TraceMonoid, start: Trace = EMPTY):
        self.monoid = monoid
        self.levels, self.height = _heights(monoid, start)
        self.length = len(start)

    def push(self, a: int) -> None:
        _push(self.monoid, self.levels, self.height, (a,))
        self.length += 1

    def extend(self, word) -> None:
        letters = _validate_word(self.monoid, word)
        _push(self.monoid, self.levels, self.height, letters)
        self.length += len(letters)

    def freeze(self) -> Trace:
        return _freeze(self.levels)


def normalize(monoid: TraceMonoid, word) -> Trace:
    """Cartier-Foata normal form of the trace represented by ``word``.

    Each letter lands one level above the highest dependent letter placed
    so far, which is the lowest level it can occupy.
    """
    letters = _validate_word(monoid, word)
    levels: list[list[int]] = []
    _push(monoid, levels, [-1] * monoid.size, letters)
    return _freeze(levels)


def is_normal_form(monoid: TraceMonoid, x: Trace) -> bool:
    """Whether ``x.cliques`` is a valid Cartier-Foata sequence for ``monoid``."""
    for c in x.cliques:
        if not c or list(c) != sorted(set(c)):
            return False
        if any(a < 0 or a >= monoid.size for a in c):
            return False
        if any(monoid.dep[a, b] for a, b in combinations(c, 2)):
            return False
    for lower, upper in zip(x.cliques, x.cliques[1:]):
        for b in upper:
            if not any(monoid.dep[a, b] for a in lower):
                return False
    return True


def check_trace(monoid: TraceMonoid, x: Trace) -> Trace:
    if not isinstance(x, Trace) or not is_normal_form(monoid, x):
        raise InputError(f"not a normal-form trace of {monoid!r}: {x!r}")
    return x


def concat(monoid: TraceMonoid, x: Trace, y: Trace) -> Trace:
    check_trace(monoid, x)
    check_trace(monoid, y)
    if not y:
        return x
    levels, height = _heights(monoid, x)
    _push(monoid, levels, height, y.word())
    return _freeze(levels)


def append_letters(monoid: TraceMonoid, x: Trace, word) -> Trace:
    """``x`` times the trace of ``word``, without re-validating ``x``."""
    levels, height = _heights(monoid, x)
    _push(monoid, levels, height, _validate_word(monoid, word))
    return _freeze(levels)


def left_divides(monoid: TraceMonoid, x: Trace, y: Trace) -> Trace | None:
    """The unique ``z`` with ``x·z = y``, or ``None`` when ``x`` is not a prefix of ``y``."""
    check_trace(monoid, x)
    check_trace(monoid, y)
    rest = list(y.word())
    dep = monoid.dep
    for a in x.word():
        for k, b in enumerate(rest):
            if b == a:
                del rest[k]
                break
            if dep[a, b]:
                return None
        else:
            return None
    return normalize(monoid, rest)


def maximal_pieces(monoid: TraceMonoid, x: Trace) -> set[tuple[int, int]]:
    """Occurrences ``(clique index, letter)`` with no later dependent occurrence."""
    check_trace(monoid, x)
    blocked = np.zeros(monoid.size, dtype=np.bool_)
    found = set()
    for k in range(len(x.cliques) - 1, -1, -1):
        clique = x.cliques[k]
        for a in clique:
            if not blocked[a]:
                found.add((k, a))
        for a in clique:
            blocked |= monoid.dep[a]
    return found


def is_pyramidal(monoid: TraceMonoid, x: Trace) -> bool:
    if not x:
        raise InputError("pyramidality is undefined for the empty trace")
    return len(maximal_pieces(monoid, x)) == 1


def in_hitting_set(monoid: TraceMonoid, x: Trace, a) -> bool:
    """Membership of ``x`` in the set of pyramids topped by their only ``a``."""
    a = monoid.letter_id(a)
    check_trace(monoid, x)
    if not x or x.count(a) != 1:
        return False
    return maximal_pieces(monoid, x) == {(x.height - 1, a)}


def remove_top(monoid: TraceMonoid, v: Trace, a) -> Trace:
    a = monoid.letter_id(a)
    if not in_hitting_set(monoid, v, a):
        raise InputError(f"{v.format(monoid)} is not a pyramid topped by {monoid.names[a]}")
    # the unique maximal piece sits alone in the last clique
    return Trace(v.cliques[:-1])


def enumerate_traces(monoid: TraceMonoid, n: int, budget: int = DEFAULT_WORK_BUDGET) -> list[Trace]:
    """All traces of length at most ``n``, shortest first.

    Length ``k + 1`` traces are the normal forms of ``x·b`` over length-``k``
    traces ``x`` and letters ``b``; deduplication is by normal form.  Each
    such extension counts as one unit of work against ``budget``.
    """
    if n < 0:
        raise InputError("length bound must be nonnegative")
    out = [EMPTY]
    layer = [EMPTY]
    work = 0
    for _ in range(n):
        work += len(layer) * monoid.size
        if work > budget:
            raise ResourceError(f"trace enumeration exceeds work budget {budget}")
        seen: dict[Trace, None] = {}
        for x in layer:
            levels, height = _heights(monoid, x)
            for b in range(monoid.size):
                lv = [list(c) for c in levels]
                _push(monoid, lv, list(height), (b,))
                seen.setdefault(_freeze(lv))
        layer = sorted(seen, key=lambda t: t.cliques)
        out.extend(layer)
    return out


def enumerate_cliques(monoid: TraceMonoid, budget: int = DEFAULT_WORK_BUDGET) -> list[tuple[int, ...]]:
    """Every clique of the monoid, the empty one first, each exactly once."""
    out: list[tuple[int, ...]] = []
    size = monoid.size
    parallel = monoid.parallel

    def grow(clique: tuple[int, ...], candidates: list[int]) -> None:
        out.append(clique)
        if len(out) > budget:
            raise ResourceError(f"clique enumeration exceeds work budget {budget}")
        for k, b in enumerate(candidates):
            grow(clique + (b,), [c for c in candidates[k + 1 :] if c in parallel[b]])

    grow((), list(range(size)))
    out.sort(key=lambda c: (len(c), c))
    return out


def clique_trace(clique: Iterable[int]) -> Trace:
    c = tuple(sorted(clique))
    return Trace((c,)) if c else EMPTY
