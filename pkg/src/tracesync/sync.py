"""Networks of alphabets and the synchronization of local sequences.

A network ``(Sigma_1, ..., Sigma_N)`` yields the trace monoid where two
letters commute iff they share no alphabet.  A vector of local words is
synchronized into the largest trace whose projections are prefixes of
the words, one minimal piece at a time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import InputError, StateError
from .traces import Trace, TraceBuilder, TraceMonoid


class SyncTag(enum.Enum):
    DL = "DL"
    WFI = "WFI"
    EOF = "EOF"


class AlphabetNetwork:
    """Local alphabets over a shared letter set.

    ``letters`` fixes the letter order; by default letters are numbered by
    first appearance.
    """

    def __init__(self, alphabets: Sequence[Sequence[str]], letters: Sequence[str] | None = None):
        if not alphabets:
            raise InputError("a network needs at least one alphabet")
        seen: dict[str, None] = {}
        for k, alpha in enumerate(alphabets, 1):
            if not alpha:
                raise InputError(f"alphabet {k} is empty")
            for name in alpha:
                seen.setdefault(str(name))
        if letters is None:
            letters = list(seen)
        else:
            letters = [str(n) for n in letters]
            unused = [n for n in letters if n not in seen]
            undeclared = [n for n in seen if n not in letters]
            if unused or undeclared:
                raise InputError(f"letters not matching alphabets: unused {unused}, undeclared {undeclared}")
        index = {n: i for i, n in enumerate(letters)}
        self.alphabets = tuple(tuple(dict.fromkeys(index[str(n)] for n in alpha)) for alpha in alphabets)
        res: list[list[int]] = [[] for _ in letters]
        for i, alpha in enumerate(self.alphabets):
            for a in alpha:
                res[a].append(i)
        self.resources = tuple(tuple(r) for r in res)
        pairs = [
            (a, b)
            for a, b in combinations(range(len(letters)), 2)
            if not set(self.resources[a]) & set(self.resources[b])
        ]
        self.monoid = TraceMonoid(letters, pairs)

    @property
    def size(self) -> int:
        return len(self.alphabets)

    @property
    def names(self) -> tuple[str, ...]:
        return self.monoid.names

    def alphabet_names(self, i: int) -> tuple[str, ...]:
        return tuple(self.names[a] for a in self.alphabets[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlphabetNetwork):
            return NotImplemented
        return self.names == other.names and self.alphabets == other.alphabets

    def __hash__(self) -> int:
        return hash((self.names, self.alphabets))

    def __repr__(self) -> str:
        body = " ".join("{" + ",".join(self.alphabet_names(i)) + "}" for i in range(self.size))
        return f"AlphabetNetwork({body})"


def build_monoid(network: AlphabetNetwork) -> TraceMonoid:
    return network.monoid


def has_synchronization_cycle(network: AlphabetNetwork) -> bool:
    """Whether the alphabet/letter incidence graph contains a cycle.

    Two alphabets sharing two letters, or a loop of alphabets chained by
    common letters, both show up here.  Letters private to one alphabet
    are leaves and never matter.
    """
    parent = list(range(network.size + len(network.names)))

    def find(u: int) -> int:
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for i, alpha in enumerate(network.alphabets):
        for a in alpha:
            ru, rv = find(i), find(network.size + a)
            if ru == rv:
                return True
            parent[ru] = rv
    return False


@dataclass(frozen=True)
class TaggedWord:
    letters: tuple[int, ...] = ()
    tag: SyncTag = SyncTag.WFI


@dataclass(frozen=True)
class WordVector:
    components: tuple[TaggedWord, ...]

    @classmethod
    def from_names(cls, network: AlphabetNetwork, words, tags=None) -> "WordVector":
        """Build from per-component letter-name sequences (strings are split on spaces)."""
        if tags is None:
            tags = [SyncTag.WFI] * len(words)
        comps = []
        for w, t in zip(words, tags, strict=True):
            if isinstance(w, str):
                w = w.split()
            comps.append(TaggedWord(tuple(network.monoid.letter_id(n) for n in w), SyncTag(t)))
        return cls(tuple(comps))

    @classmethod
    def empty(cls, network: AlphabetNetwork, tag: SyncTag = SyncTag.WFI) -> "WordVector":
        return cls(tuple(TaggedWord((), tag) for _ in range(network.size)))

    def __len__(self) -> int:
        return sum(len(c.letters) for c in self.components)


def check_vector(network: AlphabetNetwork, vector: WordVector) -> WordVector:
    if len(vector.components) != network.size:
        raise InputError(f"expected {network.size} components, got {len(vector.components)}")
    for i, comp in enumerate(vector.components):
        if comp.tag not in (SyncTag.WFI, SyncTag.EOF):
            raise InputError(f"component {i + 1}: tag must be WFI or EOF, got {comp.tag}")
        alpha = set(network.alphabets[i])
        for a in comp.letters:
            if a not in alpha:
                name = network.names[a] if 0 <= a < len(network.names) else a
                raise InputError(f"component {i + 1}: letter {name} is not in its alphabet")
    return vector


def _decide(network: AlphabetNetwork, heads: Sequence[int | None], closed: Sequence[bool]):
    """Minimal piece with the smallest id, else the reason there is none.

    ``heads[i]`` is the first buffered letter of component ``i`` or None;
    ``closed[i]`` says that component has seen EOF.
    """
    if all(h is None and c for h, c in zip(heads, closed)):
        return SyncTag.EOF
    resources = network.resources
    best = None
    for h in heads:
        if h is not None and (best is None or h < best):
            if all(heads[j] == h for j in resources[h]):
                best = h
    if best is not None:
        return best
    # some letter becomes minimal if the empty open components receive it
    for a, res in enumerate(resources):
        if all(heads[j] == a or (heads[j] is None and not closed[j]) for j in res):
            return SyncTag.WFI
    return SyncTag.DL


def min_piece(network: AlphabetNetwork, vector: WordVector):
    """A minimal piece of the synchronization trace, or a tag explaining its absence."""
    check_vector(network, vector)
    heads = [c.letters[0] if c.letters else None for c in vector.components]
    closed = [c.tag is SyncTag.EOF for c in vector.components]
    return _decide(network, heads, closed)


class SyncState:
    """Incremental synchronization over growing per-component buffers."""

    _COMPACT_AT = 4096

    def __init__(self, network: AlphabetNetwork):
        self.network = network
        self._buffers: list[list[int]] = [[] for _ in range(network.size)]
        self._cursor = [0] * network.size
        self._closed = [False] * network.size
        self._builder = TraceBuilder(network.monoid)
        self._word: list[int] = []
        self.tag = SyncTag.WFI

    @property
    def trace(self) -> Trace:
        return self._builder.freeze()

    @property
    def word(self) -> tuple[int, ...]:
        """The order in which pieces were synchronized."""
        return tuple(self._word)

    @property
    def length(self) -> int:
        return len(self._word)

    @property
    def terminal(self) -> bool:
        return self.tag in (SyncTag.DL, SyncTag.EOF)

    @property
    def residual(self) -> WordVector:
        return WordVector(
            tuple(
                TaggedWord(tuple(buf[cur:]), SyncTag.EOF if closed else SyncTag.WFI)
                for buf, cur, closed in zip(self._buffers, self._cursor, self._closed)
            )
        )

    def heads(self) -> list[int | None]:
        return [buf[cur] if cur < len(buf) else None for buf, cur in zip(self._buffers, self._cursor)]

    def buffered(self, i: int) -> int:
        return len(self._buffers[i]) - self._cursor[i]

    def is_closed(self, i: int) -> bool:
        return self._closed[i]

    def append(self, vector: WordVector) -> None:
        """Add input without synchronizing."""
        if self.terminal:
            raise StateError(f"synchronization already ended with {self.tag.value}")
        check_vector(self.network, vector)
        for i, comp in enumerate(vector.components):
            if self._closed[i] and (comp.letters or comp.tag is not SyncTag.EOF):
                raise InputError(f"component {i + 1} received input after EOF")
        for i, comp in enumerate(vector.components):
            self._buffers[i].extend(comp.letters)
            if comp.tag is SyncTag.EOF:
                self._closed[i] = True

    def step(self):
        """Consume one minimal piece; return it, or the blocking tag."""
        m = _decide(self.network, self.heads(), self._closed)
        if isinstance(m, SyncTag):
            self.tag = m
            return m
        for j in self.network.resources[m]:
            self._cursor[j] += 1
            cur = self._cursor[j]
            if cur >= self._COMPACT_AT and 2 * cur >= len(self._buffers[j]):
                del self._buffers[j][:cur]
                self._cursor[j] = 0
        self._builder.push(m)
        self._word.append(m)
        return m

    def run(self, limit: int | None = None) -> SyncTag | None:
        """Step until blocked, or until ``limit`` pieces are synchronized (returns None)."""
        while limit is None or len(self._word) < limit:
            m = self.step()
            if isinstance(m, SyncTag):
                return m
        return None

    def feed(self, chunk: WordVector) -> "SyncState":
        self.append(chunk)
        self.run()
        return self


def synchronize(network: AlphabetNetwork, vector: WordVector) -> tuple[Trace, SyncTag]:
    state = SyncState(network).feed(vector)
    return state.trace, state.tag


def stream_synchronize(state: SyncState, chunk: WordVector) -> SyncState:
    return state.feed(chunk)
