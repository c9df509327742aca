"""Local Bernoulli sources and the probabilistic synchronization of a network."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from ._jit import kernel_context
from .errors import InputError, ResourceError
from .moebius import (
    ValuationClass,
    Valuation,
    classify_detailed,
    components,
    moebius_polynomial,
    smallest_root,
)
from .rng import RandomStream, derive_seed
from .sync import AlphabetNetwork, SyncState, SyncTag, WordVector, TaggedWord, _decide, has_synchronization_cycle
from .traces import Trace, TraceMonoid, normalize

SUM_TOL = 1e-12
DEFAULT_BUDGET = 10**6
DEFAULT_CHUNK = 64


class DistKind(enum.Enum):
    PROBABILITY = "prob"
    SUB = "sub"


class LocalDistribution:
    """Positive weights on one alphabet summing to at most one."""

    __slots__ = ("names", "probs", "kind")

    def __init__(self, weights: Mapping[str, float], kind: DistKind | str | None = None):
        if not weights:
            raise InputError("a local distribution needs at least one letter")
        self.names = tuple(str(n) for n in weights)
        self.probs = tuple(float(v) for v in weights.values())
        for n, v in zip(self.names, self.probs):
            if not (v > 0 and math.isfinite(v)):
                raise InputError(f"weight of {n} must be positive, got {v}")
        total = math.fsum(self.probs)
        if total > 1 + SUM_TOL:
            raise InputError(f"weights sum to {total!r} > 1")
        natural = DistKind.PROBABILITY if abs(total - 1) <= SUM_TOL else DistKind.SUB
        if kind is not None and DistKind(kind) is not natural:
            raise InputError(f"weights sum to {total!r}, inconsistent with kind {DistKind(kind).value}")
        self.kind = natural

    @property
    def total(self) -> float:
        return math.fsum(self.probs)

    @property
    def stop_mass(self) -> float:
        return 0.0 if self.kind is DistKind.PROBABILITY else 1.0 - self.total

    def __getitem__(self, name: str) -> float:
        try:
            return self.probs[self.names.index(name)]
        except ValueError:
            raise InputError(f"letter {name!r} not in distribution") from None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.probs))

    def cumulative(self) -> np.ndarray:
        return np.cumsum(np.array(self.probs, dtype=np.float64))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalDistribution):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __repr__(self) -> str:
        body = " ".join(f"{n}={p:.6g}" for n, p in zip(self.names, self.probs))
        return f"LocalDistribution({body} {self.kind.value})"


def check_dists(network: AlphabetNetwork, dists: Sequence[LocalDistribution]) -> None:
    if len(dists) != network.size:
        raise InputError(f"expected {network.size} distributions, got {len(dists)}")
    for i, d in enumerate(dists):
        if set(d.names) != set(network.alphabet_names(i)):
            raise InputError(
                f"distribution {i + 1} covers {sorted(d.names)}, alphabet is {sorted(network.alphabet_names(i))}"
            )


@dataclass(frozen=True)
class FlatNetwork:
    """Array form of a network and its distributions, as kernels consume it."""

    comp_ptr: np.ndarray
    comp_letters: np.ndarray
    comp_cum: np.ndarray
    comp_sub: np.ndarray
    res_ptr: np.ndarray
    res_list: np.ndarray
    lmap: np.ndarray

    def args(self) -> tuple:
        return (self.comp_ptr, self.comp_letters, self.comp_cum, self.comp_sub, self.res_ptr, self.res_list,
                self.lmap)


def flatten(network: AlphabetNetwork, dists: Sequence[LocalDistribution], target: TraceMonoid | None = None) -> FlatNetwork:
    """Kernel arrays; letters are written as ids of ``target`` (default: the network's monoid)."""
    check_dists(network, dists)
    comp_ptr = [0]
    letters: list[int] = []
    cum: list[float] = []
    for i, d in enumerate(dists):
        ids = [network.monoid.letter_id(n) for n in d.names]
        letters.extend(ids)
        cum.extend(d.cumulative().tolist())
        comp_ptr.append(len(letters))
    res_ptr = [0]
    res_list: list[int] = []
    for r in network.resources:
        res_list.extend(r)
        res_ptr.append(len(res_list))
    target = target or network.monoid
    lmap = [target.letter_id(n) for n in network.names]
    as_int = lambda xs: np.array(xs, dtype=np.int64)
    return FlatNetwork(
        as_int(comp_ptr),
        as_int(letters),
        np.array(cum, dtype=np.float64),
        np.array([d.kind is DistKind.SUB for d in dists], dtype=np.bool_),
        as_int(res_ptr),
        as_int(res_list),
        as_int(lmap),
    )


class PsaStatus(enum.Enum):
    TERMINATED = "Terminated"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass(frozen=True)
class PsaOutcome:
    trace: Trace
    status: PsaStatus
    tag: SyncTag | None
    word: tuple[int, ...]

    @property
    def terminated(self) -> bool:
        return self.status is PsaStatus.TERMINATED

    def __str__(self) -> str:
        if self.terminated:
            return f"Terminated({self.tag.value})"
        return "BudgetExhausted"


def finite_bernoulli_word(dist: LocalDistribution, rng: RandomStream, max_length: int = DEFAULT_BUDGET) -> list[str]:
    """Letters drawn i.i.d. until the stopping symbol."""
    if dist.kind is not DistKind.SUB:
        raise InputError("a probability distribution never draws its stopping symbol")
    cum = dist.cumulative()
    word: list[str] = []
    while True:
        u = rng.random()
        k = int(np.searchsorted(cum, u, side="right"))
        if k == len(cum):
            return word
        word.append(dist.names[k])
        if len(word) >= max_length:
            raise ResourceError(f"finite Bernoulli word exceeded {max_length} letters")


def bernoulli_lengths(dist: LocalDistribution, rng: RandomStream, runs: int, max_length: int = DEFAULT_BUDGET) -> np.ndarray:
    """Lengths of ``runs`` finite Bernoulli words, drawn as :func:`finite_bernoulli_word` would."""
    if dist.kind is not DistKind.SUB:
        raise InputError("a probability distribution never draws its stopping symbol")
    lengths = np.zeros(runs, dtype=np.int64)
    with kernel_context():
        bad = kernels.bernoulli_lengths(rng.state, runs, dist.cumulative(), max_length, lengths)
    if bad >= 0:
        raise ResourceError(f"finite Bernoulli word exceeded {max_length} letters")
    return lengths


class _LocalSource:
    """Chunked letters of one component, mirroring the kernel's draws."""

    def __init__(self, network: AlphabetNetwork, dist: LocalDistribution, seed: int, chunk: int):
        self.ids = [network.monoid.letter_id(n) for n in dist.names]
        self.cum = dist.cumulative()
        self.sub = dist.kind is DistKind.SUB
        self.stream = RandomStream(seed)
        self.chunk = chunk

    def draw(self) -> int | None:
        u = self.stream.random()
        for k, c in enumerate(self.cum):
            if u < c:
                return self.ids[k]
        return None if self.sub else self.ids[-1]

    def next_chunk(self) -> TaggedWord:
        letters = []
        for _ in range(self.chunk):
            a = self.draw()
            if a is None:
                return TaggedWord(tuple(letters), SyncTag.EOF)
            letters.append(a)
        return TaggedWord(tuple(letters), SyncTag.WFI)


def _outcome(monoid: TraceMonoid, word, status: int) -> PsaOutcome:
    word = tuple(int(a) for a in word)
    trace = normalize(monoid, word)
    if status == kernels.BUDGET:
        return PsaOutcome(trace, PsaStatus.BUDGET_EXHAUSTED, None, word)
    tag = SyncTag.DL if status == kernels.DL else SyncTag.EOF
    return PsaOutcome(trace, PsaStatus.TERMINATED, tag, word)


def psa_run(
    network: AlphabetNetwork,
    dists: Sequence[LocalDistribution],
    rng: RandomStream,
    budget: int = DEFAULT_BUDGET,
    chunk: int = DEFAULT_CHUNK,
    engine: str = "kernel",
) -> PsaOutcome:
    """One PSA run: synchronize independent local Bernoulli sequences.

    ``engine="reference"`` runs the interpreted driver on top of
    :class:`SyncState`, feeding ``chunk`` letters per component whenever a
    buffer runs dry; the kernel is its compiled twin.  Both consume the
    same random streams and agree piece for piece.
    """
    if budget <= 0:
        raise InputError("budget must be positive")
    if chunk <= 0:
        raise InputError("chunk size must be positive")
    if engine == "kernel":
        flat = flatten(network, dists)
        out = np.empty(budget + 1, dtype=np.int64)
        with kernel_context():
            n, status = kernels.psa_single(rng.state, *flat.args(), out, budget)
        return _outcome(network.monoid, out[:n], status)
    if engine != "reference":
        raise InputError(f"unknown engine {engine!r}")
    check_dists(network, dists)
    master = rng.next_u64()
    sources = [_LocalSource(network, d, derive_seed(master, i), chunk) for i, d in enumerate(dists)]
    state = SyncState(network)
    empty, closed = TaggedWord(), TaggedWord((), SyncTag.EOF)
    while True:
        # keep one letter ahead on every open component
        need = [state.buffered(i) == 0 and not state.is_closed(i) for i in range(network.size)]
        if any(need):
            parts = (s.next_chunk() if n else closed if state.is_closed(i) else empty
                     for i, (s, n) in enumerate(zip(sources, need)))
            state.append(WordVector(tuple(parts)))
        if state.length >= budget:
            m = _decide(network, state.heads(), [state.is_closed(i) for i in range(network.size)])
            status = kernels.BUDGET if not isinstance(m, SyncTag) else m
            break
        m = state.step()
        if isinstance(m, SyncTag):
            status = m
            break
    code = {SyncTag.DL: kernels.DL, SyncTag.EOF: kernels.EOF}.get(status, status)
    return _outcome(network.monoid, state.word, code)


def psa_batch(network: AlphabetNetwork, dists: Sequence[LocalDistribution], rng: RandomStream, runs: int,
              budget: int = DEFAULT_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """Output lengths and kernel status codes of ``runs`` PSA runs."""
    flat = flatten(network, dists)
    lengths = np.zeros(runs, dtype=np.int64)
    statuses = np.zeros(runs, dtype=np.int64)
    with kernel_context():
        kernels.psa_batch(rng.state, runs, *flat.args(), budget, lengths, statuses)
    return lengths, statuses


def psa_valuation(network: AlphabetNetwork, dists: Sequence[LocalDistribution]) -> Valuation:
    """Letter weights ``f(a) = prod over i in R(a) of p_i(a)``."""
    check_dists(network, dists)
    weights = {}
    for a, name in enumerate(network.names):
        weights[name] = math.prod(dists[i][name] for i in network.resources[a])
    return Valuation(network.monoid, weights)


class PsaClass(enum.Enum):
    FINITE = "Finite"
    INFINITE = "Infinite"


def split_network(network: AlphabetNetwork, dists: Sequence[LocalDistribution] | None = None):
    """Irreducible parts of a network, each with its distributions."""
    parts = []
    for comp in components(network.monoid):
        names = [network.names[a] for a in comp]
        keep = [i for i, alpha in enumerate(network.alphabets) if alpha[0] in comp]
        sub = AlphabetNetwork([network.alphabet_names(i) for i in keep], names)
        parts.append((sub, None if dists is None else [dists[i] for i in keep]))
    return parts


def structural_class(network: AlphabetNetwork) -> PsaClass:
    """Finite/infinite by network shape alone, for probability distributions."""
    infinite = any(not has_synchronization_cycle(sub) for sub, _ in split_network(network))
    return PsaClass.INFINITE if infinite else PsaClass.FINITE


def classify_psa(network: AlphabetNetwork, dists: Sequence[LocalDistribution]) -> PsaClass:
    """Infinite iff some irreducible part has a Möbius output valuation.

    When every distribution is a probability, the answer is checked
    against the network-shape criterion.
    """
    infinite = False
    for sub, sub_dists in split_network(network, dists):
        cls = classify_detailed(sub.monoid, psa_valuation(sub, sub_dists))
        if cls.kind is ValuationClass.NEITHER:
            raise AssertionError(f"PSA valuation classifies Neither: {cls.message}")
        part_infinite = cls.kind is ValuationClass.MOEBIUS
        if all(d.kind is DistKind.PROBABILITY for d in sub_dists):
            shape = not has_synchronization_cycle(sub)
            if shape != part_infinite:
                raise AssertionError(f"valuation and shape criteria disagree on {sub!r}")
        infinite |= part_infinite
    return PsaClass.INFINITE if infinite else PsaClass.FINITE


def expected_length_uniform(monoid: TraceMonoid, p: float) -> float:
    """Mean length ``-p mu'(p) / mu(p)`` of the output under a uniform sub-Möbius valuation."""
    p0 = smallest_root(monoid)
    if not 0 < p < p0:
        raise InputError(f"p = {p} must lie in (0, {p0:.12g})")
    mu = moebius_polynomial(monoid)
    return -p * mu.derivative()(p) / mu(p)
