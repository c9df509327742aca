"""Random walks of pyramidal increments.

Deleting a letter ``a`` from an irreducible network leaves a network whose
PSA terminates.  Stacking ``a`` on its output and keeping only pyramids
topped by ``a`` samples the first hitting time of ``a``; concatenating
independent such pyramids grows an unbounded random trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from ._jit import kernel_context
from .errors import InputError, ResourceError
from .moebius import Valuation, extend_valuation, is_irreducible
from .rng import RandomStream
from .sampler import (
    FlatNetwork,
    LocalDistribution,
    PsaClass,
    check_dists,
    classify_psa,
    flatten,
    psa_run,
    psa_valuation,
)
from .solver import reduce_network
from .sync import AlphabetNetwork
from .traces import EMPTY, Trace, TraceMonoid, append_letters, check_trace, in_hitting_set, normalize

DEFAULT_MAX_REJECTS = 10**6
INCREMENT_RESERVE = 1 << 16


@dataclass(frozen=True)
class PfsaConfig:
    network: AlphabetNetwork
    letter: str
    dists: tuple[LocalDistribution, ...]
    seed: int = 0
    max_rejects: int = DEFAULT_MAX_REJECTS

    def __post_init__(self):
        monoid = self.network.monoid
        name = monoid.names[monoid.letter_id(self.letter)]
        object.__setattr__(self, "letter", name)
        object.__setattr__(self, "dists", tuple(self.dists))
        if not is_irreducible(monoid):
            raise InputError("the network monoid must be irreducible")
        if self.max_rejects < 0:
            raise InputError("rejection budget must be nonnegative")
        reduced = self.reduced
        check_dists(reduced, self.dists)
        if classify_psa(reduced, self.dists) is not PsaClass.FINITE:
            raise InputError(f"the PSA on the network without {name} must terminate")

    @property
    def monoid(self) -> TraceMonoid:
        return self.network.monoid

    @property
    def letter_id(self) -> int:
        return self.monoid.letter_id(self.letter)

    @property
    def reduced(self) -> AlphabetNetwork:
        return reduce_network(self.network, self.letter)

    def target_valuation(self) -> Valuation:
        """The Möbius valuation of the walk's limit measure."""
        return extend_valuation(self.monoid, self.letter, psa_valuation(self.reduced, self.dists))

    def flat(self) -> FlatNetwork:
        return flatten(self.reduced, self.dists, target=self.monoid)


@dataclass(frozen=True)
class WalkState:
    monoid: TraceMonoid
    word: np.ndarray
    increment_ends: np.ndarray
    increment_rejects: np.ndarray

    @property
    def trace(self) -> Trace:
        return normalize(self.monoid, self.word.tolist())

    @property
    def length(self) -> int:
        return int(self.word.shape[0])

    def prefix(self, n: int) -> Trace:
        """The trace of the first ``n`` generated letters, a prefix of :attr:`trace`."""
        return normalize(self.monoid, self.word[:n].tolist())

    @property
    def iterations(self) -> int:
        return int(self.increment_ends.shape[0])

    @property
    def rejections(self) -> int:
        return int(self.increment_rejects.sum())

    def increment_words(self) -> list[tuple[int, ...]]:
        bounds = [0] + self.increment_ends.tolist()
        w = self.word.tolist()
        return [tuple(w[s:e]) for s, e in zip(bounds, bounds[1:])]

    def increments(self) -> list[Trace]:
        cache: dict[tuple, Trace] = {}
        out = []
        for w in self.increment_words():
            t = cache.get(w)
            if t is None:
                t = cache[w] = normalize(self.monoid, w)
            out.append(t)
        return out


def dependence_array(monoid: TraceMonoid) -> np.ndarray:
    return np.ascontiguousarray(monoid.dep, dtype=np.bool_)


def run_walk(
    monoid: TraceMonoid,
    flat: FlatNetwork,
    letter: int,
    rng: RandomStream,
    target_length: int,
    target_increments: int,
    max_rejects: int = DEFAULT_MAX_REJECTS,
) -> WalkState:
    """Drive the walk kernel, growing its buffers as needed.

    ``letter < 0`` concatenates raw PSA outputs without rejection.
    """
    if target_length < 0 or target_increments < 0:
        raise InputError("targets must be nonnegative")
    dep = dependence_array(monoid)
    guess = min(target_length, 10**7) if target_length < 2**62 else 1024
    out = np.empty(guess + 2 * INCREMENT_RESERVE, dtype=np.int64)
    n_inc_guess = max(16, min(target_increments, guess + 16))
    ends = np.empty(n_inc_guess, dtype=np.int64)
    rejects = np.empty(n_inc_guess, dtype=np.int64)
    total = n_inc = 0
    while True:
        with kernel_context():
            total, n_inc, status = kernels.walk(
                rng.state, *flat.args(), letter, dep, out, total, ends, rejects, n_inc,
                target_length, target_increments, INCREMENT_RESERVE, max_rejects,
            )
        if status == kernels.WALK_DONE:
            break
        if status == kernels.WALK_FULL:
            if out.shape[0] - total < INCREMENT_RESERVE:
                out = np.concatenate([out, np.empty(out.shape[0], dtype=np.int64)])
            if n_inc >= ends.shape[0]:
                ends = np.concatenate([ends, np.empty(ends.shape[0], dtype=np.int64)])
                rejects = np.concatenate([rejects, np.empty(rejects.shape[0], dtype=np.int64)])
            continue
        if status == kernels.WALK_REJECTED:
            err = ResourceError(
                f"increment {n_inc + 1} exceeded {max_rejects} rejections "
                f"after {n_inc} accepted increments"
            )
        else:
            err = ResourceError(f"a single increment exceeded {INCREMENT_RESERVE} pieces")
        # the accepted increments stay available to the caller
        err.partial = WalkState(monoid, out[:total].copy(), ends[:n_inc].copy(), rejects[:n_inc].copy())
        raise err
    return WalkState(monoid, out[:total].copy(), ends[:n_inc].copy(), rejects[:n_inc].copy())


def pfsa_generate(config: PfsaConfig, rng: RandomStream, target_length: int) -> WalkState:
    """Concatenate accepted pyramids until the trace has ``target_length`` pieces."""
    return run_walk(config.monoid, config.flat(), config.letter_id, rng, target_length, 2**62, config.max_rejects)


def sample_increments(config: PfsaConfig, rng: RandomStream, count: int) -> WalkState:
    return run_walk(config.monoid, config.flat(), config.letter_id, rng, 2**62, count, config.max_rejects)


def sample_pyramidal(config: PfsaConfig, rng: RandomStream) -> Trace:
    """One pyramid topped by the distinguished letter, by rejection."""
    return sample_increments(config, rng, 1).increments()[0]


def sample_pyramidal_reference(config: PfsaConfig, rng: RandomStream) -> tuple[Trace, int]:
    """Interpreted twin of :func:`sample_pyramidal`; also returns the rejection count."""
    monoid, a = config.monoid, config.letter_id
    reduced = config.reduced
    rejects = 0
    while True:
        out = psa_run(reduced, config.dists, rng, budget=INCREMENT_RESERVE, engine="reference")
        if not out.terminated:
            raise ResourceError(f"a single increment exceeded {INCREMENT_RESERVE} pieces")
        word = [monoid.letter_id(reduced.names[b]) for b in out.word]
        v = append_letters(monoid, EMPTY, word + [a])
        if in_hitting_set(monoid, v, a):
            return v, rejects
        rejects += 1
        if rejects > config.max_rejects:
            raise ResourceError(f"exceeded {config.max_rejects} rejections")


def naive_walk_state(network: AlphabetNetwork, dists: Sequence[LocalDistribution], rng: RandomStream,
                     target_length: int) -> WalkState:
    if classify_psa(network, dists) is not PsaClass.FINITE:
        raise InputError("the naive walk needs a terminating PSA")
    return run_walk(network.monoid, flatten(network, dists), -1, rng, target_length, 2**62)


def naive_walk(network: AlphabetNetwork, dists: Sequence[LocalDistribution], rng: RandomStream,
               target_length: int) -> Trace:
    """Concatenation of raw PSA outputs, without rejection."""
    return naive_walk_state(network, dists, rng, target_length).trace


def first_hitting(monoid: TraceMonoid, prefix: Trace, a) -> Trace | None:
    """The smallest sub-trace of ``prefix`` containing an ``a``, or None without any."""
    a = monoid.letter_id(a)
    check_trace(monoid, prefix)
    top = next((k for k, c in enumerate(prefix.cliques) if a in c), None)
    if top is None:
        return None
    covered = monoid.dep[a].copy()
    below: list[list[int]] = []
    for k in range(top - 1, -1, -1):
        picked = [b for b in prefix.cliques[k] if covered[b]]
        for b in picked:
            covered |= monoid.dep[b]
        below.append(picked)
    word = [b for level in reversed(below) for b in level]
    return normalize(monoid, word + [a])


def format_increment_log(state: WalkState) -> str:
    from .formats import format_trace

    parts = []
    for trace, rej in zip(state.increments(), state.increment_rejects.tolist()):
        parts.append(f"# rejected: {rej}\n{format_trace(state.monoid, trace)}")
    return "".join(parts)
