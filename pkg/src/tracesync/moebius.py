"""Möbius polynomials, valuations and their Möbius transforms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError
from .traces import Trace, TraceMonoid, enumerate_cliques

ZERO_TOL = 1e-9
ROOT_TOL = 1e-12


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, ``coefficients[k]`` multiplies ``t**k``."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = list(self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs or [0]))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(k * c for k, c in enumerate(self.coefficients))[1:] or (0,))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return Polynomial(tuple(out))

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coefficients):
            if c == 0 and k > 0:
                continue
            mag = abs(c)
            mag = int(mag) if float(mag).is_integer() else mag
            mono = f"{mag}" if k == 0 else (f"{mag}t" if k == 1 else f"{mag}t^{k}")
            if not parts:
                parts.append(mono if c >= 0 else f"-{mono}")
            else:
                parts.append(f"{'-' if c < 0 else '+'} {mono}")
        return " ".join(parts)


class Valuation:
    """Positive letter weights on a monoid, extended multiplicatively to traces."""

    __slots__ = ("monoid", "weights")

    def __init__(self, monoid: TraceMonoid, weights):
        if isinstance(weights, Mapping):
            w = [None] * monoid.size
            for key, value in weights.items():
                w[monoid.letter_id(key)] = float(value)
            missing = [monoid.names[i] for i, v in enumerate(w) if v is None]
            if missing:
                raise InputError(f"valuation misses letters {missing}")
        else:
            w = [float(v) for v in weights]
            if len(w) != monoid.size:
                raise InputError(f"expected {monoid.size} weights, got {len(w)}")
        for i, v in enumerate(w):
            if not (v > 0 and math.isfinite(v)):
                raise InputError(f"weight of {monoid.names[i]} must be positive, got {v}")
        self.monoid = monoid
        self.weights = tuple(w)

    @classmethod
    def uniform(cls, monoid: TraceMonoid, p: float) -> "Valuation":
        return cls(monoid, [p] * monoid.size)

    def __getitem__(self, letter) -> float:
        return self.weights[self.monoid.letter_id(letter)]

    def __call__(self, x: Trace) -> float:
        return math.prod(self.weights[a] for c in x.cliques for a in c)

    def of_clique(self, clique: Iterable[int]) -> float:
        return math.prod(self.weights[a] for a in clique)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.monoid.names, self.weights))

    def restrict(self, submonoid: TraceMonoid) -> "Valuation":
        return Valuation(submonoid, {n: self[n] for n in submonoid.names})

    def scaled(self, factor: float) -> "Valuation":
        return Valuation(self.monoid, [factor * w for w in self.weights])

    def __repr__(self) -> str:
        body = ", ".join(f"{n}={w:.6g}" for n, w in self.as_dict().items())
        return f"Valuation({body})"


@dataclass(frozen=True)
class MoebiusTransform:
    values: dict
    epsilon: float

    def __getitem__(self, clique) -> float:
        return self.values[tuple(sorted(clique))]


class ValuationClass(enum.Enum):
    MOEBIUS = "Moebius"
    SUB_MOEBIUS = "SubMoebius"
    NEITHER = "Neither"


def moebius_polynomial(monoid: TraceMonoid) -> Polynomial:
    coeffs = [0] * (monoid.size + 1)
    for c in enumerate_cliques(monoid):
        coeffs[len(c)] += (-1) ** len(c)
    return Polynomial(tuple(coeffs))


def _parallel_letters(monoid: TraceMonoid, clique: Sequence[int]) -> frozenset:
    allowed = frozenset(range(monoid.size))
    for b in clique:
        allowed &= monoid.parallel[b]
    return allowed


def _independence_eval(monoid: TraceMonoid, weights: Sequence[float]):
    """Evaluator of the multivariate polynomial on any letter subset.

    Splits cliques on whether they contain the largest letter ``v``:
    ``mu(S) = mu(S - v) - w(v) * mu(S & parallel(v))``.
    """
    parallel = monoid.parallel

    @lru_cache(maxsize=None)
    def mu(letters: frozenset) -> float:
        if not letters:
            return 1.0
        v = max(letters)
        rest = letters - {v}
        return mu(rest) - weights[v] * mu(rest & parallel[v])

    return mu


def multivariate_eval(monoid: TraceMonoid, f: Valuation, restrict_to: Iterable = ()) -> float:
    """Multivariate Möbius polynomial of the submonoid parallel to ``restrict_to``."""
    clique = [monoid.letter_id(a) for a in restrict_to]
    return _independence_eval(monoid, f.weights)(_parallel_letters(monoid, clique))


def smallest_root(monoid: TraceMonoid) -> float:
    """Smallest positive root of the Möbius polynomial, by bisection.

    Works per irreducible component: the product of component polynomials
    can have a double root without sign change, each factor cannot.
    """
    if monoid.size == 0:
        raise InputError("the trivial monoid has no Möbius root")
    return min(_simple_root(moebius_polynomial(monoid.restrict(comp))) for comp in components(monoid))


def _simple_root(poly: Polynomial) -> float:
    grid = np.linspace(0.0, 1.0, 4097)
    prev = 0.0
    for t in grid[1:]:
        if poly(t) <= 0.0:
            break
        prev = t
    else:
        raise AssertionError(f"no root of {poly} in (0, 1]")
    lo, hi = prev, float(t)
    while hi - lo > ROOT_TOL / 4:
        mid = 0.5 * (lo + hi)
        if poly(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def growth_coefficients(monoid: TraceMonoid, n: int) -> list[int]:
    """First ``n + 1`` coefficients of the growth series ``1 / mu(t)``."""
    mu = moebius_polynomial(monoid).coefficients
    out = [1]
    for k in range(1, n + 1):
        out.append(-sum(mu[j] * out[k - j] for j in range(1, min(k, len(mu) - 1) + 1)))
    return out[: n + 1]


def moebius_transform(monoid: TraceMonoid, f: Valuation) -> MoebiusTransform:
    """Alternating sum of ``f`` over the super-cliques of each clique."""
    cliques = enumerate_cliques(monoid)
    values = {c: 0.0 for c in cliques}
    for big in cliques:
        fb = f.of_clique(big)
        k = len(big)
        for r in range(k + 1):
            sign = -1.0 if (k - r) % 2 else 1.0
            for sub in combinations(big, r):
                values[sub] += sign * fb
    return MoebiusTransform(values, values[()])


def factored_transform(monoid: TraceMonoid, f: Valuation) -> MoebiusTransform:
    """The same transform as ``f(c)`` times the polynomial of the parallel submonoid."""
    mu = _independence_eval(monoid, f.weights)
    values = {c: f.of_clique(c) * mu(_parallel_letters(monoid, c)) for c in enumerate_cliques(monoid)}
    return MoebiusTransform(values, values[()])


@dataclass(frozen=True)
class Classification:
    kind: ValuationClass
    epsilon: float
    min_nonempty: float
    message: str


def classify_detailed(monoid: TraceMonoid, f: Valuation, tol: float = ZERO_TOL) -> Classification:
    h = moebius_transform(monoid, f)
    nonempty = [(c, v) for c, v in h.values.items() if c]
    worst_clique, worst = min(nonempty, key=lambda cv: cv[1]) if nonempty else ((), math.inf)
    eps = h.epsilon
    if worst <= 0:
        names = "".join(monoid.names[a] for a in worst_clique)
        return Classification(ValuationClass.NEITHER, eps, worst, f"h({names}) = {worst:.3g} is not positive")
    if abs(eps) <= tol:
        return Classification(ValuationClass.MOEBIUS, eps, worst, f"h(e) = {eps:.3g} vanishes")
    if eps > 0:
        return Classification(ValuationClass.SUB_MOEBIUS, eps, worst, f"h(e) = {eps:.6g} > 0")
    return Classification(ValuationClass.NEITHER, eps, worst, f"h(e) = {eps:.6g} is negative")


def classify_valuation(monoid: TraceMonoid, f: Valuation, tol: float = ZERO_TOL) -> ValuationClass:
    return classify_detailed(monoid, f, tol).kind


def components(monoid: TraceMonoid) -> list[list[int]]:
    """Connected components of the dependence graph."""
    seen = [False] * monoid.size
    out = []
    for start in range(monoid.size):
        if seen[start]:
            continue
        seen[start] = True
        comp, stack = [], [start]
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in monoid.dependents[a]:
                if not seen[b]:
                    seen[b] = True
                    stack.append(b)
        out.append(sorted(comp))
    return out


def is_irreducible(monoid: TraceMonoid) -> bool:
    return monoid.size > 0 and len(components(monoid)) == 1


def restrict_valuation(f: Valuation, keep: Iterable) -> Valuation:
    return f.restrict(f.monoid.restrict(keep))


def extend_valuation(monoid: TraceMonoid, a, f_prime: Valuation) -> Valuation:
    """The unique Möbius valuation on ``monoid`` extending ``f_prime``.

    ``f_prime`` lives on the submonoid generated by every letter except
    ``a``.  The weight of ``a`` is ``h'(e) / K`` where ``K = 1 - K'`` and
    ``K'`` is the inclusion-exclusion sum over nonempty cliques parallel
    to ``a``.
    """
    a = monoid.letter_id(a)
    name = monoid.names[a]
    sub = f_prime.monoid
    expected = monoid.restrict(n for n in monoid.names if n != name)
    if sub != expected:
        raise InputError(f"valuation must live on the submonoid without {name}")
    if not is_irreducible(monoid):
        raise InputError("extension requires an irreducible monoid")
    cls = classify_detailed(sub, f_prime)
    if cls.kind is not ValuationClass.SUB_MOEBIUS:
        raise InputError(f"restricted valuation is not sub-Möbius: {cls.message}")
    parallel_names = {monoid.names[b] for b in monoid.parallel[a]}
    k_prime = 0.0
    for delta in enumerate_cliques(sub):
        if delta and all(sub.names[b] in parallel_names for b in delta):
            k_prime += (-1) ** (len(delta) + 1) * f_prime.of_clique(delta)
    k = 1.0 - k_prime
    if k <= 0:
        raise RuntimeError(f"normalizing constant K = {k} is not positive")
    weights = {n: f_prime[n] for n in sub.names}
    weights[name] = cls.epsilon / k
    return Valuation(monoid, weights)


def format_valuation(f: Valuation) -> str:
    return "\n".join(f"{n}={w!r}" for n, w in f.as_dict().items())


def parse_valuation(monoid: TraceMonoid, text: str) -> Valuation:
    weights = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for token in line.split():
            key, sep, value = token.partition("=")
            if not sep:
                raise InputError(f"line {lineno}: expected name=value, got {token!r}")
            try:
                weights[key] = float(value)
            except ValueError:
                raise InputError(f"line {lineno}: bad weight {value!r}") from None
    return Valuation(monoid, weights)
