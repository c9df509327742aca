"""Estimators and goodness-of-fit tests for generated traces."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy import stats as sps

from . import kernels
from ._jit import kernel_context
from .errors import InconclusiveError, InputError, ResourceError
from .moebius import Valuation
from .pfsa import INCREMENT_RESERVE, PfsaConfig, dependence_array
from .rng import RandomStream
from .sampler import LocalDistribution, PsaClass, classify_psa, flatten, psa_batch
from .sync import AlphabetNetwork
from .traces import Trace, TraceMonoid, check_trace, enumerate_traces, in_hitting_set

Z99 = float(sps.norm.ppf(0.995))
DEFAULT_SLACK = 64
MAX_UNDECIDED = 0.01


def _kv(pairs) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def _table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) if k else c.ljust(w) for k, (c, w) in enumerate(zip(r, widths))) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    stderr: float
    samples: int
    undecided: int = 0

    @property
    def ci(self) -> tuple[float, float]:
        return self.estimate - Z99 * self.stderr, self.estimate + Z99 * self.stderr

    def contains(self, value: float) -> bool:
        lo, hi = self.ci
        return lo <= value <= hi

    def z_score(self, value: float) -> float:
        if self.stderr == 0:
            return 0.0 if value == self.estimate else math.inf
        return (self.estimate - value) / self.stderr

    def to_kv(self) -> str:
        lo, hi = self.ci
        return _kv([("estimate", f"{self.estimate:.6f}"), ("stderr", f"{self.stderr:.6f}"),
                    ("samples", self.samples), ("undecided", self.undecided),
                    ("ci99_low", f"{lo:.6f}"), ("ci99_high", f"{hi:.6f}")])

    def to_table(self) -> str:
        lo, hi = self.ci
        return _table(["estimate", "stderr", "samples", "undecided", "99% CI"],
                      [[f"{self.estimate:.6f}", f"{self.stderr:.6f}", self.samples, self.undecided,
                        f"[{lo:.6f}, {hi:.6f}]"]])


@dataclass(frozen=True)
class FitReport:
    statistic: float
    dof: int
    p_value: float
    buckets: list = field(default_factory=list)
    """``(label, observed, expected)`` rows after merging."""

    def to_kv(self) -> str:
        return _kv([("chi2", f"{self.statistic:.6f}"), ("dof", self.dof), ("p_value", f"{self.p_value:.6g}"),
                    ("buckets", len(self.buckets))])

    def to_table(self) -> str:
        rows = [[label, obs, f"{exp:.2f}"] for label, obs, exp in self.buckets]
        return _table(["bucket", "observed", "expected"], rows)


class CylinderSource(Protocol):
    monoid: TraceMonoid

    def cylinder_counts(self, x: Trace, samples: int, cap: int) -> np.ndarray: ...


def decider_arrays(monoid: TraceMonoid, x: Trace):
    """Projections of ``x`` on every dependent pair, packed for the kernels."""
    size = monoid.size
    pair_index = np.full((size, size), -1, dtype=np.int64)
    word = x.word()
    ptr = [0]
    data: list[int] = []
    for b in range(size):
        for c in range(b, size):
            if monoid.dep[b, c]:
                pair_index[b, c] = pair_index[c, b] = len(ptr) - 1
                data.extend(a for a in word if a in (b, c))
                ptr.append(len(data))
    return pair_index, np.array(ptr, dtype=np.int64), np.array(data, dtype=np.int64)


class PsaSource:
    """Independent PSA runs from one seeded stream."""

    def __init__(self, network: AlphabetNetwork, dists: Sequence[LocalDistribution], seed: int = 0):
        self.network = network
        self.dists = list(dists)
        self.monoid = network.monoid
        self.rng = RandomStream(seed)

    def cylinder_counts(self, x: Trace, samples: int, cap: int) -> np.ndarray:
        flat = flatten(self.network, self.dists)
        counts = np.zeros(3, dtype=np.int64)
        with kernel_context():
            kernels.psa_cylinder_batch(self.rng.state, samples, *flat.args(), cap, dependence_array(self.monoid),
                                       *decider_arrays(self.monoid, x), counts)
        return counts

    def lengths(self, samples: int, budget: int = 10**6) -> np.ndarray:
        lengths, statuses = psa_batch(self.network, self.dists, self.rng, samples, budget)
        if (statuses == kernels.BUDGET).any():
            raise ResourceError(f"a PSA run exceeded {budget} pieces")
        return lengths


class _WalkSource:
    def _walk_counts(self, flat, letter: int, x: Trace, samples: int, cap: int, max_rejects: int) -> np.ndarray:
        counts = np.zeros(3, dtype=np.int64)
        with kernel_context():
            status = kernels.walk_cylinder_batch(
                self.rng.state, samples, *flat.args(), letter, cap, INCREMENT_RESERVE, max_rejects,
                dependence_array(self.monoid), *decider_arrays(self.monoid, x), counts,
            )
        if status != kernels.WALK_DONE:
            raise ResourceError("a walk increment failed (rejection budget or size overflow)")
        return counts


class PfsaSource(_WalkSource):
    def __init__(self, config: PfsaConfig, seed: int | None = None):
        self.config = config
        self.monoid = config.monoid
        self.rng = RandomStream(config.seed if seed is None else seed)

    def cylinder_counts(self, x: Trace, samples: int, cap: int) -> np.ndarray:
        cfg = self.config
        return self._walk_counts(cfg.flat(), cfg.letter_id, x, samples, cap, cfg.max_rejects)


class NaiveSource(_WalkSource):
    def __init__(self, network: AlphabetNetwork, dists: Sequence[LocalDistribution], seed: int = 0):
        if classify_psa(network, dists) is not PsaClass.FINITE:
            raise InputError("the naive walk needs a terminating PSA")
        self.network = network
        self.dists = list(dists)
        self.monoid = network.monoid
        self.rng = RandomStream(seed)

    def cylinder_counts(self, x: Trace, samples: int, cap: int) -> np.ndarray:
        return self._walk_counts(flatten(self.network, self.dists), -1, x, samples, cap, 0)


def proportion(successes: int, n: int, undecided: int = 0) -> EstimateReport:
    p = successes / n
    return EstimateReport(p, math.sqrt(p * (1 - p) / n), n, undecided)


def estimate_cylinder(source: CylinderSource, x: Trace, samples: int, slack: int = DEFAULT_SLACK,
                      max_undecided: float = MAX_UNDECIDED) -> EstimateReport:
    """Fraction of generated traces dominating ``x``, decided on prefixes of ``|x| + slack`` pieces."""
    check_trace(source.monoid, x)
    if samples <= 0:
        raise InputError("samples must be positive")
    if not x:
        return EstimateReport(1.0, 0.0, samples)
    yes, no, undecided = (int(c) for c in source.cylinder_counts(x, samples, len(x) + slack))
    if undecided > max_undecided * samples:
        raise InconclusiveError(f"{undecided} of {samples} samples undecided within {len(x) + slack} pieces")
    return proportion(yes, yes + no, undecided)


def estimate_mean_length(source: PsaSource, samples: int) -> EstimateReport:
    if classify_psa(source.network, source.dists) is not PsaClass.FINITE:
        raise InputError("mean length is infinite: the PSA output is infinite")
    lengths = source.lengths(samples)
    mean = float(lengths.mean())
    sd = float(lengths.std(ddof=1)) if samples > 1 else 0.0
    return EstimateReport(mean, sd / math.sqrt(samples), samples)


def _chi2(observed, expected) -> tuple[float, int, float]:
    stat = 0.0
    for o, e in zip(observed, expected):
        if e > 0:
            stat += (o - e) ** 2 / e
        elif o > 0:
            stat = math.inf
    dof = len(observed) - 1
    p = float(sps.chi2.sf(stat, dof)) if dof > 0 else 1.0
    return stat, dof, p


def _merge(rows: list[list], min_expected: float) -> list[list]:
    """Pool rows whose expectation is below ``min_expected``, smallest first."""
    big = [r for r in rows if r[2] >= min_expected]
    small = sorted((r for r in rows if r[2] < min_expected), key=lambda r: r[2])
    pooled = None
    for r in small:
        pooled = r if pooled is None else ["(merged)", pooled[1] + r[1], pooled[2] + r[2]]
    if pooled is not None:
        if pooled[2] >= min_expected or not big:
            big.append(pooled)
        else:
            low = min(big, key=lambda r: r[2])
            low[:] = [f"{low[0]}+(merged)", low[1] + pooled[1], low[2] + pooled[2]]
    return big


def fit_first_hitting(samples: Sequence[Trace], f: Valuation, a, horizon: int = 4,
                      min_expected: float = 5.0) -> FitReport:
    """Chi-square of the sample histogram against ``f`` on pyramids topped by ``a``.

    Pyramids longer than ``horizon`` share one tail bucket with the mass
    ``f`` leaves outside the enumerated ones.
    """
    monoid = f.monoid
    a = monoid.letter_id(a)
    if not samples:
        raise InputError("no samples")
    for k, v in enumerate(samples):
        if not in_hitting_set(monoid, v, a):
            raise InputError(f"sample {k} is not a pyramid topped by {monoid.names[a]}")
    support = [v for v in enumerate_traces(monoid, horizon) if v and in_hitting_set(monoid, v, a)]
    n = len(samples)
    counts = Counter(samples)
    rows = [[v.format(monoid), counts.get(v, 0), n * f(v)] for v in support]
    inside = sum(r[1] for r in rows)
    tail_mass = 1.0 - math.fsum(f(v) for v in support)
    rows.append([f"(length > {horizon})", n - inside, n * max(tail_mass, 0.0)])
    if tail_mass <= 0 and rows[-1][1] == 0:
        rows.pop()
    rows = _merge(rows, min_expected)
    stat, dof, p = _chi2([r[1] for r in rows], [r[2] for r in rows])
    return FitReport(stat, dof, p, [tuple(r) for r in rows])


def two_sample_chi2(first: Sequence[Trace], second: Sequence[Trace], monoid: TraceMonoid,
                    min_expected: float = 5.0) -> FitReport:
    """Homogeneity test of two trace samples; rare traces are pooled."""
    c1, c2 = Counter(first), Counter(second)
    n1, n2 = len(first), len(second)
    if not n1 or not n2:
        raise InputError("both samples must be nonempty")
    frac = n1 / (n1 + n2)
    keys = sorted(set(c1) | set(c2), key=lambda t: (len(t), t.cliques))
    rows, other = [], [0, 0]
    for k in keys:
        o1, o2 = c1.get(k, 0), c2.get(k, 0)
        tot = o1 + o2
        if min(tot * frac, tot * (1 - frac)) >= min_expected:
            rows.append((k.format(monoid), o1, o2))
        else:
            other[0] += o1
            other[1] += o2
    if sum(other):
        rows.append(("(pooled)", other[0], other[1]))
    if len(rows) < 2:
        return FitReport(0.0, 0, 1.0, [(r[0], r[1], float(r[2])) for r in rows])
    table = np.array([[r[1], r[2]] for r in rows], dtype=np.float64)
    stat, p, dof, _ = sps.chi2_contingency(table, correction=False)
    return FitReport(float(stat), int(dof), float(p), [(r[0], r[1], float(r[2])) for r in rows])


def letter_frequencies(monoid: TraceMonoid, word: np.ndarray) -> np.ndarray:
    counts = np.bincount(np.asarray(word, dtype=np.int64), minlength=monoid.size)
    return counts / max(1, counts.sum())
