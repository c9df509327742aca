"""Builtin verification scenarios.

Each scenario reruns one end-to-end check against known values and
reports named pass/fail checks.  ``samples`` scales the Monte Carlo work;
None means the full-size run.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .models import figure_monoid, path_network, ring_network
from .moebius import (
    ValuationClass,
    Valuation,
    classify_valuation,
    extend_valuation,
    growth_coefficients,
    moebius_polynomial,
    restrict_valuation,
    smallest_root,
)
from .pfsa import PfsaConfig, sample_increments, pfsa_generate
from .rng import RandomStream
from .sampler import DistKind, LocalDistribution, PsaClass, classify_psa, psa_batch, psa_run, structural_class
from .solver import PathTargets, solve_path_bernoulli, solve_ring, uniform_targets
from .stats import (
    NaiveSource,
    PfsaSource,
    PsaSource,
    estimate_cylinder,
    estimate_mean_length,
    fit_first_hitting,
    letter_frequencies,
    proportion,
)
from .sync import AlphabetNetwork, SyncState, TaggedWord, WordVector, synchronize, SyncTag
from .traces import enumerate_traces, normalize

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)
Q1 = 1 - SQRT2 / 2
P0_RING5 = 0.5 - SQRT5 / 10

# reference values, three decimals
PATH5_ROOT_REF = 0.308
PATH5_TABLE = [(0.308, 0.692), (0.445, 0.555), (0.555, 0.445), (0.692, 0.308)]
RING5_TABLE = [(0.276, 0.724), (0.382, 0.618), (0.447, 0.276)]
RING4_TABLE = [(Q1, SQRT2 / 2), (SQRT2 - 1, Q1)]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class ScenarioResult:
    name: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def report(self) -> str:
        lines = [f"scenario {self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        return "\n".join(lines) + "\n"


def uniform_half(network: AlphabetNetwork) -> list[LocalDistribution]:
    return [
        LocalDistribution({n: 1.0 / len(network.alphabets[i]) for n in network.alphabet_names(i)})
        for i in range(network.size)
    ]


def ring4_pfsa_config(seed: int = 0, dists=None) -> PfsaConfig:
    ring = ring_network(4)
    if dists is None:
        _, params = solve_ring(ring, uniform_targets(ring.monoid), removed="a3")
        dists = params.dists
    return PfsaConfig(ring, "a3", dists, seed=seed)


def _scaled(samples: int | None, full: int) -> int:
    return full if samples is None else max(1, samples)


def exact_combinatorics(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    res = ScenarioResult("exact-combinatorics")
    cases = [
        ("path-5", path_network(5).monoid, (1, -5, 6, -1)),
        ("ring-4", ring_network(4).monoid, (1, -4, 2)),
        ("ring-5", ring_network(5).monoid, (1, -5, 5)),
    ]
    for name, m, want in cases:
        got = moebius_polynomial(m)
        res.add(f"{name} polynomial", got.coefficients == want, str(got))
    r4, r5, p5 = (smallest_root(c[1]) for c in (cases[1], cases[2], cases[0]))
    res.add("ring-4 root", abs(r4 - Q1) <= 1e-9, f"{r4:.12f} vs {Q1:.12f}")
    res.add("ring-5 root", abs(r5 - P0_RING5) <= 1e-9, f"{r5:.12f} vs {P0_RING5:.12f}")
    res.add("path-5 root", abs(p5 - PATH5_ROOT_REF) <= 5e-4, f"{p5:.6f} vs {PATH5_ROOT_REF}")
    return res


def oracle_counts(seed: int = 0, samples: int | None = None, n: int = 8) -> ScenarioResult:
    res = ScenarioResult("oracle-counts")
    for name, m in [("path-5", path_network(5).monoid), ("ring-4", ring_network(4).monoid),
                    ("ring-5", ring_network(5).monoid), ("figure", figure_monoid())]:
        counts = [0] * (n + 1)
        for x in enumerate_traces(m, n):
            counts[len(x)] += 1
        want = growth_coefficients(m, n)
        res.add(name, counts == want, f"enumerated {counts}")
    return res


def solver_tables(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    res = ScenarioResult("solver-tables")
    p5 = path_network(5)
    q0 = smallest_root(p5.monoid)
    solved = solve_path_bernoulli(PathTargets((q0,) * 5))
    rows = [d.probs for d in solved.dists]
    err = max(abs(g - w) for row, want in zip(rows, PATH5_TABLE) for g, w in zip(row, want))
    res.add("path-5 reference table", err <= 1e-3, f"max deviation {err:.2e}")
    sums = max(abs(sum(r) - 1) for r in rows)
    res.add("path-5 row sums", sums <= 1e-10, f"max |sum - 1| = {sums:.1e}")
    diag = max(abs(rows[i][1] * rows[i + 1][0] - q0) for i in range(3))
    diag = max(diag, abs(rows[0][0] - q0), abs(rows[-1][1] - q0))
    res.add("path-5 diagonal products", diag <= 1e-10, f"max deviation {diag:.1e}")
    for name, ring, table, tol in [("ring-4", ring_network(4), RING4_TABLE, 1e-9),
                                   ("ring-5", ring_network(5), RING5_TABLE, 1e-3)]:
        _, params = solve_ring(ring, uniform_targets(ring.monoid))
        got = [d.probs for d in params.dists]
        err = max(abs(g - w) for row, want in zip(got, table) for g, w in zip(row, want))
        res.add(f"{name} table", len(got) == len(table) and err <= tol, f"max deviation {err:.2e}")
    return res


def ring4_mean_length(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    res = ScenarioResult("ring4-mean-length")
    ring = ring_network(4)
    runs = _scaled(samples, 10**6)
    lengths = PsaSource(ring, uniform_half(ring), seed).lengths(runs)
    mean = float(lengths.mean())
    res.add("mean length", abs(mean - 6) <= 0.05, f"{mean:.4f} (target 6 +- 0.05, {runs} runs)")
    empty = float((lengths == 0).mean())
    res.add("P(empty)", abs(empty - 0.125) <= 0.002, f"{empty:.5f} (target 0.125 +- 0.002)")
    return res


def pfsa_fit(seed: int = 0, samples: int | None = None, dists=None, name: str = "pfsa-fit") -> ScenarioResult:
    res = ScenarioResult(name)
    cfg = ring4_pfsa_config(seed, dists)
    n = _scaled(samples, 10**5)
    target = Valuation.uniform(cfg.monoid, Q1)
    incs = sample_increments(cfg, RandomStream(seed), n).increments()
    fit = fit_first_hitting(incs, target, "a3")
    res.add("first hitting fit", fit.p_value > 0.01, f"chi2={fit.statistic:.2f} dof={fit.dof} p={fit.p_value:.4g}")
    control = fit_first_hitting(incs, Valuation.uniform(cfg.monoid, 0.25), "a3")
    res.add("negative control rejected", control.p_value < 1e-6, f"f=1/4 gives p={control.p_value:.3g}")
    walk = pfsa_generate(cfg, RandomStream(seed + 1), n)
    freq = letter_frequencies(cfg.monoid, walk.word)
    spread = float(freq.max() - freq.min())
    res.add("letter frequencies", spread <= 0.01, f"{np.round(freq, 4).tolist()} spread {spread:.4f}")
    for a in cfg.monoid.names:
        est = estimate_cylinder(PfsaSource(cfg, seed=seed + 2 + cfg.monoid.letter_id(a)), normalize(cfg.monoid, [a]), n)
        res.add(f"cylinder {a}", abs(est.estimate - Q1) <= 0.01, f"{est.estimate:.4f} +- {est.stderr:.4f}")
    return res


def tampered_pfsa(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    """The ring-4 walk with perturbed local weights; expected to fail."""
    dists = [LocalDistribution({"a0": 0.35, "a1": 0.65}), LocalDistribution({"a1": 0.40, "a2": 0.30})]
    return pfsa_fit(seed, samples, dists, name="pfsa-tampered")


def naive_not_bernoulli(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    res = ScenarioResult("naive-not-bernoulli")
    ring = ring_network(4)
    n = _scaled(samples, 10**6)
    est = estimate_cylinder(NaiveSource(ring, uniform_half(ring), seed), normalize(ring.monoid, ["a0"]), n)
    z = est.z_score(Q1)
    res.add("cylinder a0 deviates", abs(z) > 5, f"{est.estimate:.5f} vs {Q1:.5f}, z = {z:.1f}")
    return res


def dichotomy(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    res = ScenarioResult("dichotomy")
    path = path_network(5)
    q0 = smallest_root(path.monoid)
    table = list(solve_path_bernoulli(PathTargets((q0,) * 5)).dists)
    ring = ring_network(4)
    res.add("path-5 Infinite", classify_psa(path, table) is PsaClass.INFINITE, "")
    res.add("ring-4 Finite", classify_psa(ring, uniform_half(ring)) is PsaClass.FINITE, "")
    seeds = _scaled(samples and max(1, samples // 100), 100)
    rng = RandomStream(seed)
    reached = sum(not psa_run(path, table, rng, budget=10**4).terminated for _ in range(seeds))
    res.add("path-5 reaches 10^4", reached == seeds, f"{reached}/{seeds} runs hit the budget")
    runs = _scaled(samples, 10**4)
    _, statuses = psa_batch(ring, uniform_half(ring), RandomStream(seed + 1), runs, budget=10**6)
    done = int((statuses != 2).sum())
    res.add("ring-4 terminates", done == runs, f"{done}/{runs} runs terminated")
    configs = [("path-5 table", path, table), ("path-5 halves", path, uniform_half(path)),
               ("ring-4 halves", ring, uniform_half(ring)), ("ring-5 halves", ring_network(5), uniform_half(ring_network(5))),
               ("double share", AlphabetNetwork([["a", "b", "c"], ["a", "b"]]),
                [LocalDistribution({"a": 0.2, "b": 0.3, "c": 0.5}), LocalDistribution({"a": 0.5, "b": 0.5})])]
    for name, net, dists in configs:
        agree = classify_psa(net, dists) is structural_class(net)
        res.add(f"criteria agree on {name}", agree, classify_psa(net, dists).value)
    return res


def _random_vector(network: AlphabetNetwork, rnd: random.Random) -> WordVector:
    comps = []
    for i in range(network.size):
        alpha = network.alphabet_names(i)
        word = [rnd.choice(alpha) for _ in range(rnd.randint(0, 8))]
        comps.append(word)
    tags = [rnd.choice([SyncTag.WFI, SyncTag.EOF]) for _ in comps]
    return WordVector.from_names(network, comps, tags)


def _random_chunks(vector: WordVector, rnd: random.Random) -> list[WordVector]:
    cuts = []
    for comp in vector.components:
        k = rnd.randint(1, 4)
        points = sorted(rnd.randint(0, len(comp.letters)) for _ in range(k - 1))
        bounds = [0] + points + [len(comp.letters)]
        cuts.append([comp.letters[s:e] for s, e in zip(bounds, bounds[1:])])
    rounds = max(len(c) for c in cuts)
    chunks = []
    for r in range(rounds):
        parts = []
        for comp, pieces in zip(vector.components, cuts):
            letters = pieces[r] if r < len(pieces) else ()
            last = r >= len(pieces) - 1
            parts.append(TaggedWord(letters, comp.tag if last else SyncTag.WFI))
        chunks.append(WordVector(tuple(parts)))
    return chunks


def chunk_invariance(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    res = ScenarioResult("chunk-invariance")
    rnd = random.Random(seed)
    vectors = _scaled(samples and max(1, samples // 10), 100)
    mismatches = 0
    for k in range(vectors):
        net = ring_network(4) if k % 2 == 0 else path_network(5)
        vec = _random_vector(net, rnd)
        whole = synchronize(net, vec)
        for _ in range(10):
            state = SyncState(net)
            for chunk in _random_chunks(vec, rnd):
                if state.terminal:
                    break
                state.feed(chunk)
            if (state.trace, state.tag) != whole:
                mismatches += 1
    res.add("random chunkings", mismatches == 0, f"{mismatches} mismatches over {vectors} vectors x 10 chunkings")
    ring = ring_network(4)
    vec = WordVector.from_names(ring, ["a0 a1 a1 a0", "a1 a2 a2 a1", "a3 a2 a3 a2", "a0 a3 a0 a3"])
    x, tag = synchronize(ring, vec)
    want = normalize(ring.monoid, ["a0", "a1", "a3", "a2"])
    res.add("worked vector", x == want and tag is SyncTag.DL, f"{x.format(ring.monoid)} {tag.value}")
    return res


def extension_roundtrip(seed: int = 0, samples: int | None = None) -> ScenarioResult:
    res = ScenarioResult("extension-roundtrip")
    for name, ring in [("ring-4", ring_network(4)), ("ring-5", ring_network(5))]:
        f = uniform_targets(ring.monoid)
        for a in ring.names:
            sub = restrict_valuation(f, [n for n in ring.names if n != a])
            cls = classify_valuation(sub.monoid, sub)
            back = extend_valuation(ring.monoid, a, sub)
            err = abs(back[a] - f[a])
            ok = cls is ValuationClass.SUB_MOEBIUS and err <= 1e-9
            res.add(f"{name} without {a}", ok, f"{cls.value}, |error| = {err:.1e}")
    return res


SCENARIOS: dict[str, Callable[..., ScenarioResult]] = {
    "exact-combinatorics": exact_combinatorics,
    "oracle-counts": oracle_counts,
    "solver-tables": solver_tables,
    "ring4-mean-length": ring4_mean_length,
    "pfsa-fit": pfsa_fit,
    "pfsa-tampered": tampered_pfsa,
    "naive-not-bernoulli": naive_not_bernoulli,
    "dichotomy": dichotomy,
    "chunk-invariance": chunk_invariance,
    "extension-roundtrip": extension_roundtrip,
}
