"""Plain-text formats for traces, monoids, networks, vectors, distributions and run configs.

Traces are written one clique per line, bottom-up, letters separated by
spaces, and every record ends with a line holding ``%``.  ``#`` starts a
comment anywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InputError
from .moebius import Valuation
from .models import path_network, ring_network
from .sampler import DistKind, LocalDistribution
from .sync import AlphabetNetwork, SyncTag, TaggedWord, WordVector
from .traces import Trace, TraceMonoid, is_normal_form

ALGORITHMS = ("psa", "pfsa", "naive")


def _lines(text: str, first: int = 1):
    """Yield ``(line number, content)`` with comments and blank lines removed."""
    for n, raw in enumerate(text.splitlines(), first):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def _fail(lineno: int, msg: str):
    raise InputError(f"line {lineno}: {msg}")


def format_trace(monoid: TraceMonoid, x: Trace) -> str:
    body = "".join(" ".join(monoid.names[a] for a in c) + "\n" for c in x.cliques)
    return body + "%\n"


def format_traces(monoid: TraceMonoid, xs: Iterable[Trace]) -> str:
    return "".join(format_trace(monoid, x) for x in xs)


def parse_traces(monoid: TraceMonoid, text: str) -> list[Trace]:
    out: list[Trace] = []
    cliques: list[tuple[int, ...]] = []
    start = None
    for n, line in _lines(text):
        if line == "%":
            x = Trace(tuple(cliques))
            if not is_normal_form(monoid, x):
                _fail(start or n, "record is not in Cartier-Foata normal form")
            out.append(x)
            cliques, start = [], None
            continue
        start = start or n
        try:
            cliques.append(tuple(sorted(monoid.letter_id(t) for t in line.split())))
        except InputError as exc:
            _fail(n, str(exc))
    if cliques:
        _fail(start, "unterminated trace record (missing '%')")
    return out


def parse_trace(monoid: TraceMonoid, text: str) -> Trace:
    xs = parse_traces(monoid, text)
    if len(xs) != 1:
        raise InputError(f"expected one trace record, found {len(xs)}")
    return xs[0]


def format_monoid(monoid: TraceMonoid) -> str:
    lines = ["letters: " + " ".join(monoid.names)]
    for a, b in sorted(tuple(sorted(p)) for p in monoid.independence):
        lines.append(f"{monoid.names[a]} {monoid.names[b]}")
    return "\n".join(lines) + "\n"


def _letters_line(n: int, line: str) -> list[str] | None:
    key, sep, rest = line.partition(":")
    if sep and key.strip() == "letters":
        names = rest.split()
        if not names:
            _fail(n, "empty letter list")
        return names
    return None


def parse_monoid(text: str) -> TraceMonoid:
    names = None
    pairs = []
    for n, line in _lines(text):
        declared = _letters_line(n, line)
        if declared is not None:
            if names is not None:
                _fail(n, "letters declared twice")
            names = declared
            continue
        if names is None:
            _fail(n, "expected 'letters:' first")
        toks = line.split()
        if len(toks) != 2:
            _fail(n, f"expected an independence pair, got {line!r}")
        pairs.append((n, toks))
    if names is None:
        raise InputError("no 'letters:' line")
    try:
        monoid = TraceMonoid(names, [])
    except InputError as exc:
        raise InputError(f"letters: {exc}") from None
    for n, (a, b) in pairs:
        try:
            monoid.letter_id(a), monoid.letter_id(b)
        except InputError as exc:
            _fail(n, str(exc))
        if a == b:
            _fail(n, "a letter cannot be independent of itself")
    return TraceMonoid(names, [p for _, p in pairs])


def format_network(network: AlphabetNetwork) -> str:
    lines = ["letters: " + " ".join(network.names)]
    for i in range(network.size):
        lines.append(f"alphabet {i + 1}: " + " ".join(network.alphabet_names(i)))
    return "\n".join(lines) + "\n"


_MODEL = re.compile(r"^model\s*:\s*(path|ring)\s+(\d+)$")
_ALPHA = re.compile(r"^alphabet\s+(\d+)\s*:(.*)$")


def parse_network(text: str, first_line: int = 1) -> AlphabetNetwork:
    """Network from ``letters:``/``alphabet i:`` lines, or ``model: ring 4`` / ``model: path 5``."""
    names = None
    alphas: dict[int, list[str]] = {}
    model = None
    for n, line in _lines(text, first_line):
        m = _MODEL.match(line)
        if m:
            model = (n, m.group(1), int(m.group(2)))
            continue
        declared = _letters_line(n, line)
        if declared is not None:
            names = declared
            continue
        m = _ALPHA.match(line)
        if not m:
            _fail(n, f"unrecognized network line {line!r}")
        idx = int(m.group(1))
        if idx in alphas:
            _fail(n, f"alphabet {idx} declared twice")
        alphas[idx] = m.group(2).split()
        if not alphas[idx]:
            _fail(n, f"alphabet {idx} is empty")
    if model is not None:
        n, kind, size = model
        if alphas or names:
            _fail(n, "a model line excludes explicit alphabets")
        try:
            return ring_network(size) if kind == "ring" else path_network(size)
        except InputError as exc:
            _fail(n, str(exc))
    if not alphas:
        raise InputError("network has no alphabets")
    if sorted(alphas) != list(range(1, len(alphas) + 1)):
        raise InputError(f"alphabets must be numbered 1..{len(alphas)}, got {sorted(alphas)}")
    return AlphabetNetwork([alphas[i] for i in sorted(alphas)], names)


_INDEXED = re.compile(r"^(\d+)\s*:(.*)$")


def format_vector(network: AlphabetNetwork, vector: WordVector) -> str:
    lines = []
    for i, comp in enumerate(vector.components):
        letters = "".join(" " + network.names[a] for a in comp.letters)
        lines.append(f"{i + 1}:{letters} | {comp.tag.value}")
    return "\n".join(lines) + "\n"


def parse_vector(network: AlphabetNetwork, text: str) -> WordVector:
    comps: dict[int, TaggedWord] = {}
    for n, line in _lines(text):
        m = _INDEXED.match(line)
        if not m:
            _fail(n, f"expected 'i: letters | TAG', got {line!r}")
        body, sep, tag = m.group(2).rpartition("|")
        if not sep:
            _fail(n, "missing '| WFI' or '| EOF'")
        tag = tag.strip()
        if tag not in ("WFI", "EOF"):
            _fail(n, f"tag must be WFI or EOF, got {tag!r}")
        try:
            letters = tuple(network.monoid.letter_id(t) for t in body.split())
        except InputError as exc:
            _fail(n, str(exc))
        comps[int(m.group(1))] = TaggedWord(letters, SyncTag(tag))
    if sorted(comps) != list(range(1, network.size + 1)):
        raise InputError(f"expected components 1..{network.size}, got {sorted(comps)}")
    return WordVector(tuple(comps[i] for i in sorted(comps)))


def format_dists(dists: Sequence[LocalDistribution]) -> str:
    lines = []
    for i, d in enumerate(dists):
        body = " ".join(f"{n}={p!r}" for n, p in zip(d.names, d.probs))
        lines.append(f"{i + 1}: {body} {d.kind.value}")
    return "\n".join(lines) + "\n"


def parse_dists(text: str, first_line: int = 1) -> list[LocalDistribution]:
    dists: dict[int, LocalDistribution] = {}
    for n, line in _lines(text, first_line):
        m = _INDEXED.match(line)
        if not m:
            _fail(n, f"expected 'i: a=p ... prob|sub', got {line!r}")
        toks = m.group(2).split()
        kind = None
        if toks and toks[-1] in ("prob", "sub"):
            kind = DistKind(toks.pop())
        weights = {}
        for tok in toks:
            name, sep, val = tok.partition("=")
            if not sep:
                _fail(n, f"expected name=weight, got {tok!r}")
            try:
                weights[name] = float(val)
            except ValueError:
                _fail(n, f"bad weight {val!r}")
        idx = int(m.group(1))
        if idx in dists:
            _fail(n, f"distribution {idx} given twice")
        try:
            dists[idx] = LocalDistribution(weights, kind)
        except InputError as exc:
            _fail(n, str(exc))
    if sorted(dists) != list(range(1, len(dists) + 1)):
        raise InputError(f"distributions must be numbered 1..{len(dists)}, got {sorted(dists)}")
    return [dists[i] for i in sorted(dists)]


def parse_targets(monoid: TraceMonoid, text: str, first_line: int = 1) -> Valuation | str:
    """Letter weights as ``name=value`` tokens, or the keyword ``uniform``."""
    weights = {}
    for n, line in _lines(text, first_line):
        if line == "uniform":
            if weights:
                _fail(n, "'uniform' excludes explicit weights")
            return "uniform"
        for tok in line.split():
            name, sep, val = tok.partition("=")
            if not sep:
                _fail(n, f"expected name=weight, got {tok!r}")
            try:
                weights[name] = float(val)
            except ValueError:
                _fail(n, f"bad weight {val!r}")
    return Valuation(monoid, weights)


@dataclass
class RunConfig:
    network: AlphabetNetwork
    dists: list[LocalDistribution] | None = None
    targets: Valuation | str | None = None
    algorithm: str = "psa"
    seed: int = 0
    budget: int = 10**6
    length: int = 1000
    samples: int = 10**4
    letter: str | None = None
    removed: str | None = None
    chunk: int = 64
    max_rejects: int = 10**6
    horizon: int = 8
    out: str | None = None
    extra: dict = field(default_factory=dict)


_INT_KEYS = ("seed", "budget", "length", "samples", "chunk", "max_rejects", "horizon")


def parse_config(text: str) -> RunConfig:
    """Sections ``[network]``, ``[dists]``, ``[targets]``, ``[run]``; the network is required."""
    sections: dict[str, tuple[int, list[str]]] = {}
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        m = re.match(r"^\[(\w+)\]$", line)
        if m:
            current = m.group(1)
            if current not in ("network", "dists", "targets", "run"):
                _fail(n, f"unknown section [{current}]")
            if current in sections:
                _fail(n, f"section [{current}] repeated")
            sections[current] = (n + 1, [])
            continue
        if current is None:
            if line:
                _fail(n, "content before the first section")
            continue
        sections[current][1].append(raw)
    if "network" not in sections:
        raise InputError("config lacks a [network] section")
    start, body = sections["network"]
    network = parse_network("\n".join(body), start)
    cfg = RunConfig(network)
    if "dists" in sections:
        start, body = sections["dists"]
        cfg.dists = parse_dists("\n".join(body), start)
    if "targets" in sections:
        start, body = sections["targets"]
        cfg.targets = parse_targets(network.monoid, "\n".join(body), start)
    if "run" in sections:
        start, body = sections["run"]
        for n, line in _lines("\n".join(body), start):
            key, sep, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if not sep:
                _fail(n, f"expected key = value, got {line!r}")
            if key in _INT_KEYS:
                try:
                    setattr(cfg, key, int(val))
                except ValueError:
                    _fail(n, f"{key} must be an integer, got {val!r}")
            elif key == "algorithm":
                if val not in ALGORITHMS:
                    _fail(n, f"algorithm must be one of {', '.join(ALGORITHMS)}")
                cfg.algorithm = val
            elif key in ("letter", "removed", "out"):
                setattr(cfg, key, val)
            elif key == "scenario":
                cfg.extra["scenario"] = val
            else:
                _fail(n, f"unknown run key {key!r}")
    return cfg


def format_config(cfg: RunConfig) -> str:
    parts = ["[network]\n" + format_network(cfg.network)]
    if cfg.dists is not None:
        parts.append("[dists]\n" + format_dists(cfg.dists))
    if isinstance(cfg.targets, Valuation):
        body = " ".join(f"{n}={w!r}" for n, w in cfg.targets.as_dict().items())
        parts.append(f"[targets]\n{body}\n")
    elif cfg.targets == "uniform":
        parts.append("[targets]\nuniform\n")
    run = [f"algorithm = {cfg.algorithm}", f"seed = {cfg.seed}", f"budget = {cfg.budget}",
           f"length = {cfg.length}", f"samples = {cfg.samples}"]
    if cfg.letter:
        run.append(f"letter = {cfg.letter}")
    if cfg.removed:
        run.append(f"removed = {cfg.removed}")
    parts.append("[run]\n" + "\n".join(run) + "\n")
    return "\n".join(parts)
