"""Seeded generators for the process families under study.

Every generator is a pure function of its parameters and a 64-bit seed.
Randomness for each generator comes from its own named substream (see
:mod:`serieslab.seeding`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .core import Alphabet, Block, Provenance, SymbolSequence, symbol_dtype
from .seeding import check_seed, digest, stream

VARIANTS = ("bernoulli", "markov", "periodic", "example1", "lawofseries")
PROB_TOL = 1e-12
EXAMPLE1_MAX_BLOCKS = 10**5


def _prob_vector(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("invalid probability vector: need at least two entries")
    if np.any(p < 0) or not np.all(np.isfinite(p)) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError("invalid probability vector: entries must be >= 0 and sum to 1")
    return p


def _stochastic_matrix(transition) -> np.ndarray:
    P = np.asarray(transition, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise ValueError("transition matrix must be square with at least 2 states")
    if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > PROB_TOL):
        raise ValueError("transition matrix is not row-stochastic")
    return P


def stationary_distribution(transition) -> np.ndarray:
    """Left Perron vector of a row-stochastic matrix, normalised to sum 1."""
    P = _stochastic_matrix(transition)
    A = P.shape[0]
    # pi (P - I) = 0 with one balance equation swapped for sum(pi) = 1;
    # reducible chains make that singular, so fall back to least squares
    M = P.T - np.eye(A)
    M[-1] = 1.0
    rhs = np.zeros(A)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        M = np.vstack([P.T - np.eye(A), np.ones(A)])
        pi, *_ = np.linalg.lstsq(M, np.concatenate((np.zeros(A), [1.0])), rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _sequence(alphabet, data, generator, params, seed) -> SymbolSequence:
    prov = Provenance(generator, digest(params), int(seed), params)
    return SymbolSequence(alphabet, data, prov)


def gen_bernoulli(probs, length: int, seed: int) -> SymbolSequence:
    """I.i.d. draws from ``probs``."""
    p = _prob_vector(probs)
    if length < 1:
        raise ValueError("length must be positive")
    rng = stream(seed, "bernoulli")
    cum = np.cumsum(p)
    cum[-1] = 1.0
    u = rng.random(length)
    data = np.searchsorted(cum, u, side="right").astype(symbol_dtype(p.size))
    # a zero-probability tail symbol can only be hit when u == 1.0, which random() never returns
    params = {"probs": p.tolist()}
    return _sequence(Alphabet(p.size), data, "bernoulli", params, seed)


@numba.njit(cache=True)
def _markov_walk(cum, u, x0, out):
    A = cum.shape[1]
    state = x0
    out[0] = state
    for t in range(1, out.size):
        row = cum[state]
        v = u[t]
        j = 0
        while j < A - 1 and v >= row[j]:
            j += 1
        state = j
        out[t] = state


def gen_markov(transition, initial=None, length: int = 1, seed: int = 0) -> SymbolSequence:
    """Markov chain path; ``initial=None`` starts from the stationary vector."""
    P = _stochastic_matrix(transition)
    A = P.shape[0]
    init = stationary_distribution(P) if initial is None else _prob_vector(initial)
    if init.size != A:
        raise ValueError("initial vector does not match the transition matrix")
    if length < 1:
        raise ValueError("length must be positive")
    rng = stream(seed, "markov")
    u = rng.random(length)
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    c0 = np.cumsum(init)
    c0[-1] = 1.0
    x0 = int(np.searchsorted(c0, u[0], side="right"))
    out = np.empty(length, dtype=np.int64)
    _markov_walk(cum, u, x0, out)
    params = {"transition": P.tolist(), "initial": None if initial is None else init.tolist()}
    return _sequence(Alphabet(A), out, "markov", params, seed)


def gen_periodic(pattern: Block, length: int, seed: int = 0, phase: int | None = None) -> SymbolSequence:
    """Repeat ``pattern``; the starting phase is ``phase`` or drawn from the seed."""
    word = np.asarray(pattern.word, dtype=np.int64)
    q = word.size
    if phase is None:
        phase = int(stream(seed, "periodic-phase").integers(q))
    phase %= q
    idx = (np.arange(length) + phase) % q
    params = {"pattern": list(pattern.word), "alphabet_size": pattern.alphabet.size, "phase": phase}
    return _sequence(pattern.alphabet, word[idx], "periodic", params, seed)


# --------------------------------------------------------------------------
# Example 1: concatenations of permuted marker-terminated blocks

@dataclass(frozen=True)
class ExampleOneParams:
    """Core symbols are ``0..N0-1``; marker ``i`` (0-based) is symbol ``N0 + i``."""

    N0: int
    n: int
    r: int
    length: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.r < 2 or self.N0 < 2 or self.n < 2:
            raise ValueError("need r >= 2, N0 >= 2 and n >= 2")
        if self.N0 ** (self.n - 1) > EXAMPLE1_MAX_BLOCKS:
            raise ValueError("desk-scale guard: N0**(n-1) must not exceed %d" % EXAMPLE1_MAX_BLOCKS)
        check_seed(self.seed)

    @property
    def N(self) -> int:
        return self.N0 + self.r

    @property
    def blocks_per_class(self) -> int:
        return self.N0 ** (self.n - 1)

    @property
    def component_length(self) -> int:
        return self.n * self.blocks_per_class

    @property
    def block_measure(self) -> float:
        return 1.0 / (self.n * self.r * self.blocks_per_class)


@dataclass(frozen=True)
class DesignatedFamily:
    """The marker-terminated n-blocks of Example 1 with their exact measures."""

    params: ExampleOneParams
    blocks: tuple[Block, ...]
    marker_class: tuple[int, ...]

    @property
    def block_measure(self) -> float:
        return self.params.block_measure

    @property
    def joint_measure(self) -> float:
        return len(self.blocks) * self.params.block_measure


def _core_prefixes(N0: int, width: int) -> np.ndarray:
    """All words of length ``width`` over ``range(N0)`` in lexicographic order."""
    m = N0 ** width
    j = np.arange(m)
    digits = np.empty((m, width), dtype=np.int64)
    for pos in range(width - 1, -1, -1):
        digits[:, pos] = j % N0
        j = j // N0
    return digits


def example1_family(params: ExampleOneParams) -> DesignatedFamily:
    alphabet = Alphabet(params.N)
    prefixes = _core_prefixes(params.N0, params.n - 1)
    blocks, classes = [], []
    for i in range(params.r):
        for pre in prefixes:
            blocks.append(Block(alphabet, tuple(pre) + (params.N0 + i,)))
            classes.append(i)
    return DesignatedFamily(params, tuple(blocks), tuple(classes))


def gen_example1(params: ExampleOneParams, length: int | None = None):
    """Sample the maximal-entropy Example 1 shift; returns (sequence, family).

    Each component ``C_i`` is a fresh uniform permutation of the
    ``N0**(n-1)`` blocks of class ``i``; classes cycle ``0, 1, ..., r-1``.
    A uniform phase over one full cycle stands in for stationarity.
    """
    length = params.length if length is None else length
    if length < 1:
        raise ValueError("length must be positive")
    m = params.blocks_per_class
    comp = params.component_length
    rng = stream(params.seed, "example1")
    offset = int(rng.integers(comp * params.r))
    first_class, within = divmod(offset, comp)
    count = -(-(within + length) // comp)
    perms = rng.permuted(np.tile(np.arange(m), (count, 1)), axis=1)
    prefixes = _core_prefixes(params.N0, params.n - 1)
    classes = (first_class + np.arange(count)) % params.r
    words = np.empty((count, m, params.n), dtype=np.int64)
    words[:, :, :-1] = prefixes[perms]
    words[:, :, -1] = (params.N0 + classes)[:, None]
    data = words.ravel()[within:within + length]
    rec = {"N0": params.N0, "n": params.n, "r": params.r, "length": length}
    seq = _sequence(Alphabet(params.N), data, "example1", rec, params.seed)
    return seq, example1_family(params)


def example1_entropy(N0: int, n: int) -> float:
    """Entropy in bits per symbol: log2((N0**(n-1))!) / (n * N0**(n-1))."""
    if N0 < 1 or n < 1:
        raise ValueError("N0 and n must be positive")
    m = N0 ** (n - 1)
    return math.lgamma(m + 1) / math.log(2) / (n * m)


# --------------------------------------------------------------------------
# Law-of-series modification

@dataclass(frozen=True)
class LawOfSeriesParams:
    """Parameters of the marker-grid word-removal construction.

    Components have length ``r = k*p`` or ``r + 1``; sub-block ``i`` of each
    component, together with the first ``N**2`` positions of the next
    sub-block, has every occurrence of word ``w_i`` overwritten by ``b**l``.
    """

    k: int
    l: int
    p: int
    N: int
    a: int = 0
    b: int = 1
    words: tuple[tuple[int, ...], ...] | None = None
    max_word_freq: float | None = None
    search_length: int | None = None
    seed: int = 0
    base: "ProcessSpec | None" = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.l < 2:
            raise ValueError("word length l must be at least 2")
        if not self.l < self.p:
            raise ValueError("need l < p")
        if self.N < 1 or self.N ** 2 > self.p:
            raise ValueError("need N >= 1 and N**2 <= p")
        if self.a == self.b or self.a < 0 or self.b < 0:
            raise ValueError("symbols a and b must be distinct and nonnegative")
        if self.words is not None:
            words = tuple(tuple(int(s) for s in w) for w in self.words)
            if len(words) != self.k:
                raise ValueError("expected %d words" % self.k)
            for w in words:
                if len(w) != self.l or w[0] != self.a or w[-1] != self.a:
                    raise ValueError("each word must have length l and start and end with a")
            object.__setattr__(self, "words", words)
        check_seed(self.seed)

    @property
    def r(self) -> int:
        return self.k * self.p

    def to_dict(self) -> dict:
        d = {f: getattr(self, f) for f in ("k", "l", "p", "N", "a", "b", "max_word_freq",
                                           "search_length", "seed")}
        d["words"] = None if self.words is None else [list(w) for w in self.words]
        d["base"] = None if self.base is None else self.base.to_dict()
        return d


@dataclass
class ConstructionLog:
    words: list[tuple[int, ...]]
    a: int
    b: int
    grid_start: int
    component_lengths: np.ndarray
    replacements: list[int]
    changed: int
    length: int

    @property
    def component_starts(self) -> np.ndarray:
        return self.grid_start + np.concatenate(([0], np.cumsum(self.component_lengths)[:-1]))

    @property
    def total_replacements(self) -> int:
        return int(sum(self.replacements))

    @property
    def fraction_changed(self) -> float:
        return self.changed / self.length

    @property
    def change_bound(self) -> float:
        """Upper bound on the changed fraction: replaced windows times l over length."""
        return self.total_replacements * len(self.words[0]) / self.length

    def to_dict(self) -> dict:
        return {
            "words": [list(w) for w in self.words],
            "a": self.a, "b": self.b,
            "grid_start": self.grid_start,
            "components": int(self.component_lengths.size),
            "components_r_plus_1": int(np.count_nonzero(self.component_lengths != self.component_lengths.min())),
            "replacements": list(self.replacements),
            "symbols_changed": self.changed,
            "fraction_changed": self.fraction_changed,
            "change_bound": self.change_bound,
        }


def word_positions(data: np.ndarray, word: Sequence[int]) -> np.ndarray:
    """Start indices of all (overlapping) occurrences of ``word`` in ``data``."""
    n = len(word)
    L = data.size
    if n > L:
        return np.empty(0, dtype=np.int64)
    mask = data[:L - n + 1] == word[0]
    for j in range(1, n):
        mask &= data[j:L - n + 1 + j] == word[j]
    return np.flatnonzero(mask)


def _isolated(pos: np.ndarray, others: np.ndarray, l: int) -> bool:
    """True if some position in ``pos`` is farther than ``l`` from all of ``others``."""
    if pos.size == 0:
        return False
    if others.size == 0:
        return True
    idx = np.searchsorted(others, pos)
    left = np.where(idx > 0, pos - others[np.maximum(idx - 1, 0)], np.iinfo(np.int64).max)
    right = np.where(idx < others.size, others[np.minimum(idx, others.size - 1)] - pos,
                     np.iinfo(np.int64).max)
    return bool(np.any((left > l) & (right > l)))


def select_words(data: np.ndarray, params: LawOfSeriesParams) -> list[tuple[int, ...]]:
    """Find ``k`` words of length ``l`` framed by ``a`` that occur in ``data``.

    Candidates are scanned from most to least frequent (ties broken
    lexicographically), skipping those above ``max_word_freq``. A word is
    accepted if it and every word already accepted keep at least one
    occurrence at distance more than ``l`` from the other words.
    """
    k, l, a = params.k, params.l, params.a
    if params.words is not None:
        words = list(params.words)
        pos = [word_positions(data, w) for w in words]
        for i, w in enumerate(words):
            others = np.sort(np.concatenate([pos[j] for j in range(k) if j != i] or [np.empty(0, np.int64)]))
            if not _isolated(pos[i], others, l):
                raise ValueError("words not found: %r has no isolated occurrence" % (w,))
        return words
    L = data.size
    if L < l:
        raise ValueError("words not found")
    starts = np.flatnonzero((data[:L - l + 1] == a) & (data[l - 1:] == a))
    if starts.size == 0:
        raise ValueError("words not found")
    windows = np.stack([data[starts + j] for j in range(l)], axis=1).astype(np.int64)
    cands, counts = np.unique(windows, axis=0, return_counts=True)
    cap = params.max_word_freq
    if cap is not None:
        keep = counts / (L - l + 1) <= cap
        cands, counts = cands[keep], counts[keep]
    order = np.lexsort((*cands.T[::-1], -counts))
    chosen: list[tuple[int, ...]] = []
    chosen_pos: list[np.ndarray] = []
    for idx in order:
        w = tuple(int(s) for s in cands[idx])
        pos = word_positions(data, w)
        trial = chosen_pos + [pos]
        ok = True
        for i in range(len(trial)):
            others = [trial[j] for j in range(len(trial)) if j != i]
            merged = np.sort(np.concatenate(others)) if others else np.empty(0, np.int64)
            if not _isolated(trial[i], merged, l):
                ok = False
                break
        if ok:
            chosen.append(w)
            chosen_pos.append(pos)
            if len(chosen) == k:
                return chosen
    raise ValueError("words not found: only %d of %d admissible words" % (len(chosen), k))


def marker_grid(length: int, params: LawOfSeriesParams):
    """Component lengths (r or r+1, fair coin) covering ``[grid_start, length)``.

    ``grid_start`` is a uniform phase in ``(-r, 0]``.
    """
    r = params.r
    rng = stream(params.seed, "lawofseries-grid")
    grid_start = -int(rng.integers(r))
    count = -(-(length - grid_start) // r) + 1
    lengths = r + rng.integers(0, 2, size=count)
    ends = grid_start + np.cumsum(lengths)
    keep = int(np.searchsorted(ends, length, side="left")) + 1
    return grid_start, lengths[:keep]


def subblock_classes(length: int, params: LawOfSeriesParams, grid_start: int,
                     lengths: np.ndarray):
    """Per-position sub-block class (0..k-1) and 'within first N**2 of its sub-block' flag."""
    k, p = params.k, params.p
    cls = np.empty(length, dtype=np.int64)
    head = np.zeros(length, dtype=bool)
    start = grid_start
    sub = np.full(k, p, dtype=np.int64)
    # per-component offsets are identical except the last sub-block's +1, so
    # build both templates once
    templates = {}
    for extra in (0, 1):
        sizes = sub.copy()
        sizes[-1] += extra + (params.r - k * p)
        c = np.repeat(np.arange(k), sizes)
        within = np.concatenate([np.arange(s) for s in sizes])
        templates[params.r + extra] = (c, within < params.N ** 2)
    for comp_len in lengths:
        c, h = templates[int(comp_len)]
        lo, hi = max(start, 0), min(start + comp_len, length)
        if hi > lo:
            cls[lo:hi] = c[lo - start:hi - start]
            head[lo:hi] = h[lo - start:hi - start]
        start += comp_len
    return cls, head


def apply_law_of_series(base_seq: SymbolSequence, params: LawOfSeriesParams):
    """Remove each word ``w_i`` from the ``i``-th sub-block of every component.

    Returns ``(modified_sequence, ConstructionLog)``.
    """
    A = base_seq.alphabet.size
    if max(params.a, params.b) >= A:
        raise ValueError("alphabet too small to reserve symbols a and b")
    data = np.array(base_seq.data, dtype=np.int64)
    L = data.size
    search = data if params.search_length is None else data[:params.search_length]
    words = select_words(search, params)

    grid_start, lengths = marker_grid(L, params)
    cls, head = subblock_classes(L, params, grid_start, lengths)
    k, l = params.k, params.l
    out = data.copy()
    replacements = []
    for i, w in enumerate(words):
        zone = (cls == i) | (head & (cls == (i + 1) % k))
        cand = word_positions(out, w)
        cand = cand[zone[cand]]
        taken = 0
        last_end = -1
        for s in cand:
            if s < last_end:
                continue  # destroyed by the previous overwrite
            out[s:s + l] = params.b
            last_end = s + l
            taken += 1
        replacements.append(taken)
    changed = int(np.count_nonzero(out != data))
    log = ConstructionLog(words, params.a, params.b, grid_start, lengths, replacements, changed, L)
    rec = {"base": base_seq.provenance.to_dict() if base_seq.provenance else None,
           "construction": params.to_dict()}
    rec["construction"].pop("base", None)
    seq = _sequence(base_seq.alphabet, out, "lawofseries", rec, params.seed)
    return seq, log


# --------------------------------------------------------------------------
# Process specs

@dataclass(frozen=True)
class ProcessSpec:
    variant: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError("unknown process variant %r" % self.variant)
        check_seed(self.seed)

    def to_dict(self) -> dict:
        return {"variant": self.variant, "params": _plain(self.params), "seed": int(self.seed)}

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessSpec":
        return cls(d["variant"], dict(d.get("params", {})), int(d.get("seed", 0)))

    def with_seed(self, seed: int) -> "ProcessSpec":
        return ProcessSpec(self.variant, self.params, seed)

    @property
    def digest(self) -> str:
        return digest(self.to_dict())

    @property
    def entropy_positive(self) -> bool | None:
        """Cheap positive-entropy indicator; None when not decidable here."""
        if self.variant == "periodic":
            return False
        if self.variant == "bernoulli":
            return max(self.params["probs"]) < 1.0
        if self.variant == "example1":
            return True
        return None


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, ProcessSpec):
        return obj.to_dict()
    return obj


def lawofseries_params(spec: ProcessSpec) -> LawOfSeriesParams:
    p = dict(spec.params)
    base = p.pop("base")
    base = base if isinstance(base, ProcessSpec) else ProcessSpec.from_dict(base)
    words = p.pop("words", None)
    if words is not None:
        words = tuple(tuple(w) for w in words)
    return LawOfSeriesParams(base=base, words=words, seed=spec.seed, **p)


def generate(spec: ProcessSpec, length: int) -> SymbolSequence:
    """Draw a sample path of ``length`` symbols from ``spec``."""
    v, p = spec.variant, spec.params
    if v == "bernoulli":
        return gen_bernoulli(p["probs"], length, spec.seed)
    if v == "markov":
        return gen_markov(p["transition"], p.get("initial"), length, spec.seed)
    if v == "periodic":
        alphabet = Alphabet(int(p.get("alphabet_size", max(p["pattern"]) + 1 if max(p["pattern"]) >= 1 else 2)))
        return gen_periodic(Block(alphabet, p["pattern"]), length, spec.seed, p.get("phase"))
    if v == "example1":
        params = ExampleOneParams(int(p["N0"]), int(p["n"]), int(p["r"]), length, spec.seed)
        return gen_example1(params)[0]
    params = lawofseries_params(spec)
    base_seq = generate(params.base, length)
    return apply_law_of_series(base_seq, params)[0]
