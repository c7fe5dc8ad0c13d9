"""Occurrence scanning and empirical return/hitting-time statistics.

All estimates are normalized by the empirical block frequency
``mu_hat = count / (L - n + 1)``, so nothing here needs a model of the
process that produced the sequence.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (DEFAULT_GRID, Block, EvalGrid, LinearCdf, StepCdf, SymbolSequence,
                   survival_integral_curve)
from .seeding import stream

MIN_COUNT = 50
CSV_COLUMNS = ("block", "count", "mu_hat", "eps_repel", "t_repel", "eps_attract", "t_attract", "ks_exp")


@dataclass(frozen=True)
class OccurrenceList:
    block: Block
    positions: np.ndarray
    length: int  # sequence length L; the scan window is [0, L - n]

    @property
    def count(self) -> int:
        return int(self.positions.size)

    @property
    def window(self) -> tuple[int, int]:
        return 0, self.length - self.block.n

    @property
    def mu_hat(self) -> float:
        return self.count / (self.length - self.block.n + 1)


def _check_block(seq: SymbolSequence, block: Block) -> None:
    if block.alphabet.size != seq.alphabet.size:
        raise ValueError("block over wrong alphabet (size %d, sequence alphabet %d)"
                         % (block.alphabet.size, seq.alphabet.size))
    if block.n > len(seq):
        raise ValueError("block longer than the sequence")


def scan_occurrences(seq: SymbolSequence, block: Block) -> OccurrenceList:
    """All start positions of ``block`` in ``seq``, overlaps included."""
    _check_block(seq, block)
    data = seq.data
    n, L = block.n, len(seq)
    mask = data[:L - n + 1] == block.word[0]
    for j in range(1, n):
        mask &= data[j:L - n + 1 + j] == block.word[j]
    return OccurrenceList(block, np.flatnonzero(mask), L)


def return_gaps(occ: OccurrenceList) -> np.ndarray:
    """Consecutive differences of occurrence positions (censored tail dropped)."""
    if occ.count < 2:
        raise ValueError("insufficient occurrences")
    return np.diff(occ.positions)


def kth_return_samples(occ: OccurrenceList, k: int) -> np.ndarray:
    """Distances from each occurrence to the k-th following one."""
    if k < 1:
        raise ValueError("k must be positive")
    if occ.count < k + 1:
        raise ValueError("insufficient occurrences")
    pos = occ.positions
    return pos[k:] - pos[:-k]


def return_cdf(gaps, mu_hat: float) -> StepCdf:
    """ECDF of the normalized gaps ``mu_hat * g``."""
    if mu_hat <= 0:
        raise ValueError("mu_hat must be positive")
    gaps = np.asarray(gaps)
    if gaps.size == 0:
        raise ValueError("no samples")
    uniq, counts = np.unique(gaps, return_counts=True)
    values = np.cumsum(counts) / gaps.size
    values[-1] = 1.0
    return StepCdf(uniq * mu_hat, values)


class HittingEstimate(NamedTuple):
    g_curve: np.ndarray
    cdf: LinearCdf
    bias_bound: float


def hitting_cdf_via_g(ret_cdf: StepCdf, mu_hat: float, grid: EvalGrid = DEFAULT_GRID) -> HittingEstimate:
    """Integrated survival ``G_B`` of the return law, the default hitting-time surrogate.

    ``G_B - mu <= F_B <= G_B``, so the surrogate overstates ``F_B`` by at
    most ``mu_hat`` (reported as ``bias_bound``).
    """
    curve = survival_integral_curve(ret_cdf)
    return HittingEstimate(curve(grid.points), curve, float(mu_hat))


class DirectHitting(NamedTuple):
    cdf: StepCdf
    used: int
    dropped: int


def hitting_cdf_direct(seq: SymbolSequence, block: Block, num_starts: int, seed: int,
                       occ: OccurrenceList | None = None) -> DirectHitting:
    """ECDF of normalized waiting times from uniformly drawn starts.

    The wait from start ``s`` is ``min{i >= 1 : block occurs at s + i}``.
    Starts whose wait runs past the end of the sequence are dropped.
    """
    if num_starts < 1:
        raise ValueError("num_starts must be positive")
    if occ is None:
        occ = scan_occurrences(seq, block)
    if occ.count == 0:
        raise ValueError("zero occurrences of block %s" % block.text())
    rng = stream(seed, "hitting-starts")
    starts = rng.integers(0, occ.length - block.n + 1, size=num_starts)
    idx = np.searchsorted(occ.positions, starts, side="right")
    ok = idx < occ.count
    waits = occ.positions[idx[ok]] - starts[ok]
    dropped = int(num_starts - ok.sum())
    if waits.size == 0:
        raise ValueError("every start was censored")
    uniq, counts = np.unique(waits, return_counts=True)
    values = np.cumsum(counts) / waits.size
    values[-1] = 1.0
    return DirectHitting(StepCdf(uniq * occ.mu_hat, values), int(waits.size), dropped)


class Intensities(NamedTuple):
    eps_repel: float
    t_repel: float
    eps_attract: float
    t_attract: float


def _eval_points(cdf, grid: EvalGrid):
    """Evaluation times and CDF values: grid, breakpoints and left limits at jumps."""
    bp = cdf.breakpoints()
    t = grid.with_points(bp)
    f = cdf(t)
    if isinstance(cdf, StepCdf):
        jumps = bp[bp > 0]
        t = np.concatenate((t, jumps))
        f = np.concatenate((f, cdf.left_limit(jumps)))
    return t, f


def intensities(cdf, grid: EvalGrid = DEFAULT_GRID) -> Intensities:
    """Largest repelling and attracting gaps against ``1 - exp(-t)`` with witnesses."""
    t, f = _eval_points(cdf, grid)
    expo = -np.expm1(-t)
    up = f - expo
    i_r = int(np.argmax(up))
    i_a = int(np.argmin(up))
    return Intensities(max(float(up[i_r]), 0.0), float(t[i_r]),
                       max(float(-up[i_a]), 0.0), float(t[i_a]))


def ks_to_exponential(cdf, grid: EvalGrid = DEFAULT_GRID) -> float:
    """Sup distance between ``cdf`` and ``1 - exp(-t)`` over the evaluation points."""
    t, f = _eval_points(cdf, grid)
    return float(np.max(np.abs(f + np.expm1(-t))))


@dataclass
class BlockRecord:
    block: Block
    count: int
    mu_hat: float
    return_cdf: StepCdf
    hitting_cdf: LinearCdf
    g_curve: np.ndarray
    eps_repel: float
    t_repel: float
    eps_attract: float
    t_attract: float
    ks_exp: float
    mean_normalized_gap: float

    def csv_row(self) -> list:
        return [self.block.text(), self.count, self.mu_hat, self.eps_repel, self.t_repel,
                self.eps_attract, self.t_attract, self.ks_exp]

    def to_dict(self, curves: bool = True) -> dict:
        d = dict(zip(CSV_COLUMNS, self.csv_row()))
        d["mean_normalized_gap"] = self.mean_normalized_gap
        if curves:
            d["return_cdf"] = self.return_cdf.to_dict()
            d["hitting_cdf"] = self.hitting_cdf.to_dict()
            d["g_curve"] = self.g_curve.tolist()
        return d


def analyze_occurrences(occ: OccurrenceList, grid: EvalGrid = DEFAULT_GRID) -> BlockRecord:
    """Full measurement bundle for one block with at least two occurrences.

    Same quantities as chaining :func:`return_cdf`, :func:`hitting_cdf_via_g`
    and :func:`intensities`, fused to keep the per-block cost low in sweeps.
    """
    mu = occ.mu_hat
    gaps = return_gaps(occ)
    uniq, counts = np.unique(gaps, return_counts=True)
    values = np.cumsum(counts) / gaps.size
    values[-1] = 1.0
    x = uniq * mu
    surv_before = np.empty_like(values)
    surv_before[0] = 1.0
    surv_before[1:] = 1.0 - values[:-1]
    area = np.cumsum(np.diff(x, prepend=0.0) * surv_before)
    rc = StepCdf._trusted(x, values, area)
    knots = np.concatenate(([0.0], x))
    gvals = np.concatenate(([0.0], area))
    curve = LinearCdf._trusted(knots, gvals)
    pts = grid.points
    g_grid = np.interp(pts, knots, gvals)
    # G is linear between knots and 1 - exp(-t) is concave, so repelling
    # peaks at knots; the grid refines attracting
    t = np.concatenate((x, pts))
    up = np.concatenate((area, g_grid)) + np.expm1(-t)
    i_r, i_a = int(np.argmax(up)), int(np.argmin(up))
    eps_r, eps_a = max(float(up[i_r]), 0.0), max(float(-up[i_a]), 0.0)
    return BlockRecord(
        block=occ.block, count=occ.count, mu_hat=mu, return_cdf=rc, hitting_cdf=curve,
        g_curve=g_grid, eps_repel=eps_r, t_repel=float(t[i_r]),
        eps_attract=eps_a, t_attract=float(t[i_a]), ks_exp=max(eps_r, eps_a),
        mean_normalized_gap=float(area[-1]),
    )


def analyze_block(seq: SymbolSequence, block: Block, grid: EvalGrid = DEFAULT_GRID) -> BlockRecord:
    return analyze_occurrences(scan_occurrences(seq, block), grid)


# --------------------------------------------------------------------------
# Sweeps over all n-blocks

@dataclass(frozen=True)
class NgramIndex:
    """Occurrence lists of every distinct n-block, grouped by exact integer key.

    ``order[starts[g]:starts[g+1]]`` are the (sorted) positions of group ``g``;
    ``words[g]`` is its word. Groups are in lexicographic word order.
    """

    n: int
    length: int
    words: np.ndarray
    starts: np.ndarray
    order: np.ndarray

    def positions(self, g: int) -> np.ndarray:
        return self.order[self.starts[g]:self.starts[g + 1]]

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.starts)


def ngram_index(seq: SymbolSequence, n: int) -> NgramIndex:
    """One pass over ``seq`` collecting the occurrence lists of all n-blocks.

    Each window is keyed by its base-``A`` integer value, which is exact (no
    collisions) as long as ``A**n`` fits in 63 bits; longer windows fall back
    to keying by the raw bytes of the window.
    """
    L = len(seq)
    if n < 1 or n > L:
        raise ValueError("block length n=%d is out of range for a sequence of length %d" % (n, L))
    A = seq.alphabet.size
    data = seq.data
    W = L - n + 1
    if n * math.log2(A) < 63:
        key = np.zeros(W, dtype=np.int64)
        for j in range(n):
            key *= A
            key += data[j:j + W]
        order = np.argsort(key, kind="stable")
        sk = key[order]
    else:
        win = np.lib.stride_tricks.sliding_window_view(np.asarray(data, dtype=np.uint8), n)
        key = np.ascontiguousarray(win).view(np.dtype((np.void, n))).ravel()
        order = np.argsort(key, kind="stable")
        sk = key[order]
    brk = np.flatnonzero(sk[1:] != sk[:-1]) + 1
    starts = np.concatenate(([0], brk, [W]))
    first = order[starts[:-1]]
    words = np.stack([data[first + j] for j in range(n)], axis=1).astype(np.int64)
    return NgramIndex(n, L, words, starts, order)


@dataclass
class SweepResult:
    n: int
    length: int
    records: list[BlockRecord]
    unresolved_mass: float
    unresolved_blocks: int
    min_count: int

    @property
    def resolved_mass(self) -> float:
        return float(math.fsum(r.mu_hat for r in self.records))

    def weighted_repel_measure(self, eps: float) -> float:
        """Total ``mu_hat`` of resolved blocks repelling with intensity at least ``eps``."""
        return float(math.fsum(r.mu_hat for r in self.records if r.eps_repel >= eps))

    def weighted_attract_measure(self, eps: float) -> float:
        return float(math.fsum(r.mu_hat for r in self.records if r.eps_attract >= eps))

    def weighted_measure(self, predicate) -> float:
        return float(math.fsum(r.mu_hat for r in self.records if predicate(r)))

    def to_csv(self, extra: dict | None = None) -> str:
        """CSV in lexicographic block order; ``extra`` adds constant leading columns."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        extra = extra or {}
        w.writerow(list(extra) + list(CSV_COLUMNS))
        for r in self.records:
            w.writerow(list(extra.values()) + r.csv_row())
        return buf.getvalue()


def block_sweep(seq: SymbolSequence, n: int, min_count: int = MIN_COUNT,
                grid: EvalGrid = DEFAULT_GRID, threads: int = 1) -> SweepResult:
    """Measure every n-block occurring at least ``min_count`` times.

    Blocks below the threshold are pooled into ``unresolved_mass``; the
    resolved and unresolved masses add up to 1 (every window counted once).
    """
    if min_count < 2:
        raise ValueError("min_count must be at least 2")
    idx = ngram_index(seq, n)
    W = idx.length - n + 1
    counts = idx.counts
    resolved = np.flatnonzero(counts >= min_count)
    unresolved = counts[counts < min_count]
    alphabet = seq.alphabet

    def work(g):
        block = Block(alphabet, tuple(idx.words[g]))
        occ = OccurrenceList(block, idx.positions(g), idx.length)
        return analyze_occurrences(occ, grid)

    if threads > 1 and resolved.size > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, resolved))
    else:
        records = [work(g) for g in resolved]
    return SweepResult(n, idx.length, records, float(unresolved.sum() / W),
                       int(unresolved.size), min_count)
