"""Invariants checked on generated inputs."""
import math
import pathlib
import tempfile
from collections import Counter

import numpy as np
from hypothesis import assume, given, strategies as st

from serieslab.analytic import lemma0_extremal, lemma0_mixture, markov_oracle, random_mean_family
from serieslab.core import (Alphabet, Block, EvalGrid, SymbolSequence, cdf_integral_of_survival,
                            ecdf_from_samples, survival_integral_curve)
from serieslab.seeding import stream
from serieslab.seqfile import read_sequence, write_sequence
from serieslab.stats import (analyze_occurrences, block_sweep, ngram_index, return_gaps,
                             scan_occurrences)

E1 = math.exp(-1.0)
samples = st.lists(st.floats(0.0, 50.0, allow_nan=False), min_size=1, max_size=60)
small_seqs = st.lists(st.integers(0, 2), min_size=8, max_size=300)


@given(samples)
def test_ecdf_shape(xs):
    F = ecdf_from_samples(xs)
    assert F.values[-1] == 1.0
    assert np.all(np.diff(F.values) > 0)
    assert F == ecdf_from_samples(sorted(xs, reverse=True))
    t = np.linspace(0, 60, 97)
    v = F(t)
    assert np.all((v >= 0) & (v <= 1)) and np.all(np.diff(v) >= 0)


@given(samples)
def test_survival_integral(xs):
    F = ecdf_from_samples(xs)
    t = np.linspace(0, 60, 61)
    G = cdf_integral_of_survival(F, t)
    mean = float(np.mean(xs))
    assert np.all(np.diff(G) >= -1e-12)
    assert np.all(np.diff(G) <= np.diff(t) + 1e-12)  # 1-Lipschitz
    assert np.all(G <= np.minimum(t, mean) + 1e-9)
    assert math.isclose(cdf_integral_of_survival(F, math.inf), mean, rel_tol=1e-9, abs_tol=1e-12)
    curve = survival_integral_curve(F)
    np.testing.assert_allclose(curve(t), G, atol=1e-9)


@given(small_seqs, st.lists(st.integers(0, 2), min_size=1, max_size=4))
def test_scan_matches_naive(data, word):
    s = SymbolSequence(Alphabet(3), np.array(data))
    assume(len(word) <= len(data))
    occ = scan_occurrences(s, Block(s.alphabet, word))
    naive = [i for i in range(len(data) - len(word) + 1) if data[i:i + len(word)] == word]
    assert occ.positions.tolist() == naive


@given(small_seqs, st.integers(1, 5))
def test_ngram_counts(data, n):
    assume(n <= len(data))
    s = SymbolSequence(Alphabet(3), np.array(data))
    idx = ngram_index(s, n)
    expect = Counter(tuple(data[i:i + n]) for i in range(len(data) - n + 1))
    got = {tuple(w): int(c) for w, c in zip(idx.words.tolist(), idx.counts)}
    assert got == dict(expect)


@given(st.integers(0, 2**32), st.integers(1, 6))
def test_normalized_gap_mean_and_repel_cap(seed, n):
    rng = stream(seed, "prop")
    data = rng.integers(0, 2, size=3000)
    s = SymbolSequence(Alphabet(2), data)
    sw = block_sweep(s, n, min_count=5)
    for r in sw.records:
        # mean normalized gap is (last - first)/(count - 1) * count/W, within a
        # factor count/(count-1) of at most one
        assert r.mean_normalized_gap <= r.count / (r.count - 1) + 1e-12
        assert r.eps_repel <= E1 + 1.0 / (r.count - 1) + 1e-12
        assert r.eps_repel >= 0 and r.eps_attract >= 0
    assert math.isclose(sw.resolved_mass + sw.unresolved_mass, 1.0, rel_tol=1e-12)


@given(st.integers(0, 2**32))
def test_gaps_telescope(seed):
    data = stream(seed, "prop").integers(0, 2, size=500)
    s = SymbolSequence(Alphabet(2), data)
    occ = scan_occurrences(s, Block(s.alphabet, (0, 1)))
    assume(occ.count >= 2)
    gaps = return_gaps(occ)
    assert gaps.sum() == occ.positions[-1] - occ.positions[0]
    assert np.all(gaps >= 1)


@st.composite
def chains(draw):
    A = draw(st.integers(2, 3))
    rows = []
    for _ in range(A):
        w = np.array(draw(st.lists(st.floats(0.1, 1.0), min_size=A, max_size=A)))
        rows.append(w / w.sum())
    word = draw(st.lists(st.integers(0, A - 1), min_size=1, max_size=4))
    return np.array(rows), word


@given(chains())
def test_oracle_mass_and_kac(ch):
    P, word = ch
    res = markov_oracle(P, Block(Alphabet(P.shape[0]), word))
    assert math.isclose(res.pmf.sum() + res.tail_mass, 1.0, abs_tol=1e-9)
    assert np.all(res.pmf >= 0)
    # the truncated mean misses at most the tail's share of the Kac mean
    assert abs(res.partial_mean() * res.mu - 1.0) < 1e-4


@given(st.floats(0.05, 0.95), st.integers(0, 2**32))
def test_lemma0_extremal_dominates(p, seed):
    rng = stream(seed, "prop-lemma0")
    fam = random_mean_family(p, rng)
    t = EvalGrid.geometric().points
    assert np.all(lemma0_mixture(p, fam, t) <= lemma0_extremal(p, t) + 1e-12)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=200))
def test_seqfile_roundtrip(data):
    s = SymbolSequence(Alphabet(5), np.array(data))
    with tempfile.TemporaryDirectory() as d:
        path = pathlib.Path(d) / "s.bin"
        write_sequence(path, s)
        assert read_sequence(path) == s


@given(st.integers(0, 2**64 - 1), st.text(min_size=1, max_size=8), st.text(min_size=1, max_size=8))
def test_named_streams(seed, a, b):
    assume(a != b)
    x = stream(seed, a).integers(0, 2**62, 3)
    assert np.array_equal(x, stream(seed, a).integers(0, 2**62, 3))
    assert not np.array_equal(x, stream(seed, b).integers(0, 2**62, 3))
