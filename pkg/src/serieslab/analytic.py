"""Closed-form references and exact oracles for return-time laws."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DEFAULT_GRID, Block, EvalGrid, StepCdf, weighted_step_cdf
from .processes import _prob_vector, _stochastic_matrix, stationary_distribution

ORACLE_MAX_TAIL = 1e-6
MIXTURE_TAIL = 1e-9
MEAN_TOL = 1e-9


def exp_law(t):
    """The unbiased reference law ``1 - exp(-t)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative time")
    out = -np.expm1(-t)
    return out if out.ndim else float(out)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return p


def log_e_p(p: float) -> float:
    """Natural log of ``e_p = (1 - p)**(-1/p)``; tends to 1 as p -> 0."""
    p = _check_p(p)
    return -math.log1p(-p) / p


def lemma0_bound(p: float, t):
    """Upper bound ``(1 - e_p**-t) / ln(e_p)`` on the integrated survival of a
    geometric mixture of mean-k laws."""
    le = log_e_p(p)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative time")
    out = -np.expm1(-le * t) / le
    return out if out.ndim else float(out)


def lemma0_extremal(p: float, t):
    """Exact integrated survival of the indicator mixture (the pointwise maximizer).

    With ``j = floor(t/p)`` this is ``1 - (1-p)**j * (1 - (t - j*p))``. It sits
    above :func:`lemma0_bound` by up to ``1 - p / -log(1-p)``, because the
    geometric tail ``sum_{k>=m} p (1-p)**(k-1)`` equals ``(1-p)**(m-1)``.
    """
    p = _check_p(p)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative time")
    j = np.floor(t / p)
    out = 1.0 - (1.0 - p) ** j * (1.0 - (t - j * p))
    return out if out.ndim else float(out)


def lemma0_corrected_bound(p: float, t):
    """``lemma0_bound(p, t) / (1 - p)``, which dominates :func:`lemma0_extremal`."""
    p = _check_p(p)
    out = np.asarray(lemma0_bound(p, t)) / (1.0 - p)
    return out if out.ndim else float(out)


def discretization_gap(p: float) -> float:
    """``sup_t lemma0_extremal(p, t) - lemma0_bound(p, t)``, reached as t -> inf."""
    p = _check_p(p)
    return 1.0 - p / -math.log1p(-p)


def gp_envelope(p: float, t):
    """``min(1, lemma0_bound(p, t) + p*t)``."""
    out = np.minimum(1.0, lemma0_bound(p, t) + p * np.asarray(t, dtype=float))
    return out if np.ndim(out) else float(out)


def mixture_weights(p: float, K: int) -> np.ndarray:
    """Geometric weights ``p (1-p)**(k-1)`` for k = 1..K."""
    return p * (1.0 - p) ** np.arange(K)


def truncation_order(p: float, tail: float = MIXTURE_TAIL) -> int:
    """Smallest K with ``p (1-p)**K < tail``."""
    p = _check_p(p)
    return max(1, int(math.floor(math.log(tail / p) / math.log1p(-p))) + 1)


def lemma0_mixture(p: float, family: Sequence[StepCdf], t):
    """Integrated survival of ``sum_k p (1-p)**(k-1) F_k(t / p)``.

    ``family[k-1]`` must have mean ``k``; the family must be long enough that
    the dropped geometric tail weight ``p (1-p)**K`` is below 1e-9.
    """
    p = _check_p(p)
    K = len(family)
    if K == 0 or p * (1.0 - p) ** K >= MIXTURE_TAIL:
        raise ValueError("family too short: geometric tail weight %.3g >= %g"
                         % (p * (1.0 - p) ** K if K else 1.0, MIXTURE_TAIL))
    for k, F in enumerate(family, start=1):
        if abs(F.mean() - k) > MEAN_TOL * k:
            raise ValueError("mean violation: member %d has mean %r" % (k, F.mean()))
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative time")
    # each member is a proper step law, so int_0^s (1 - F) = E[min(s, X)];
    # pooling the scaled atoms p*x with weights w_k * mass gives G(t) = E[min(t, Y)]
    w = mixture_weights(p, K)
    y = np.concatenate([p * F.jumps for F in family])
    mass = np.concatenate([wk * np.diff(F.values, prepend=0.0) for wk, F in zip(w, family)])
    order = np.argsort(y, kind="stable")
    y, mass = y[order], mass[order]
    below = np.concatenate(([0.0], np.cumsum(mass * y)))
    cum = np.concatenate(([0.0], np.cumsum(mass)))
    i = np.searchsorted(y, t, side="right")
    total = below[i] + t * (cum[-1] - cum[i])
    return total if total.ndim else float(total)


def indicator_family(K: int) -> list[StepCdf]:
    """The extremal family ``1_[k, inf)``, k = 1..K."""
    return [StepCdf([float(k)], [1.0]) for k in range(1, K + 1)]


def random_mean_family(p: float, rng: np.random.Generator, max_atoms: int = 4,
                       spread: float = 3.0) -> list[StepCdf]:
    """Random finite-support laws ``F^(k)`` with mean exactly ``k``, k = 1..K.

    Each member has 1..max_atoms atoms drawn uniformly on ``[0, spread*k)``
    with flat Dirichlet weights, then rescaled so the mean is ``k``. K is the
    :func:`truncation_order` of ``p``.
    """
    K = truncation_order(p)
    k = np.arange(1, K + 1, dtype=float)
    m = rng.integers(1, max_atoms + 1, size=K)
    member = np.repeat(np.arange(K), m)
    x = rng.uniform(0.0, spread, size=member.size) * k[member]
    w = rng.exponential(size=member.size)
    first = np.concatenate(([0], np.cumsum(m)[:-1]))
    w /= np.add.reduceat(w, first)[member]
    mean = np.add.reduceat(w * x, first)
    x *= (k / mean)[member]
    order = np.lexsort((x, member))
    x, w = x[order], w[order]
    family = []
    for i in range(K):
        lo, hi = first[i], first[i] + m[i]
        xi, wi = x[lo:hi], w[lo:hi]
        if xi.size > 1 and np.any(np.diff(xi) <= 0):
            family.append(weighted_step_cdf(xi, wi))
            continue
        vals = np.cumsum(wi)
        vals[-1] = 1.0
        surv = np.concatenate(([1.0], 1.0 - vals[:-1]))
        area = np.cumsum(np.diff(xi, prepend=0.0) * surv)
        family.append(StepCdf._trusted(xi.copy(), vals, area))
    return family


def envelope_threshold(eps: float, grid: EvalGrid = DEFAULT_GRID, iters: int = 60) -> float:
    """Largest p (by bisection) with ``gp_envelope(p, t) - exp_law(t) <= eps`` on the grid."""
    t = grid.points
    ref = exp_law(t)

    def excess(p):
        return float(np.max(gp_envelope(p, t) - ref))

    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if excess(mid) <= eps:
            lo = mid
        else:
            hi = mid
    return lo


def kac_expectation(mu: float) -> float:
    """Mean return time ``1 / mu`` of a set of measure ``mu``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    return 1.0 / mu


# --------------------------------------------------------------------------
# Exact return-time law of a block in a finite Markov chain

@dataclass(frozen=True)
class MarkovOracleSpec:
    transition: np.ndarray
    block: Block
    horizon: int
    initial: np.ndarray | None = None
    max_tail: float = ORACLE_MAX_TAIL


@dataclass(frozen=True)
class OracleResult:
    mu: float
    pmf: np.ndarray       # pmf[i-1] = P(R_B = i | B), i = 1..horizon
    tail_mass: float

    @property
    def horizon(self) -> int:
        return int(self.pmf.size)

    @property
    def cdf(self) -> StepCdf:
        """Law of the normalized return time ``mu * R_B``."""
        return self.scaled_cdf(self.mu)

    @property
    def absolute_cdf(self) -> StepCdf:
        return self.scaled_cdf(1.0)

    def scaled_cdf(self, scale: float) -> StepCdf:
        i = np.arange(1, self.horizon + 1, dtype=float)
        return weighted_step_cdf(i * scale, self.pmf)

    def partial_mean(self) -> float:
        return float(np.dot(np.arange(1, self.horizon + 1), self.pmf))


def _border_automaton(word: Sequence[int], A: int) -> np.ndarray:
    """KMP transition table ``delta[state, symbol]`` for states 0..n."""
    n = len(word)
    fail = [0] * (n + 1)
    k = 0
    for i in range(1, n):
        while k and word[i] != word[k]:
            k = fail[k]
        if word[i] == word[k]:
            k += 1
        fail[i + 1] = k
    delta = np.zeros((n + 1, A), dtype=np.int64)
    for s in range(n + 1):
        for x in range(A):
            if s < n and word[s] == x:
                delta[s, x] = s + 1
            elif s == 0:
                delta[s, x] = 0
            else:
                delta[s, x] = delta[fail[s], x]
    return delta


def block_measure(transition, block: Block, initial=None) -> float:
    P = _stochastic_matrix(transition)
    pi = stationary_distribution(P) if initial is None else _prob_vector(initial)
    w = block.word
    mu = pi[w[0]]
    for a, b in zip(w[:-1], w[1:]):
        mu *= P[a, b]
    return float(mu)


def markov_return_oracle(spec: MarkovOracleSpec) -> OracleResult:
    """Exact law of the first return time to ``spec.block`` up to ``spec.horizon``.

    Starting from a visit to the block, the chain is run through the
    pattern-matching automaton; the taboo recursion keeps the mass that has
    not yet completed the block and records the mass completing it at each
    step.
    """
    P = _stochastic_matrix(spec.transition)
    A = P.shape[0]
    word = spec.block.word
    if spec.block.alphabet.size != A:
        raise ValueError("block alphabet does not match the chain")
    n = len(word)
    H = int(spec.horizon)
    if H < 1:
        raise ValueError("horizon must be positive")
    mu = block_measure(P, spec.block, spec.initial)
    if mu <= 0:
        raise ValueError("block has zero stationary measure")
    delta = _border_automaton(word, A)
    # combined state (automaton state s < n, last symbol c) -> index s*A + c
    S = n * A
    M = np.zeros((S, S))
    hit = np.zeros(S)
    for s in range(n):
        for c in range(A):
            for x in range(A):
                if P[c, x] == 0:
                    continue
                s2 = delta[s, x]
                if s2 == n:
                    hit[s * A + c] += P[c, x]
                else:
                    M[s * A + c, s2 * A + x] += P[c, x]
    v = np.zeros(S)
    v[_after_match_state(delta, word) * A + word[-1]] = 1.0
    pmf = np.empty(H)
    for i in range(H):
        pmf[i] = v @ hit
        v = v @ M
    tail = max(0.0, 1.0 - math.fsum(pmf))
    tail = max(tail, float(v.sum()))
    if tail > spec.max_tail:
        raise ValueError("horizon too small: tail mass %.3g exceeds %g" % (tail, spec.max_tail))
    return OracleResult(mu, pmf, tail)


def _after_match_state(delta: np.ndarray, word) -> int:
    """Automaton state right after a full match (the longest proper border)."""
    s = 0
    for x in word[1:]:
        s = delta[s, x]
    return int(s)


def markov_oracle(transition, block: Block, horizon: int | None = None, initial=None,
                  max_tail: float = ORACLE_MAX_TAIL) -> OracleResult:
    """Convenience wrapper; ``horizon=None`` doubles the horizon until the tail is small."""
    if horizon is not None:
        return markov_return_oracle(MarkovOracleSpec(np.asarray(transition, float), block,
                                                     horizon, initial, max_tail))
    H = max(16, 8 * int(math.ceil(1.0 / max(block_measure(transition, block, initial), 1e-300))))
    while True:
        try:
            return markov_return_oracle(MarkovOracleSpec(np.asarray(transition, float), block,
                                                         H, initial, max_tail))
        except ValueError as exc:
            if "horizon too small" not in str(exc) or H > 10**7:
                raise
            H *= 2
