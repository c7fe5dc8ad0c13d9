"""End-to-end experiments producing deterministic JSON/CSV reports.

Each ``run_*`` function generates its own sample from an explicit seed, so
re-running with the same arguments gives byte-identical output regardless
of the thread count.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .core import (DEFAULT_GRID, EvalGrid, StepCdf, SymbolSequence, ecdf_from_samples,
                   survival_integral_curve)
from .processes import (ExampleOneParams, LawOfSeriesParams, ProcessSpec, apply_law_of_series,
                        example1_entropy, gen_example1, generate)
from .stats import (MIN_COUNT, OccurrenceList, SweepResult, analyze_occurrences, block_sweep,
                    ks_to_exponential, ngram_index, return_gaps, scan_occurrences)

REPEL_CAP = math.exp(-1.0)
DKW_ALPHA = 1e-6
MAX_PROBE_LENGTHS = 12


def dumps(obj) -> str:
    """Canonical JSON used for every report."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _median(values) -> float:
    return float(np.median(values)) if len(values) else float("nan")


def dkw_bound(count: int, alpha: float = DKW_ALPHA) -> float:
    """Dvoretzky-Kiefer-Wolfowitz sup-deviation bound at confidence 1 - alpha."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * count))


def smooth_adjacent(series) -> np.ndarray:
    """Three-point moving average over adjacent lengths (two-point at the ends)."""
    s = np.asarray(series, dtype=float)
    out = np.empty_like(s)
    for i in range(s.size):
        out[i] = s[max(i - 1, 0):i + 2].mean()
    return out


def is_nonincreasing(series, tol: float = 1e-12) -> bool:
    s = np.asarray(series, dtype=float)
    return bool(np.all(np.diff(s) <= tol))


# --------------------------------------------------------------------------
# Theorem 1: prevalence of repelling across block lengths

@dataclass
class SweepReport:
    process: dict
    seed: int
    sample_length: int
    eps_list: list[float]
    min_count: int
    rows: list[dict]
    sweeps: list[SweepResult] = field(default_factory=list, repr=False)

    def series(self, eps: float) -> list[float]:
        key = _eps_key(eps)
        return [row["repel_mass"][key] for row in self.rows]

    @property
    def lengths(self) -> list[int]:
        return [row["n"] for row in self.rows]

    def to_dict(self) -> dict:
        return {"kind": "theorem1_sweep", "process": self.process, "seed": self.seed,
                "sample_length": self.sample_length, "eps": self.eps_list,
                "min_count": self.min_count, "rows": self.rows}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        keys = [_eps_key(e) for e in self.eps_list]
        header = (["seed", "n", "resolved_blocks", "resolved_mass", "unresolved_mass"]
                  + ["repel_mass@" + k for k in keys] + ["attract_mass@" + k for k in keys]
                  + ["median_eps_repel", "median_ks_exp"])
        rows = [[self.seed, r["n"], r["resolved_blocks"], r["resolved_mass"], r["unresolved_mass"]]
                + [r["repel_mass"][k] for k in keys] + [r["attract_mass"][k] for k in keys]
                + [r["median_eps_repel"], r["median_ks_exp"]] for r in self.rows]
        return _csv(header, rows)

    def block_csv(self, n: int) -> str:
        sweep = next(s for s in self.sweeps if s.n == n)
        return sweep.to_csv(extra={"seed": self.seed, "n": n})


def _eps_key(eps: float) -> str:
    return repr(float(eps))


def _sweep_row(sweep: SweepResult, eps_list) -> dict:
    recs = sweep.records
    return {
        "n": sweep.n,
        "resolved_blocks": len(recs),
        "resolved_mass": sweep.resolved_mass,
        "unresolved_mass": sweep.unresolved_mass,
        "unresolved_blocks": sweep.unresolved_blocks,
        "repel_mass": {_eps_key(e): sweep.weighted_repel_measure(e) for e in eps_list},
        "attract_mass": {_eps_key(e): sweep.weighted_attract_measure(e) for e in eps_list},
        "median_eps_repel": _median([r.eps_repel for r in recs]),
        "max_eps_repel": max((r.eps_repel for r in recs), default=float("nan")),
        "median_ks_exp": _median([r.ks_exp for r in recs]),
    }


def run_theorem1_sweep(spec: ProcessSpec, lengths, eps_list=(0.1,), sample_length: int = 10**6,
                       seed: int | None = None, min_count: int = MIN_COUNT,
                       grid: EvalGrid = DEFAULT_GRID, threads: int = 1,
                       seq: SymbolSequence | None = None) -> SweepReport:
    """Weighted measure of repelling n-blocks for each n in ``lengths``."""
    spec = spec if seed is None else spec.with_seed(seed)
    if seq is None:
        seq = generate(spec, sample_length)
    eps_list = [float(e) for e in eps_list]
    sweeps = [block_sweep(seq, int(n), min_count, grid, threads) for n in lengths]
    rows = [_sweep_row(s, eps_list) for s in sweeps]
    return SweepReport(spec.to_dict(), spec.seed, len(seq), eps_list, min_count, rows, sweeps)


# --------------------------------------------------------------------------
# Unbiased behaviour of i.i.d. processes

@dataclass
class UnbiasedReport:
    process: dict
    seed: int
    sample_length: int
    rows: list[dict]

    def to_dict(self) -> dict:
        return {"kind": "unbiased_check", "process": self.process, "seed": self.seed,
                "sample_length": self.sample_length, "rows": self.rows}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        header = ["seed", "n", "resolved_blocks", "median_ks_exp", "max_ks_exp", "oracle_ks_exp"]
        return _csv(header, [[self.seed] + [r[h] for h in header[1:]] for r in self.rows])


def _iid_oracle_ks(spec: ProcessSpec, sweep: SweepResult, grid: EvalGrid) -> float:
    """Median over resolved blocks of the exact integrated-survival KS distance."""
    probs = np.asarray(spec.params["probs"], dtype=float)
    P = np.tile(probs, (probs.size, 1))
    vals = []
    for rec in sweep.records:
        res = analytic.markov_oracle(P, rec.block, initial=probs, max_tail=1e-9)
        cdf = res.cdf
        # close the (<1e-9) defective tail at the horizon
        cdf = StepCdf(cdf.jumps, np.concatenate((cdf.values[:-1], [1.0])))
        vals.append(ks_to_exponential(survival_integral_curve(cdf), grid))
    return _median(vals)


def run_unbiased_check(spec: ProcessSpec, lengths, sample_length: int = 10**6,
                       seed: int | None = None, min_count: int = MIN_COUNT,
                       grid: EvalGrid = DEFAULT_GRID, threads: int = 1,
                       oracle: bool = True) -> UnbiasedReport:
    """Median and max KS distance to ``1 - exp(-t)`` per length for an i.i.d. process.

    With ``oracle=True`` each row also carries the median KS distance of the
    exact integrated-survival curves of the same blocks.
    """
    if spec.variant != "bernoulli":
        raise ValueError("run_unbiased_check needs an i.i.d. (bernoulli) process")
    spec = spec if seed is None else spec.with_seed(seed)
    seq = generate(spec, sample_length)
    rows = []
    for n in lengths:
        sweep = block_sweep(seq, int(n), min_count, grid, threads)
        ks = [r.ks_exp for r in sweep.records]
        rows.append({"n": int(n), "resolved_blocks": len(ks), "median_ks_exp": _median(ks),
                     "max_ks_exp": max(ks, default=float("nan")),
                     "oracle_ks_exp": _iid_oracle_ks(spec, sweep, grid) if oracle else None})
    return UnbiasedReport(spec.to_dict(), spec.seed, len(seq), rows)


# --------------------------------------------------------------------------
# Oracle equivalence for Markov chains

@dataclass
class OracleReport:
    process: dict
    seed: int
    sample_length: int
    alpha: float
    rows: list[dict]

    @property
    def max_deviation(self) -> float:
        return max(r["sup_deviation"] for r in self.rows)

    @property
    def passed(self) -> bool:
        return all(r["within_bound"] for r in self.rows)

    def to_dict(self) -> dict:
        return {"kind": "oracle_equivalence", "process": self.process, "seed": self.seed,
                "sample_length": self.sample_length, "alpha": self.alpha,
                "max_deviation": self.max_deviation, "passed": self.passed, "rows": self.rows}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        header = ["seed", "block", "count", "mu_hat", "mu_exact", "sup_deviation", "bound",
                  "within_bound", "kac_mean", "kac_ok"]
        return _csv(header, [[self.seed] + [r[h] for h in header[1:]] for r in self.rows])


def sup_deviation(a, b) -> float:
    """Sup distance between two right-continuous step CDFs."""
    t = np.union1d(a.jumps, b.jumps)
    fa, fb = a(t), b(t)
    return float(np.max(np.abs(fa - fb)))


def run_oracle_equivalence(transition, blocks, sample_length: int = 10**6, seed: int = 0,
                           initial=None, alpha: float = DKW_ALPHA,
                           seq: SymbolSequence | None = None) -> OracleReport:
    """Compare empirical and exact return-time laws block by block.

    Both laws are put on the same time scale (the empirical ``mu_hat``), so the
    comparison is between the empirical and exact laws of the gap itself. A
    block passes when the sup deviation is within the DKW bound at confidence
    ``1 - alpha``.
    """
    P = np.asarray(transition, dtype=float)
    spec = ProcessSpec("markov", {"transition": P.tolist(),
                                  "initial": None if initial is None else list(initial)}, seed)
    if seq is None:
        seq = generate(spec, sample_length)
    rows = []
    for block in blocks:
        occ = scan_occurrences(seq, block)
        gaps = return_gaps(occ)
        mu_hat = occ.mu_hat
        res = analytic.markov_oracle(P, block, initial=initial)
        emp = ecdf_from_samples(gaps * mu_hat)
        exact = res.scaled_cdf(mu_hat)
        dev = sup_deviation(emp, exact) + res.tail_mass
        bound = dkw_bound(gaps.size, alpha)
        kac = float(gaps.mean() * mu_hat)
        rows.append({"block": block.text(), "count": occ.count, "mu_hat": mu_hat,
                     "mu_exact": res.mu, "sup_deviation": dev, "bound": bound,
                     "within_bound": bool(dev < bound), "kac_mean": kac,
                     "kac_ok": bool(abs(kac - 1.0) < 5.0 / math.sqrt(occ.count)),
                     "oracle_tail": res.tail_mass})
    return OracleReport(spec.to_dict(), int(seed), len(seq), alpha, rows)


# --------------------------------------------------------------------------
# Example 1

@dataclass
class Example1Report:
    params: dict
    seed: int
    sample_length: int
    threshold: float
    block_measure: float
    designated_mass: float
    designated_mass_expected: float
    mass_sampling_tolerance: float
    min_gap_ratio: float
    max_gap_ratio: float
    gap_window: tuple[float, float]
    gaps_within_window: bool
    repel_fraction: float
    entropy_bits: float
    blocks: list[dict] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "params", "seed", "sample_length", "threshold", "block_measure", "designated_mass",
            "designated_mass_expected", "mass_sampling_tolerance", "min_gap_ratio",
            "max_gap_ratio", "gaps_within_window", "repel_fraction", "entropy_bits")}
        d["gap_window"] = list(self.gap_window)
        d["kind"] = "example1_check"
        return d

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        header = ["seed", "block", "marker_class", "count", "mu_hat", "min_gap_ratio",
                  "max_gap_ratio", "eps_repel", "t_repel"]
        return _csv(header, [[self.seed] + [b[h] for h in header[1:]] for b in self.blocks])


def run_example1_check(params: ExampleOneParams, threshold: float = REPEL_CAP - 0.1,
                       grid: EvalGrid = DEFAULT_GRID) -> Example1Report:
    """Measure the designated marker-terminated blocks of an Example 1 sample.

    Gap ratios are ``gap * mu_hat(B)``, i.e. gaps in units of the empirical
    mean gap; the expected window is ``[1 - 1/r, 1 + 1/r]``.
    """
    seq, family = gen_example1(params)
    n, L = params.n, len(seq)
    W = L - n + 1
    idx = ngram_index(seq, n)
    lookup = {tuple(w): g for g, w in enumerate(idx.words.tolist())}
    total = 0
    lo, hi = math.inf, -math.inf
    rows, repelling = [], 0
    for block, cls in zip(family.blocks, family.marker_class):
        g = lookup.get(block.word)
        pos = idx.positions(g) if g is not None else np.empty(0, dtype=np.int64)
        total += pos.size
        if pos.size < 2:
            rows.append({"block": block.text(), "marker_class": cls, "count": int(pos.size),
                         "mu_hat": pos.size / W, "min_gap_ratio": float("nan"),
                         "max_gap_ratio": float("nan"), "eps_repel": 0.0, "t_repel": float("nan")})
            continue
        rec = analyze_occurrences(OccurrenceList(block, pos, L), grid)
        ratios = np.diff(pos) * rec.mu_hat
        lo, hi = min(lo, float(ratios.min())), max(hi, float(ratios.max()))
        repelling += rec.eps_repel >= threshold
        rows.append({"block": block.text(), "marker_class": cls, "count": rec.count,
                     "mu_hat": rec.mu_hat, "min_gap_ratio": float(ratios.min()),
                     "max_gap_ratio": float(ratios.max()), "eps_repel": rec.eps_repel,
                     "t_repel": rec.t_repel})
    mass = total / W
    window = (1.0 - 1.0 / params.r, 1.0 + 1.0 / params.r)
    return Example1Report(
        params={"N0": params.N0, "n": params.n, "r": params.r, "length": L},
        seed=params.seed, sample_length=L, threshold=threshold,
        block_measure=params.block_measure, designated_mass=mass,
        designated_mass_expected=family.joint_measure,
        mass_sampling_tolerance=3.0 * math.sqrt(mass / L),
        min_gap_ratio=lo, max_gap_ratio=hi, gap_window=window,
        gaps_within_window=bool(window[0] <= lo and hi <= window[1]),
        repel_fraction=repelling / len(family.blocks),
        entropy_bits=example1_entropy(params.N0, params.n), blocks=rows)


# --------------------------------------------------------------------------
# Law of series: before/after attracting

@dataclass
class AttractReport:
    base: dict
    construction: dict
    sample_length: int
    t_star: float
    eps_star: float
    min_count: int
    log: dict
    rows: list[dict]

    @property
    def best_after(self) -> float:
        return max(r["after_flat_mass"] for r in self.rows)

    @property
    def max_before(self) -> float:
        return max(r["before_flat_mass"] for r in self.rows)

    def to_dict(self) -> dict:
        return {"kind": "lawofseries_demo", "base": self.base, "construction": self.construction,
                "sample_length": self.sample_length, "t_star": self.t_star,
                "eps_star": self.eps_star, "min_count": self.min_count, "log": self.log,
                "best_after_flat_mass": self.best_after, "max_before_flat_mass": self.max_before,
                "rows": self.rows}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        header = ["seed", "n", "before_flat_mass", "after_flat_mass", "before_resolved_mass",
                  "after_resolved_mass", "before_median_F", "after_median_F"]
        seed = self.construction["seed"]
        return _csv(header, [[seed] + [r[h] for h in header[1:]] for r in self.rows])


def default_probe_lengths(N: int, cap: int = MAX_PROBE_LENGTHS) -> list[int]:
    """Arithmetic subset of ``[N, N**2]`` with at most ``cap`` entries."""
    lo, hi = N, N * N
    if hi - lo + 1 <= cap:
        return list(range(lo, hi + 1))
    return sorted({int(round(x)) for x in np.linspace(lo, hi, cap)})


def _flat_mass(sweep: SweepResult, t_star: float, eps_star: float):
    F = [float(r.hitting_cdf(t_star)) for r in sweep.records]
    mass = math.fsum(r.mu_hat for r, f in zip(sweep.records, F) if f < eps_star)
    return mass, _median(F)


def run_lawofseries_demo(base: ProcessSpec, params: LawOfSeriesParams, probe_lengths=None,
                         t_star: float = 2.0, eps_star: float = 0.1,
                         sample_length: int = 10**6, min_count: int = MIN_COUNT,
                         grid: EvalGrid = DEFAULT_GRID, threads: int = 1) -> AttractReport:
    """Mass of blocks with ``F_B(t*) < eps*`` before and after the construction.

    ``F_B`` is the integrated-survival surrogate, which bounds the hitting
    CDF from above, so a block counted here is flat under either estimator.
    Masses are absolute (fractions of all windows), not relative to the
    resolved blocks.
    """
    base_seq = generate(base, sample_length)
    mod, log = apply_law_of_series(base_seq, params)
    probes = list(probe_lengths) if probe_lengths is not None else default_probe_lengths(params.N)
    rows = []
    for n in probes:
        before = block_sweep(base_seq, int(n), min_count, grid, threads)
        after = block_sweep(mod, int(n), min_count, grid, threads)
        bm, bF = _flat_mass(before, t_star, eps_star)
        am, aF = _flat_mass(after, t_star, eps_star)
        rows.append({"n": int(n), "before_flat_mass": bm, "after_flat_mass": am,
                     "before_resolved_mass": before.resolved_mass,
                     "after_resolved_mass": after.resolved_mass,
                     "before_median_F": bF, "after_median_F": aF})
    construction = params.to_dict()
    construction.pop("base", None)
    return AttractReport(base.to_dict(), construction, len(base_seq), float(t_star),
                         float(eps_star), min_count, log.to_dict(), rows)
