"""
Removing words from a fair 4-symbol process
===========================================

A marker grid cuts the sequence into components of length r or r + 1, each
split into k sub-blocks. Word w_i is overwritten by b^l inside sub-block i
(and the first N^2 symbols of the next one), so blocks containing w_i skip
a whole stretch of every component. This script compares the hitting
curves of probed block lengths before and after the change.
"""
from serieslab import LawOfSeriesParams, ProcessSpec
from serieslab.harness import run_lawofseries_demo

base = ProcessSpec("bernoulli", {"probs": [0.25] * 4}, seed=5)
params = LawOfSeriesParams(k=3, l=3, p=2000, N=3, seed=5)
rep = run_lawofseries_demo(base, params, probe_lengths=[3, 4, 5, 6], sample_length=10**6)

print("words", rep.log["words"], "symbols changed %.4f" % rep.log["fraction_changed"])
print(" n  before F(2)  after F(2)  flat mass before/after")
for r in rep.rows:
    print("%2d  %10.4f  %10.4f  %.3f / %.3f" % (r["n"], r["before_median_F"], r["after_median_F"],
                                               r["before_flat_mass"], r["after_flat_mass"]))
