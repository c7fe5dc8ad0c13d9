"""
How much can a block repel?
===========================

The integrated survival G_B(t) never exceeds min{t, 1}, so the repelling
intensity is at most e^-1, reached at t = 1 when visits are exactly
periodic. Example 1 builds a positive-entropy process where a third of the
3-blocks come close to this.
"""
import math

import numpy as np

from serieslab import Alphabet, Block, ExampleOneParams, example1_entropy, gen_periodic
from serieslab.harness import run_example1_check
from serieslab.stats import block_sweep

pattern = Block.parse(Alphabet(2), "0000100110101111")  # every 4-block once per period
periodic = gen_periodic(pattern, 50_000, seed=1)
sw = block_sweep(periodic, 6)
eps = [r.eps_repel for r in sw.records]
print("periodic, n = 6: eps_repel in [%.5f, %.5f], e^-1 = %.5f" % (min(eps), max(eps), math.exp(-1)))

params = ExampleOneParams(N0=4, n=3, r=8, length=10**6, seed=3)
rep = run_example1_check(params)
print("Example 1: designated mass %.4f (1/n = %.4f)" % (rep.designated_mass, 1 / params.n))
print("  gaps x mu_hat lie in [%.4f, %.4f], window [%.3f, %.3f]"
      % (rep.min_gap_ratio, rep.max_gap_ratio, *rep.gap_window))
print("  %.0f%% of designated blocks repel with intensity >= e^-1 - 0.1"
      % (100 * rep.repel_fraction))
print("  entropy %.6f bits/symbol, log2(N0) = %.1f" % (example1_entropy(4, 3), np.log2(4)))
