"""
Return times in a fair coin
===========================

Blocks of an i.i.d. process hit at nearly exponential times once they are
long. For the single symbol "0" the normalized return time is geometric on
the lattice 1/2, 1, 3/2, ..., which is still far from exponential.
"""
import numpy as np

from serieslab import Alphabet, Block, gen_bernoulli, markov_oracle
from serieslab.stats import analyze_block, block_sweep

seq = gen_bernoulli([0.5, 0.5], 10**6, seed=7)

# the one-symbol block against its exact law
zero = Block.parse(Alphabet(2), "0")
rec = analyze_block(seq, zero)
exact = markov_oracle(np.full((2, 2), 0.5), zero)
print("block 0: %d visits, mu_hat %.4f (exact %.2f)" % (rec.count, rec.mu_hat, exact.mu))
print("repelling intensity %.4f at t = %.3f; e^-1 - 1/4 = %.4f"
      % (rec.eps_repel, rec.t_repel, np.exp(-1) - 0.25))

# longer blocks drift toward 1 - exp(-t)
for n in (1, 2, 4, 6, 8):
    sw = block_sweep(seq, n)
    ks = np.median([r.ks_exp for r in sw.records])
    print("n = %d: %3d blocks, median KS to exp %.4f, repel mass at 0.1 %.3f"
          % (n, len(sw.records), ks, sw.weighted_repel_measure(0.1)))
