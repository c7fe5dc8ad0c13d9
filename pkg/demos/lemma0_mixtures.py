"""
Geometric mixtures of mean-k laws
=================================

Mixing laws of mean k with geometric weights p (1-p)^(k-1) and rescaling
time by p gives a law of mean one. The indicator family 1_[k, inf) sweeps
mass furthest left and so maximizes the integrated survival G at every t.

Its exact curve sits above (1 - e_p^-t) / log e_p by up to
1 - p / -log(1-p); dividing that expression by 1 - p gives a bound that
holds. Both tend to 1 - e^-t as p -> 0.
"""
import numpy as np

from serieslab.analytic import (discretization_gap, exp_law, lemma0_bound, lemma0_corrected_bound,
                                lemma0_extremal, lemma0_mixture, random_mean_family)
from serieslab.core import EvalGrid
from serieslab.seeding import stream

t = EvalGrid.geometric().points
rng = stream(0, "demo-lemma0")

for p in (0.5, 0.1, 0.01):
    ext = lemma0_extremal(p, t)
    worst = max(np.max(lemma0_mixture(p, random_mean_family(p, rng), t) - ext) for _ in range(20))
    print("p = %-5g max(extremal - stated) = %.4f (gap %.4f), max(extremal - corrected) = %.1e, "
          "random families minus extremal <= %.1e"
          % (p, np.max(ext - lemma0_bound(p, t)), discretization_gap(p),
             np.max(ext - lemma0_corrected_bound(p, t)), worst))
    print("         sup |corrected - (1 - e^-t)| = %.4f"
          % np.max(np.abs(lemma0_corrected_bound(p, t) - exp_law(t))))
