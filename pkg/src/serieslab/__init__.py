"""Return-time and hitting-time statistics of blocks in symbolic processes."""
from .core import (Alphabet, Block, EvalGrid, LinearCdf, StepCdf, SymbolSequence,
                   cdf_eval, cdf_integral_of_survival, ecdf_from_samples)
from .processes import (ExampleOneParams, LawOfSeriesParams, ProcessSpec, apply_law_of_series,
                        example1_entropy, gen_bernoulli, gen_example1, gen_markov, gen_periodic,
                        generate)
from .stats import (block_sweep, hitting_cdf_direct, hitting_cdf_via_g, intensities,
                    kth_return_samples, ks_to_exponential, return_cdf, return_gaps,
                    scan_occurrences)
from .analytic import (exp_law, gp_envelope, kac_expectation, lemma0_bound, lemma0_mixture,
                       markov_oracle, markov_return_oracle)

__version__ = "0.1.0"
