"""cutstack: exact cutting-and-stacking construction engine.

Builds binary ergodic processes as extending column sequences over
[0,1) with fully exact dyadic bookkeeping, samples their orbits, answers
block-probability queries through grammar-compressed labels, recovers
construction parameters from orbits, certifies arbitrarily slow
empirical convergence, and constructs adversarial processes that
falsify any given finite, budgeted family of distribution estimators.
"""

from .dyadic import Dyadic, DyadicInterval, interval_split, translate
from .columns import (Column, base_slab, double, stack, label, locate,
                      level_interval, materialize, dyadic_band,
                      apply_column_map, column_to_json, column_from_json)
from .labels import LabelString, brute_count
from .process import (ProcessHandle, OrbitSample, emit_symbols, sample_orbit,
                      block_prob, block_prob_enclosure, block_prob_limit,
                      uniform_block_prob, entropy_profile)
from .slowrate import (KSequence, KTable, build_slowrate_process,
                       closed_form_probability, early_block_level_count,
                       early_block_intersection_measure, run_order_report,
                       recover_k_table, estimate_from_orbit, OrbitWindowIndex,
                       choose_k_for_rate, slow_rate_certificate,
                       InconsistentOrbit)
from .estimators import (Estimator, EvalResult, ClaimQuery, makes_claim,
                         ConstantEstimator, EmpiricalEstimator,
                         OracleEstimator, SubprocessEstimator,
                         estimator_from_config, check_prefix_stability)
from .adversary import (pair_code, unpair_code, EvalBudgets, build_adversary,
                        StageTrace, FalsificationWitness, verify_witness,
                        decide_claim_truth, entropy_spotcheck)
from .ryabko import (RyabkoSpec, sample_ryabko, return_time_indices,
                     estimate_emission_probability, freeze_size)
from .stats import empirical_freq, rate_curve, curve_csv, wilson_interval
from .persist import (process_to_spec, process_from_spec, save_process,
                      load_process, rebuild_with_trace)
from .verify import run_process_checks, CheckResult

__version__ = "0.1.0"
