"""Quasi-Bayesian low-rank bilinear regression and inductive matrix completion."""

from .baselines import ImputeConfig, impute_low_rank, ols_estimate, ols_imp_estimate
from .datagen import (DesignPair, GroundTruth, ModelVariant, ObservationMode, ObservationSet,
                      full_observations, gen_coefficient, gen_designs, gen_response,
                      sample_observations)
from .experiment import ExperimentConfig, run_study
from .linalg import (clip_project, frobenius_norm_sq, pseudo_inverse, truncated_svd,
                     weighted_frobenius_norm_sq)
from .metrics import AggregateRow, ErrorReport, aggregate, compute_errors
from .posterior import (QuasiPosterior, QuasiPosteriorSpec, empirical_risk,
                        grad_log_quasi_posterior, log_quasi_posterior)
from .prior import PriorParams, grad_log_prior, log_prior, ridge_precision_product
from .samplers import ChainResult, SamplerConfig, adapt_step_size, lmc_run, mala_run, run_chain
from .theory import TheoryConstants, TheoryInputs, derive_constants, empirical_coverage, oracle_bound

__version__ = "0.1.0"
