"""Numerical criteria for differences of integral-type composition
operators between weighted-derivative (Bloch-type) spaces on the unit disk."""

from .version import __version__
from .errors import (BlochDiffError, ConfigError, DegenerateInputError,
                     DiskDomainError, HypothesisUnmet, QuadratureNonConvergence,
                     SelfMapValidationError, TruncationInsufficient)
from .complex_disk import (DiskPoint, mobius_sigma, pseudo_hyperbolic,
                           remark21_ratio, tau, tau_pow)
from .analytic_fn import (Blaschke, Compose, Constant, Identity, Mobius,
                          Monomial, Power, Product, Scale, SeriesCoeffs, Sum,
                          SymbolExpr, binom_series, expr_from_dict, expr_to_dict,
                          stirling_ratio_check, validate_self_map)
from .bloch import (LittleBlochReport, SamplingGrid, SeminormEstimate,
                    bloch_norm, bloch_seminorm, little_bloch_test,
                    monomial_seminorm_exact, sup_search, weighted_modulus)
from .test_functions import (TestFunction, fa_deriv, fa_eval, ga_deriv, ga_eval,
                             unit_norm_check)
from .criteria import (CriterionReport, DetectionThresholds, EssAResult,
                       QuantityResult, SymbolQuadruple, apply_operator,
                       bloch_distance_lb, boundedness_verdict,
                       compactness_verdict, D_weight, default_n_schedule,
                       diff_seminorm_on, ess_lower_monomials, ess_quantity_A,
                       ess_quantity_B, evaluate_quadruple, quantity_iia,
                       quantity_iib, quantity_iii, quantity_iv,
                       single_operator_bounded)
from .harness_cli import (ExperimentConfig, SweepResult, coherence_audit,
                          run_experiment)

__all__ = [name for name in dir() if not name.startswith("_")]
