"""Optimal independent, non-identically distributed noise for differential privacy.

Given a per-coordinate sensitivity profile ``lam``, the calibration routines
return Gaussian or Laplace noise scales that minimise the expected ``l_p^p``
error under an ``(eps, delta)`` or pure ``eps`` budget, together with the i.i.d.
and scale-perturb-rescale (SPR) baselines.
"""

from inid_dp.core import Mechanism, Mode, NoiseScales, PrivacyBudget, to_db
from inid_dp.exceptions import (AuditError, BracketError, ConvergenceError,
                                DomainError, UnsupportedMechanismError)
from inid_dp.gaussian import (GaussianSolverResult, calibrate_gaussian,
                              privacy_profile, solve_mu0)
from inid_dp.laplace import (calibrate_laplace, calibrate_laplace_approx_dp,
                             pure_dp_check)
from inid_dp.mechanism import (AuditReport, SeededRng, audit, empirical_lp_error,
                               gaussian_privacy_loss_tail, sample_noise)
from inid_dp.numerics import (BisectionConfig, bisect_monotone, gaussian_q,
                              gaussian_q_inv, scaled_tail_product)
from inid_dp.profile import (ProfileFamily, SensitivityProfile, disparity_nu,
                             family_profile, generate, gini, lp_sensitivity,
                             majorizes)
from inid_dp.allocation import (LayerClippingPlan, ResourceSplit,
                                flat_per_layer_plan, split_resource)

__version__ = "0.1.0"

__all__ = [
    "AuditError", "AuditReport", "BisectionConfig", "BracketError",
    "ConvergenceError", "DomainError", "GaussianSolverResult",
    "LayerClippingPlan", "Mechanism", "Mode", "NoiseScales", "PrivacyBudget",
    "ProfileFamily", "ResourceSplit", "SeededRng", "SensitivityProfile",
    "UnsupportedMechanismError", "audit", "bisect_monotone",
    "calibrate_gaussian", "calibrate_laplace", "calibrate_laplace_approx_dp",
    "disparity_nu", "empirical_lp_error", "family_profile",
    "flat_per_layer_plan", "gaussian_privacy_loss_tail", "gaussian_q",
    "gaussian_q_inv", "generate", "gini", "lp_sensitivity", "majorizes",
    "privacy_profile", "pure_dp_check", "sample_noise", "scaled_tail_product",
    "solve_mu0", "split_resource", "to_db",
]
