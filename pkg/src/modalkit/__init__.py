"""Optimal kernels for kernel mode estimation.

Kernel construction and moments, AMSE criteria, oracle mixture densities,
mode / modal-regression / clustering estimators and a seeded simulation harness.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .specialfn import PolyCoeffs, gamma_fn, hermite_prob, jacobi, laguerre, log_abs_gamma  # noqa: F401
from .kernels import (  # noqa: F401
    KernelSpec,
    RadialProfile,
    biweight_opt_profile,
    catalog_profile,
    epanechnikov_profile,
    gaussian_profile,
    hierarchy_profile,
    laplace_profile,
    make_kernel,
)
from .moments import geom_constants, moment_B, moment_report, moment_V  # noqa: F401
from .criteria import (  # noqa: F401
    amse_ratio,
    named_univariate_catalog,
    pk_amse_ratio_q2,
    pk_criterion,
    pk_lower_bound,
    rk_criterion,
    rk_vs_pk_ratio_q2,
    singular_criterion,
)
from .density import (  # noqa: F401
    GaussianMixture,
    asymptotics,
    find_antimode_1d,
    find_critical_points_1d,
    find_mode,
    preset,
)
from .estimators import cluster_1d, isme, kde, kde_grad, kde_hess, kme, mlr_amse_oracle, mlr_fit, mlr_objective  # noqa: F401
from .harness import SimConfig, SimResult, run_cer_campaign, run_mlr_campaign, run_mse_campaign, welch_test  # noqa: F401
