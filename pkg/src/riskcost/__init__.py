"""Budget-constrained minimization of investment risk plus purchasing cost.

Exact solvers, the saddle-point descent protocol, replica-symmetric closed
forms, and a sweep harness comparing quenched and annealed behaviour.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DivergenceError,
    DomainError,
    NonConvergenceError,
    RiskCostError,
    SingularityError,
    SweepError,
    TrialError,
    UsageError,
)
from .market import (  # noqa: E402
    DEFAULT_PARETO,
    AssetEnsemble,
    EnsembleStats,
    ParetoParams,
    analytic_stats,
    ensemble_stats,
    generate_ensemble,
    inverse_pareto_sample,
    pareto_moment,
)
from .scenario import build_wishart, generate_returns, hamiltonian  # noqa: E402
from .exact import (  # noqa: E402
    OptimizationOutcome,
    QuenchedMoments,
    lagrange_epsilon,
    lagrange_qw,
    optimal_portfolio_closed_form,
    quenched_moments,
)
from .descent import DescentConfig, Instance, lagrangian_gradient, run_descent  # noqa: E402
from .replica import (  # noqa: E402
    annealed_epsilon,
    annealed_qw,
    cost_statistics,
    predict,
    predicted_inverse_moments,
    replica_epsilon,
    replica_qw,
    return_variant_epsilon,
)
from .experiment import ExperimentConfig, aggregate, run_sweep, run_trial  # noqa: E402
