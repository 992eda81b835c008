"""SNR walls and detection performance of cooperative generalized energy
detectors under bounded noise uncertainty, with a Monte Carlo cross-check."""

from .config import ExperimentConfig, load_config
from .detector import DetectorParams, SensorProfile, pd_avg, pd_fixed, pf_avg, pf_fixed
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateDistributionError,
    DomainError,
    RuleMismatchError,
    SensewallError,
    UnsupportedClosedFormError,
)
from .fusion import (
    FusionRule,
    NetworkConfig,
    hard_qd,
    hard_qf,
    network_qd,
    network_qf,
    poisson_binomial_tail,
    soft_qd_avg,
    soft_qd_fixed,
    soft_qf_avg,
    soft_qf_fixed,
)
from .montecarlo import SimSpec, estimate_network, roc_points, simulate_statistic
from .numerics import EstimateWithError, QuadratureSpec, g_p, k_p, q_function
from .uncertainty import UncertaintyBound, beta_cdf, beta_pdf, sample_beta
from .wall import (
    LambdaInterval,
    WallReport,
    feasible_lambda,
    reliability_search,
    wall_equal_snr,
    wall_hard,
    wall_report,
    wall_soft,
)

__version__ = "0.1.0"
