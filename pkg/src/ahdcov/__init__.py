"""Coverage and spatial throughput of downlink cellular networks with antenna height difference."""

from .analytic import CpBounds, cp, cp_bounds_mspm, cp_dspm, cp_mspm, cp_sspm, radial_expectation, st
from .density import (
    CriticalDensities,
    critical_densities,
    critical_density_numeric,
    lambda_dagger,
    lambda_star,
    necessary_condition,
)
from .montecarlo import CpEstimate, estimate_cp, estimate_st
from .network import FadingModel, NetworkConfig, rice
from .pathloss import Link, PathlossModel, gain, make_model, segment_index
from .special import DomainError, hyp2f1_1b, omega1, omega2

__version__ = "0.1.0"
