"""Boundary-driven heat-conduction chains (BMP, BEP, KMP, a three-site rotor)
and their dual inclusion walkers: simulators, an exact absorption solver for
stationary moments, and exact verification of the duality identities."""

__version__ = "0.1.0"

from .absorption import (
    absorption_distribution,
    covariance_matrix,
    energy_covariance,
    stationary_moment,
    temperature_profile,
)
from .diffusion import FluxLedger, ObservationSeries, bep_step, bmp_step, l3_step, run_ensemble, run_trajectory
from .duality import (
    Pair,
    Report,
    RotationFrame,
    check_change_of_coordinates,
    check_duality,
    check_intertwiner,
    check_su11,
    rotated_duality_function,
)
from .estimators import MomentEstimate, TransportEstimate, covariance_estimate, time_average, transport_summary
from .jumps import absorption_ensemble, gillespie_step, kmp_step, run_until_absorbed, sip_rates
from .model import (
    AbsorptionDistribution,
    Boundary,
    ChainSpec,
    DualConfig,
    EnergyConfig,
    Family,
    VelocityConfig,
    validate_spec,
)
from .polynomial import DiffOperator, Poly
from .streams import StepParams, make_rng
