"""Jet-space geometry of time-dependent Lagrangians on J1(R, M)."""

__version__ = "0.1.0"

from .covariance import CheckRecord, run_covariance_suite
from .dtensor import (DTensorField, DTensorValue, IndexSlot, h_liouville, h_normalization,
                      liouville, transform_dtensor)
from .dynamics import (RK4, Adaptive, SodeProblem, Trajectory, action_functional,
                       autoparallel_rhs, energy, harmonic_rhs, integrate, poisson_force)
from .errors import *  # noqa: F401,F403
from .exprlang import Expression, eval2, parse, to_text
from .jet import (JetChange, JetPoint, SpaceChange, TimeChange, compose, jet_jacobian, prolong,
                  random_change, random_point)
from .lagrange import (GravPotential, JetLagrangian, connection_from_lagrangian, el_residual,
                       el_semispray, el_semisprays, fundamental_metric, g_matrix,
                       gravitational_potential, harmonic_lagrangian, pullback_lagrangian)
from .metrics import (SpatialMetric, TemporalMetric, pull_back_metrics, spatial_christoffel,
                      temporal_christoffel)
from .spray import (NonlinearConnection, RelativisticSemispray, SpatialSemispray,
                    TemporalSemispray, adapted_coframe, adapted_frame, canonical_connection,
                    canonical_semispray, canonical_spatial_semispray,
                    canonical_temporal_semispray, connection_from_semispray,
                    semispray_difference, semispray_from_connection)
