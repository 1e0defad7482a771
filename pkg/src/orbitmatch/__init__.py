"""Shortest distance between orbits of pairs of dynamical systems."""
from .errors import (ConfigError, DomainError, EstimationError,
                     InsufficientScalesError, OrbitMatchError, PlotError)
from .kernels import BACKEND_NAME
from .systems import (DigitStream, MapSystem, Observation, SkewProduct,
                      FiberFamily, orbit, parse_observation, parse_system,
                      make_skew_product, sample_invariant, stationary_start,
                      torus_distance)
from .orbitdist import (DistanceCurve, ExponentCurve, counting_function,
                        exponent_curve, geometric_checkpoints,
                        rds_shortest_distance, shortest_distance_curve)
from .renyi import (CorrelationEstimate, DivergenceFit, RadiiSchedule,
                    accelerated_count, brute_force_count,
                    cross_correlation_curve, cross_correlation_integral,
                    fit_divergence)
from .diagnostics import (MollifierKernel, annuli_regularity,
                          correlation_decay, mollifier_eval)
from .experiment import (ExperimentConfig, ExperimentReport,
                         one_sided_bound_check, run_experiment,
                         run_limit_law, run_rds_limit_law)

__version__ = "0.1.0"
