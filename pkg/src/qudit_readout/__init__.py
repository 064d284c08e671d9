"""Dispersive readout of transmon qudits: spectrum, shifts, readout geometry,
assignment matrices, population inference and readout strategies."""

from .assignment import (AssignmentMatrix, GaussianCloud, assignment_matrix_empirical,
                         assignment_matrix_mc, assignment_matrix_owen, classify_mde,
                         classify_mle, error_measures, two_cloud_error)
from .dispersive import (DispersiveModel, chi_pair, chi_total, dispersive_model,
                         pi_amplitudes, two_photon_factor)
from .errors import *  # noqa: F401,F403
from .inference import (PopulationPosterior, dirichlet_variance, grid_posterior,
                        log_density, mitigate_least_squares, posterior_mode,
                        posterior_sd, simplex_grid)
from .owen import owen_t, owen_t_general
from .readout import (ReadoutConfig, circle_center, integrate_mean_field,
                      optimal_frequencies, pair_distance, steady_amp_drive_frame,
                      steady_amp_general_frame)
from .spectrum import (Spectrum, TransmonParams, anharmonicity, charge_dispersion,
                       eigenenergies, fit_ej_ec, frequency_difference,
                       transition_frequency)
from .strategies import (StrategyScenario, compare_strategies, sweep_ratio, xi_curve)

__version__ = "0.1.0"
