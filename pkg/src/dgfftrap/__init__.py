"""Monte Carlo toolkit for the two-dimensional Gaussian free field trap
landscape: exact field and Green-function sampling, the random walk among the
traps, and the K-process limit objects."""

from .errors import (BudgetExceededError, ConfigurationError, DgffTrapError,
                     InvalidParameterError, ParseError, ResourceLimitError)
from .field import (ALPHA, FieldSample, ScaleConstants, centering_m,
                    sample_field, sample_fields, scales, separation_radius,
                    superlevel_set, time_scale_s)
from .kprocess import (AtomList, ZSpec, sample_chi, simulate_clock,
                       simulate_pre_k, simulate_spatial_k, truncation_bad_set,
                       truncation_level)
from .lattice import (G_CONST, GreenTable, ball_offsets, green_ball,
                      green_ball_value, green_box, green_box_value,
                      green_torus_steps, residual_norm, theta_steps,
                      torus_distance)
from .metrics import (chi_square_uniform, dstar, ks_test, l_metric,
                      permutation_independence_test, rescale_walk_path,
                      unscale_walk_path)
from .traps import (GibbsMeasure, Trap, TrapLandscape, deep_traps,
                    gibbs_measure, is_separated, local_maxima, mass_outside,
                    restrict_landscape, trap_depth, trap_log_depth)
from .walk import (ClockTrace, ExcursionRecord, PathSample, collect_excursions,
                   excursions, hitting_experiment, local_time_experiment,
                   macroscopic_jumps, run_walk, trace_process,
                   walk_sojourn_times)

__version__ = "0.1.0"
