"""Fractional maximal functions and mean oscillation on finite
doubling metric measure spaces."""

from .covers import (Cover, GaugeReport, Partition, build_cover,
                     build_partition, discrete_convolution, lipschitz_gauge)
from .functions import SampledFunction, field_lp_norm, field_superlevel_measure
from .gallery import (GALLERY_NAMES, NamedExample, build_example,
                      continuity_experiment, evaluate_oracle)
from .maximal import (BallFamily, MaximalField, conjugate_exponent,
                      default_family, enumerate_balls, fractional_maximal,
                      local_global_split)
from .oscillation import (OscillationReport, ball_mean, blo_gauge, bmo_norm,
                          mean_drift, oscillation_modulus, p_oscillation)
from .space import (Ball, GeometryFit, Space, ValidationReport, diameter,
                    estimate_doubling_constant, estimate_geometry,
                    fit_annular_decay, fit_lower_mass_bound,
                    fit_relative_lower_mass_bound, validate_space)
from .verify import (CheckReport, check_blo_bound, check_oscillation_lemmas,
                     check_operator_norms, check_pointwise_comparison,
                     check_sublinearity, global_oscillation_sweep, run_suite,
                     sarason_profile, seeded_interval_space,
                     seeded_piecewise_linear, standard_battery)

__version__ = "0.1.0"
