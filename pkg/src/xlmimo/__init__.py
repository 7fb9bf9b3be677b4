"""Near-field modeling and low-complexity detection for very large arrays.

Modules
-------
scenario  : array geometry, user placement, scenario files
channel   : electromagnetic near-field channel vectors and matrices
snr       : closed-form single-user SNR expressions and limits
boundary  : near/far-field boundaries (phase error and power variation)
visibility: sub-array powers and visibility-region detection
detectors : linear MRC/ZF/MMSE detectors, VR-restricted and grouped variants
partition : VR-overlap graph, independent-set anchors, user groups
harness   : seeded experiment sweeps, figure presets, CSV emission
cli       : the ``xlmimo`` command-line entry point
"""

from .boundary import (ExtremalElements, FieldRegion, classify_field_region,
                       fraunhofer_distance, max_phase_error,
                       phase_boundary_distance, power_boundary_distance,
                       power_extremal_elements, power_variation)
from .channel import (ChannelMatrix, ChannelVector, channel_matrix,
                      channel_vector, element_phase, element_power,
                      far_field_channel, green_function_y)
from .detectors import (DetectorWeights, LinkMetrics,
                        favorable_propagation_ratio, mmse_weights, mrc_weights,
                        pzf_weights, sinr_closed, sinr_of_weights, sum_rate,
                        vr_mmse_weights, vr_zf_weights, zf_weights)
from .errors import XlMimoError
from .harness import (ExperimentSpec, ResultRecord, emit_csv, preset_figure,
                      run_experiment)
from .partition import (OverlapGraph, UserGrouping, build_overlap_graph,
                        complexity_estimate, form_groups, independent_set)
from .scenario import (AntennaIndex, ArrayConfig, Scenario, UserLocation,
                       antenna_center, element_distance, load_scenario,
                       sample_users, user_from_polar)
from .snr import (SnrQuery, snr_asymptotic, snr_element_sum, snr_far_field,
                  snr_perpendicular_geometric, snr_ula, snr_ula_asymptotic,
                  snr_upa, snr_upa_from_angles, snr_upa_no_polarization,
                  polarization_gap)
from .visibility import (SubArrayGrid, VisibilityRegion, detect_vr,
                         occupancy_ratio, subarray_power, vr_antenna_indices)

__version__ = "0.1.0"
