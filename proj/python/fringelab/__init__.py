# Copyright 2026 The fringelab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Two-path interferometry fringes, Fisher information and Poisson fringe fitting."""

from ._fringelab import (  # noqa: F401
    IllPosedError,
    InvalidArgument,
    ResourceLimitError,
    dual_fock_outcomes,
    fit_fringe,
    fit_hom_dip,
    four_photon_outcomes,
    indistinguishability_from_coincidence,
    lambda4,
    lambda4_from_p4,
    multiplex_efficiency,
    optimal_fisher_two_photon,
    optimal_theta,
    p4_from_lambda4,
    predict_four_photon_extremes,
    predicted_fprime_curve,
    quartic_gaussian_overlap,
    run_cli,
    set_thread_count,
    small_angle_fisher,
    two_photon_probabilities,
)

__version__ = "0.1.0"
