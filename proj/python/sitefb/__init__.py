# SPDX-License-Identifier: Apache-2.0
#
# sitefb: site-specific limited-feedback beamforming simulation library
# Copyright (C) 2026 The sitefb Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------

"""Site-specific limited-feedback beamforming.

Channel simulation, Type-I / Type-II / port-selection / learned-subspace
feedback schemes, and the experiment harness, backed by a C++ core.
"""

from ._sitefb import (
    Model,
    build_tag,
    capture_efficiency,
    compare,
    dft_codebook,
    effective_se,
    gen_site,
    mismatch_bound,
    orthonormalize,
    proposed,
    psc,
    sample_site,
    spectral_norm,
    steering,
    train,
    type1,
    type2,
)

__all__ = [
    "Model",
    "build_tag",
    "capture_efficiency",
    "compare",
    "dft_codebook",
    "effective_se",
    "gen_site",
    "mismatch_bound",
    "orthonormalize",
    "proposed",
    "psc",
    "sample_site",
    "spectral_norm",
    "steering",
    "train",
    "type1",
    "type2",
]
__version__ = "0.1.0"
