# Copyright 2025 popmatch contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
from .common import (
    Side,
    VertexId,
    PopmatchError,
    ParseError,
    InvalidInstance,
    InvalidMatching,
    BudgetExceeded,
    CertificateError,
)
from .instance import (
    Instance,
    Matching,
    BlockingPair,
    parse_instance,
    format_instance,
    parse_matching,
    format_matching,
    validate,
    check_matching,
    is_pairwise_stable,
    max_matching_size,
    matched_degrees,
    random_instance,
)
from .votes import (
    vote,
    compare_sets,
    delta_u,
    delta_u_bruteforce,
    favorable_delta_u,
    big_delta,
    is_at_least_as_popular,
    is_weakly_dominated,
)
from .solvers import (
    Algorithm,
    LevelMatching,
    stable_matching,
    max_size_popular,
    project,
)
from .certificate import (
    CloneGraph,
    DualWitness,
    Popular,
    NotPopular,
    Inconclusive,
    build_clone_graph,
    realize_matching,
    max_weight_complete_matching,
    verify_popular,
    build_dual_witness,
    check_dual,
    check_claim1,
)
from .oracle import (
    EnumerationBudget,
    enumerate_matchings,
    is_popular_bruteforce,
    is_weakly_popular_bruteforce,
    popular_size_spectrum,
)
from .__version__ import __version__
