"""Communication-aware processor allocation on mesh machines."""

from .allocators import (
    Mesh,
    hilbert_bf_allocate,
    hilbert_index,
    mc1x1_allocate,
    mc1x1_select,
    mm_allocate,
    mm_inc_allocate,
)
from .geometry import (
    Allocation,
    candidate_medians,
    k_closest,
    l1_distance,
    l1_median,
    pairwise_sum,
    pairwise_sum_between,
)
from .instances import gen_lower_bound_2d, gen_lower_bound_crosspolytope, gen_random_mesh
from .optimal import brute_force_opt, exact_k3, unconstrained_optimal
from .ptas import enumerate_cell_plans, ptas_factor, ptas_select, ptas_select_d
from .simulator import decision_matrix_csv, parse_swf, simulate, simulate_matrix

__version__ = "0.1.0"
