"""Reachability of majorized states for unital Lindblad systems with switchable noise."""
from .errors import *  # noqa: F401,F403
from .linalg import hausdorff_distance, hermitian_eig, operator_norm, positive_parts, trace_norm
from .majorization import majorizes, pad_and_match, random_majorized_state, schur_horn_unitary, state_majorizes
from .crange import ando_majorization_test, c_spectrum, k_c, k_c_bruteforce, sample_c_numerical_range
from .lindblad import ControlSystem, apply_noise, gksl_superop, make_noise, propagate, trotter_noise, verify_unitality
from .controllability import connectivity_graph, lie_closure_dim
from .synthesis import Schedule, execute, synthesize, verify

__version__ = "0.1.0"
