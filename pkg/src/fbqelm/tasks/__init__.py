"""Inference targets and their exact oracles."""
from .hamiltonian import (LABEL_NAMES, MleResult, ambiguity_resolved_fidelity, check_density_matrix,
                          hamiltonian_to_state, label_equivalent_vectors, labels_from_rho, labels_from_vector,
                          mle_rank1_fit, params_to_rho, params_to_vector)
from .pso import PsoConfig, PsoResult, pso_minimize
from .satwap import (joint_probabilities, qudit_satwap_label, satwap_classical_bound, satwap_projectors,
                     satwap_value, satwap_value_operator, tsirelson_bound)
from .witness import WITNESS, density_from_vector, witness_explicit, witness_value

__all__ = [name for name in dir() if not name.startswith("_")]
