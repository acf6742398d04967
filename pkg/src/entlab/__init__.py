"""entlab: bipartite states, local channels E⊗I and entanglement measures."""

from .channels import (
    ChoiState,
    QuantumChannel,
    apply,
    apply_lifted,
    basis_contraction,
    choi,
    contraction_channel,
    depolarizing,
    identity_channel,
    is_entanglement_breaking,
    lift_local,
    named_unitary,
    random_channel,
    unitary_channel,
)
from .measures import chsh_max, concurrence, is_ppt, log_negativity, negativity
from .states import (
    DensityMatrix,
    PureState,
    bell_psi_plus,
    max_entangled,
    random_density_matrix,
    schmidt_filter,
    schmidt_pure,
    validate,
    werner_state,
)

__version__ = "0.1.0"
