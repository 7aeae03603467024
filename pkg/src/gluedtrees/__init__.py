"""Quantum walks on the glued binary trees graph and their Anderson localization."""

__version__ = "0.1.0"

from .graph import (
    GluedTreeGraph,
    build_glued_tree,
    classical_evolve_full,
    classical_generator,
    quantum_hamiltonian_full,
)
from .line import (
    DisorderSpec,
    LineHamiltonian,
    apply_disorder,
    column_basis,
    lumped_classical_chain,
    reduced_hamiltonian,
    sample_disorder,
    verify_subspace_closure,
)
from .dynamics import (
    eigendecompose,
    evolve_classical,
    evolve_quantum,
    hitting_probability,
    packet_extent,
)
from .localization import (
    EXTENDED,
    eigenstate_envelope,
    lyapunov_exponent,
    max_localization_length,
    scaling_exponent,
    thouless_length,
)
