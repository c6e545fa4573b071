"""Exact spin-helix eigenstates of anisotropic spin-s Heisenberg models, with numerical checks."""

__version__ = "0.1.0"

from .elliptic import EllipticContext, bell, ell, identity_suite, theta  # noqa: E402
from .errors import SpinHelixError  # noqa: E402
from .helix import (  # noqa: E402
    build_shs,
    commensurability,
    expansion_states,
    local_vector,
    open_chain_shs,
    shs_energy,
    spin1_xy_state,
    texture,
    tower_entropy,
    tower_state,
)
from .lattice import build_lattice  # noqa: E402
from .model import ModelSpec, apply_hamiltonian, couplings_xxz, couplings_xyz, dense_hamiltonian  # noqa: E402
from .spin import build_spin_rep, spin_matrix  # noqa: E402
from .verify import (  # noqa: E402
    check_divergence,
    check_eigenstate,
    check_entropy,
    check_trig_limit,
    degeneracy_scan,
)

__all__ = [
    "__version__",
    "EllipticContext", "theta", "ell", "bell", "identity_suite",
    "SpinHelixError",
    "build_spin_rep", "spin_matrix",
    "build_lattice",
    "ModelSpec", "couplings_xyz", "couplings_xxz", "apply_hamiltonian", "dense_hamiltonian",
    "local_vector", "commensurability", "build_shs", "open_chain_shs", "shs_energy",
    "tower_state", "tower_entropy", "expansion_states", "spin1_xy_state", "texture",
    "check_divergence", "check_eigenstate", "degeneracy_scan", "check_entropy", "check_trig_limit",
]
