"""Order-p paraboson/parafermion Fock-like representations and the
generalized Jaynes-Cummings models built on them."""

from .green_ansatz import ParaOperators, build_para_ops
from .carrier import CarrierBasis, ProjectedOps, extract_carrier, project_ops
from .model import ModelParams, build_hamiltonian, spectrum, evolve

__all__ = [
    "ParaOperators", "build_para_ops",
    "CarrierBasis", "ProjectedOps", "extract_carrier", "project_ops",
    "ModelParams", "build_hamiltonian", "spectrum", "evolve",
]

__version__ = "0.1.0"
