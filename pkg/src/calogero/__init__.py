"""Spectral canonical coordinates and bi-Hamiltonian checks for the rational Calogero-Moser system."""
from .phase_core import Coupling, LaxPair, PhaseState, build_lax, hamiltonian, recover_state
from .spectral import SpectralCoords, eigenvector_coords, faddeev_leverrier, spectral_coords

__all__ = [
    "Coupling", "LaxPair", "PhaseState", "build_lax", "hamiltonian", "recover_state",
    "SpectralCoords", "eigenvector_coords", "faddeev_leverrier", "spectral_coords",
]
__version__ = "0.1.0"
