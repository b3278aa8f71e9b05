"""Axisymmetric finite-element modal analysis of disk/torus resonators."""

from .assembly import (ConstrainedSystem, assemble, constrain, kinetic_mass,
                       strain_energy)
from .export import (mode_summary, write_mesh_text, write_mode_csv,
                     write_mode_summary_json)
from .geometry import (Material, ResonatorGeometry, SpokeSpec,
                       load_default_materials)
from .meshing import Mesh, generate_mesh, mesh_counts, rectangle_mesh
from .modal import (ModeSolution, clamp_overlap, generalized_modes,
                    modal_analysis, mode_energy, solve_eigenmodes)

__all__ = [
    "ConstrainedSystem", "Material", "Mesh", "ModeSolution",
    "ResonatorGeometry", "SpokeSpec", "assemble", "clamp_overlap",
    "constrain", "generalized_modes", "generate_mesh", "kinetic_mass",
    "load_default_materials", "mesh_counts", "modal_analysis", "mode_energy",
    "mode_summary", "rectangle_mesh", "solve_eigenmodes", "strain_energy",
    "write_mesh_text", "write_mode_csv", "write_mode_summary_json",
]
