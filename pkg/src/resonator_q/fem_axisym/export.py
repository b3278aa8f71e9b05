"""Plain-text mesh and mode exports."""

from __future__ import annotations

import csv
import json

from .meshing import Mesh
from .modal import ModeSolution


def write_mesh_text(path, mesh: Mesh) -> None:
    """Node table, element table and boundary tags in a simple text format."""
    with open(path, "w") as fh:
        fh.write(f"nodes {mesh.n_nodes}\n")
        for i, (r, z) in enumerate(mesh.nodes):
            fh.write(f"{i} {r!r} {z!r}\n")
        fh.write(f"elements {mesh.n_elements}\n")
        for i, (quad, region, scale) in enumerate(
                zip(mesh.elements, mesh.regions, mesh.element_scale)):
            fh.write(f"{i} {quad[0]} {quad[1]} {quad[2]} {quad[3]} "
                     f"{region} {scale!r}\n")
        fh.write(f"clamp_edges {len(mesh.clamp_edges)}\n")
        for n1, n2 in mesh.clamp_edges:
            fh.write(f"{n1} {n2}\n")
        fh.write(f"fixed_nodes {len(mesh.fixed_nodes)}\n")
        for n in mesh.fixed_nodes:
            fh.write(f"{n}\n")
        fh.write(f"axis_nodes {len(mesh.axis_nodes)}\n")
        for n in mesh.axis_nodes:
            fh.write(f"{n}\n")


def write_mode_csv(path, mesh: Mesh, mode: ModeSolution) -> None:
    """Per-node displacement field of one mode."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "r_m", "z_m", "u_r", "u_z"])
        for i, ((r, z), (ur, uz)) in enumerate(zip(mesh.nodes, mode.displacement)):
            writer.writerow([i, repr(float(r)), repr(float(z)),
                             repr(float(ur)), repr(float(uz))])


def mode_summary(mode: ModeSolution) -> dict:
    return {
        "f_hz": mode.frequency_hz,
        "omega_rad_per_s": mode.omega,
        "mechanical_energy_j": mode.mechanical_energy,
        "clamp_overlap_m4": mode.clamp_overlap,
        "radial_fraction": mode.radial_fraction,
        "residual": mode.residual,
    }


def write_mode_summary_json(path, modes: list[ModeSolution]) -> None:
    with open(path, "w") as fh:
        json.dump([mode_summary(m) for m in modes], fh, indent=2, sort_keys=True)
        fh.write("\n")
