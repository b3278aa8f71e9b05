"""Generalized eigenvalue solution and modal postprocessing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from ..errors import ConvergenceError, DataError, NumericalError
from .assembly import ConstrainedSystem, assemble, constrain
from .geometry import Material, ResonatorGeometry, load_default_materials
from .meshing import Mesh, generate_mesh

# below this size a dense generalized solve is faster than shift-invert
DENSE_CUTOFF = 3000
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ModeSolution:
    """One eigenmode: frequency, full-mesh field and clamp-plane overlap.

    displacement is M-normalized (phi^T M phi = 1), so mechanical_energy is
    omega^2/2 at the stored normalization.  radial_fraction is the share of
    modal mass carried by the radial DOFs, a cheap mode classifier (the
    radial breathing mode scores near 1, flexural modes near 0).
    """

    omega: float
    displacement: np.ndarray
    mechanical_energy: float
    clamp_overlap: float
    radial_fraction: float
    residual: float

    def __post_init__(self):
        arr = np.asarray(self.displacement)
        object.__setattr__(self, "displacement", arr)
        arr.flags.writeable = False

    @property
    def frequency_hz(self) -> float:
        return self.omega / (2.0 * np.pi)


def mode_energy(mode_or_displacement, m, omega: float | None = None) -> float:
    """Total mechanical energy omega^2 (phi^T M phi)/2 at the stored amplitude.

    Kinetic-amplitude convention: phi is the displacement amplitude, so the
    peak kinetic energy equals the peak strain energy for an eigenvector.
    Accepts a ModeSolution or a raw (n_nodes, 2) field plus omega.
    """
    if omega is None:
        omega = mode_or_displacement.omega
        phi = np.asarray(mode_or_displacement.displacement).ravel()
    else:
        phi = np.asarray(mode_or_displacement).ravel()
    if phi.shape[0] != m.shape[0]:
        raise DataError("displacement size does not match the mass operator")
    return 0.5 * omega**2 * float(phi @ (m @ phi))


def clamp_overlap(mesh: Mesh, displacement: np.ndarray) -> float:
    """Integral of |u_z|^2 over the clamp plane, with the 2*pi*r ring weight.

    Uses the same 2-point Gauss rule as assembly on each tagged edge.
    """
    if len(mesh.clamp_edges) == 0:
        raise DataError("mesh has no tagged clamp-plane edges")
    u = np.asarray(displacement)
    if u.ndim != 2 or u.shape != (mesh.n_nodes, 2):
        raise DataError(f"displacement must have shape ({mesh.n_nodes}, 2)")
    gauss = np.array([-1.0, 1.0]) / np.sqrt(3.0)
    total = 0.0
    for n1, n2 in mesh.clamp_edges:
        r1, r2 = mesh.nodes[n1, 0], mesh.nodes[n2, 0]
        u1, u2 = u[n1, 1], u[n2, 1]
        half = 0.5 * (r2 - r1)
        for s in gauss:
            radius = 0.5 * (r1 + r2) + s * half
            uz = 0.5 * (u1 + u2) + s * 0.5 * (u2 - u1)
            total += uz * uz * 2.0 * np.pi * radius * abs(half)
    return float(total)


def _radial_fraction(system: ConstrainedSystem, reduced_vec: np.ndarray) -> float:
    radial = system.free_dofs % 2 == 0
    masked = np.where(radial, reduced_vec, 0.0)
    num = float(masked @ (system.m @ masked))
    den = float(reduced_vec @ (system.m @ reduced_vec))
    return num / den


def generalized_modes(system: ConstrainedSystem, n_modes: int, shift: float = 0.0,
                      rigid_tol: float | None = None):
    """Raw eigenpairs (eigenvalues omega^2, M-normalized reduced vectors).

    Returns the n_modes pairs nearest the shift, ascending.  rigid_tol, when
    given, drops near-zero-energy modes with eigenvalue below
    rigid_tol * max(selected eigenvalues) before selection.
    """
    n = system.n_dofs
    if n_modes < 1 or n_modes >= n:
        raise DataError(f"n_modes must lie in [1, {n - 1}]")
    want = n_modes + (6 if rigid_tol is not None else 0)
    if n <= DENSE_CUTOFF:
        vals, vecs = scipy.linalg.eigh(system.k.toarray(), system.m.toarray())
    else:
        try:
            vals, vecs = eigsh(system.k, k=min(want, n - 1), M=system.m,
                               sigma=shift, which="LM")
        except RuntimeError as exc:
            raise NumericalError(
                f"shift {shift} appears to coincide with an eigenvalue "
                f"(factorization failed: {exc})") from exc
        except sp.linalg.ArpackNoConvergence as exc:
            raise ConvergenceError(
                "eigensolver did not converge",
                diagnostics={"converged": len(exc.eigenvalues)}) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    if rigid_tol is not None:
        scale = np.max(np.abs(vals)) if len(vals) else 1.0
        keep = np.abs(vals) > rigid_tol * scale
        vals, vecs = vals[keep], vecs[:, keep]
    order = np.argsort(np.abs(vals - shift))[:n_modes]
    order = order[np.argsort(vals[order])]
    vals, vecs = vals[order], vecs[:, order]

    for i in range(vecs.shape[1]):
        norm = np.sqrt(vecs[:, i] @ (system.m @ vecs[:, i]))
        vecs[:, i] /= norm
    return vals, vecs


def solve_eigenmodes(system: ConstrainedSystem, n_modes: int,
                     shift: float = 0.0) -> list[ModeSolution]:
    """Solve for the n_modes eigenmodes nearest the shift (in omega^2).

    Eigenvectors are M-normalized; each returned mode carries its total
    mechanical energy, clamp-plane overlap (0 when the mesh has no clamp
    tags) and relative eigen-residual, which must satisfy
    ||K phi - omega^2 M phi|| / ||K phi|| < 1e-8.
    """
    vals, vecs = generalized_modes(system, n_modes, shift)
    modes = []
    for lam, vec in zip(vals, vecs.T):
        if lam <= 0:
            raise NumericalError(
                f"nonpositive eigenvalue {lam:.3e} in a constrained problem; "
                "check boundary conditions")
        k_phi = system.k @ vec
        residual = float(np.linalg.norm(k_phi - lam * (system.m @ vec))
                         / np.linalg.norm(k_phi))
        if residual > RESIDUAL_TOL:
            raise ConvergenceError(
                f"eigenpair residual {residual:.2e} exceeds {RESIDUAL_TOL}",
                diagnostics={"eigenvalue": float(lam)})
        omega = float(np.sqrt(lam))
        field = system.embed(vec)
        overlap = clamp_overlap(system.mesh, field) \
            if len(system.mesh.clamp_edges) else 0.0
        modes.append(ModeSolution(
            omega=omega,
            displacement=field,
            mechanical_energy=0.5 * lam,
            clamp_overlap=overlap,
            radial_fraction=_radial_fraction(system, vec),
            residual=residual,
        ))
    return modes


def modal_analysis(geometry: ResonatorGeometry, refinement: int, n_modes: int,
                   materials: dict[str, Material] | None = None,
                   shift: float = 0.0) -> tuple[Mesh, list[ModeSolution]]:
    """Mesh a resonator geometry and solve its lowest fixed-base modes."""
    if materials is None:
        materials = load_default_materials()
    mesh = generate_mesh(geometry, refinement)
    k, m = assemble(mesh, materials)
    system = constrain(k, m, mesh, fix_base=True)
    return mesh, solve_eigenmodes(system, n_modes, shift)
