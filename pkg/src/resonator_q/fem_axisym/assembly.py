"""Assembly of axisymmetric elasticity operators.

Azimuthal-order-zero kinematics: two DOFs (u_r, u_z) per node, strain vector
(e_rr, e_zz, e_tt, g_rz) with the hoop strain e_tt = u_r / r.  Elements are
4-node bilinear quads integrated with 2x2 Gauss quadrature; every volume
integral carries the ring weight 2*pi*r, so assembled energies and masses
are those of the full 3-d body.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import DataError, GeometryError
from .geometry import Material
from .meshing import GAUSS_POINTS, GAUSS_WEIGHTS, Mesh, shape_functions


def _elastic_matrix(material: Material) -> np.ndarray:
    lam, mu = material.lame
    d = np.array([
        [lam + 2 * mu, lam, lam, 0.0],
        [lam, lam + 2 * mu, lam, 0.0],
        [lam, lam, lam + 2 * mu, 0.0],
        [0.0, 0.0, 0.0, mu],
    ])
    return d


def _element_quadrature(mesh: Mesh):
    """Per-Gauss-point B matrices, interpolation rows and ring weights.

    Yields (B, N2, weight) with B (E, 4, 8), N2 (2, 8) reference
    interpolation and weight (E,) = w * 2*pi*r * detJ.
    """
    coords = mesh.nodes[mesh.elements]            # (E, 4, 2)
    for q, (xi, eta) in enumerate(GAUSS_POINTS):
        n, dn = shape_functions(xi, eta)
        jac = np.einsum("eai,aj->eij", coords, dn)        # (E, 2, 2)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        if np.any(det <= 0):
            raise GeometryError("element with nonpositive Jacobian in assembly")
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1] / det
        inv[:, 0, 1] = -jac[:, 0, 1] / det
        inv[:, 1, 0] = -jac[:, 1, 0] / det
        inv[:, 1, 1] = jac[:, 0, 0] / det
        dn_rz = np.einsum("aj,eji->eai", dn, inv)         # (E, 4, 2)
        radius = coords[:, :, 0] @ n                      # (E,)

        b = np.zeros((len(coords), 4, 8))
        for a in range(4):
            b[:, 0, 2 * a] = dn_rz[:, a, 0]
            b[:, 1, 2 * a + 1] = dn_rz[:, a, 1]
            b[:, 2, 2 * a] = n[a] / radius
            b[:, 3, 2 * a] = dn_rz[:, a, 1]
            b[:, 3, 2 * a + 1] = dn_rz[:, a, 0]

        n2 = np.zeros((2, 8))
        n2[0, 0::2] = n
        n2[1, 1::2] = n
        yield b, n2, GAUSS_WEIGHTS[q] * 2.0 * np.pi * radius * det


def assemble(mesh: Mesh, materials: dict[str, Material]):
    """Assemble the stiffness and consistent mass operators (CSR, symmetric).

    Every region tag in the mesh must have an entry in materials; the
    per-element fill scale multiplies both stiffness and mass.
    """
    for region in np.unique(mesh.regions):
        if region not in materials:
            raise DataError(f"no material supplied for region {region!r}")

    n_e = mesh.n_elements
    d_by_region = {r: _elastic_matrix(m) for r, m in materials.items()}
    rho_by_region = {r: m.density for r, m in materials.items()}
    d_e = np.stack([d_by_region[r] for r in mesh.regions])       # (E, 4, 4)
    rho_e = np.array([rho_by_region[r] for r in mesh.regions])
    d_e = d_e * mesh.element_scale[:, None, None]
    rho_e = rho_e * mesh.element_scale

    k_e = np.zeros((n_e, 8, 8))
    m_e = np.zeros((n_e, 8, 8))
    for b, n2, weight in _element_quadrature(mesh):
        k_e += np.einsum("eqi,eqp,epj,e->eij", b, d_e, b, weight, optimize=True)
        m_e += np.einsum("qi,qj,e->eij", n2, n2, weight * rho_e, optimize=True)

    dofs = np.empty((n_e, 8), dtype=int)
    dofs[:, 0::2] = 2 * mesh.elements
    dofs[:, 1::2] = 2 * mesh.elements + 1
    rows = np.repeat(dofs, 8, axis=1).ravel()
    cols = np.tile(dofs, (1, 8)).ravel()
    n_dof = mesh.n_dofs
    k = sp.coo_matrix((k_e.ravel(), (rows, cols)), shape=(n_dof, n_dof)).tocsr()
    m = sp.coo_matrix((m_e.ravel(), (rows, cols)), shape=(n_dof, n_dof)).tocsr()
    k = 0.5 * (k + k.T)
    m = 0.5 * (m + m.T)
    return k, m


def strain_energy(mesh: Mesh, materials: dict[str, Material],
                  displacement: np.ndarray) -> float:
    """Elementwise strain energy 1/2 Int e:D:e dV of a displacement field.

    Integrates the strain field directly, independently of the assembled
    stiffness operator.
    """
    u = np.asarray(displacement, dtype=float)
    if u.shape != (mesh.n_nodes, 2):
        raise DataError(f"displacement must have shape ({mesh.n_nodes}, 2)")
    d_by_region = {r: _elastic_matrix(m) for r, m in materials.items()}
    d_e = np.stack([d_by_region[r] for r in mesh.regions])
    d_e = d_e * mesh.element_scale[:, None, None]
    u_e = u[mesh.elements].reshape(mesh.n_elements, 8)
    total = 0.0
    for b, _, weight in _element_quadrature(mesh):
        strain = np.einsum("eqi,ei->eq", b, u_e)
        total += 0.5 * np.einsum("eq,eqp,ep,e->", strain, d_e, strain, weight)
    return float(total)


def kinetic_mass(mesh: Mesh, materials: dict[str, Material],
                 displacement: np.ndarray) -> float:
    """Modal mass Int rho |u|^2 dV of a displacement field (independent path)."""
    u = np.asarray(displacement, dtype=float)
    rho_e = np.array([materials[r].density for r in mesh.regions]) * mesh.element_scale
    u_e = u[mesh.elements].reshape(mesh.n_elements, 8)
    total = 0.0
    for _, n2, weight in _element_quadrature(mesh):
        vel = u_e @ n2.T                     # (E, 2)
        total += np.einsum("ei,ei,e->", vel, vel, weight * rho_e)
    return float(total)


@dataclass(frozen=True)
class ConstrainedSystem:
    """Reduced operators after eliminating constrained DOFs."""

    k: sp.csr_matrix
    m: sp.csr_matrix
    free_dofs: np.ndarray
    mesh: Mesh

    @property
    def n_dofs(self) -> int:
        return self.k.shape[0]

    def embed(self, reduced_vector: np.ndarray) -> np.ndarray:
        """Expand a reduced DOF vector to a full (n_nodes, 2) field."""
        full = np.zeros(self.mesh.n_dofs)
        full[self.free_dofs] = reduced_vector
        return full.reshape(-1, 2)


def constrain(k, m, mesh: Mesh, fix_base: bool = True) -> ConstrainedSystem:
    """Eliminate axis u_r DOFs and, when fix_base, the pillar-base DOFs.

    Axisymmetric kinematics always require u_r = 0 on the axis; the base
    constraint models the structure bonded to the chip.
    """
    fixed = set(2 * int(n) for n in mesh.axis_nodes)
    if fix_base:
        for n in mesh.fixed_nodes:
            fixed.add(2 * int(n))
            fixed.add(2 * int(n) + 1)
    free = np.array(sorted(set(range(mesh.n_dofs)) - fixed), dtype=int)
    return ConstrainedSystem(k=k[np.ix_(free, free)].tocsr(),
                             m=m[np.ix_(free, free)].tocsr(),
                             free_dofs=free, mesh=mesh)
