"""Structured quadrilateral meshing of resonator cross-sections.

All meshes are conforming unions of mapped structured blocks: the membrane
(disk) block, an optional pair of rim blocks standing in for the torus, and
the conical pillar block whose rows widen toward the fixed base.  Radial
node positions come from a single ladder that hits every material breakpoint
exactly, so block interfaces share nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GeometryError
from .geometry import ResonatorGeometry

_AXIS_TOL = 1e-12

# 2x2 Gauss quadrature on the reference square
GAUSS_POINTS = np.array([(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]) / np.sqrt(3.0)
GAUSS_WEIGHTS = np.ones(4)


def shape_functions(xi: float, eta: float):
    """Bilinear shape functions and their reference gradients at (xi, eta)."""
    n = 0.25 * np.array([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                         (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)])
    dn = 0.25 * np.array([
        [-(1 - eta), -(1 - xi)],
        [(1 - eta), -(1 + xi)],
        [(1 + eta), (1 + xi)],
        [-(1 + eta), (1 - xi)],
    ])
    return n, dn


def element_jacobians(nodes: np.ndarray, elements: np.ndarray) -> np.ndarray:
    """det(J) for every element at every Gauss point, shape (E, 4)."""
    coords = nodes[elements]                      # (E, 4, 2)
    dets = np.empty((len(elements), 4))
    for q, (xi, eta) in enumerate(GAUSS_POINTS):
        _, dn = shape_functions(xi, eta)
        jac = np.einsum("eai,aj->eij", coords, dn)
        dets[:, q] = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    return dets


@dataclass(frozen=True)
class Mesh:
    """Conforming quadrilateral mesh with region and boundary tags.

    element_scale holds the azimuthally averaged fill fraction applied to
    both stiffness and mass (1 everywhere except a spoke annulus).
    """

    nodes: np.ndarray                 # (N, 2) of (r, z)
    elements: np.ndarray              # (E, 4) CCW connectivity
    regions: np.ndarray               # (E,) region name per element
    element_scale: np.ndarray         # (E,)
    clamp_edges: np.ndarray           # (C, 2) node pairs on the clamp plane
    fixed_nodes: np.ndarray           # pillar-base nodes
    axis_nodes: np.ndarray            # nodes on r = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("nodes", "elements", "regions", "element_scale",
                     "clamp_edges", "fixed_nodes", "axis_nodes"):
            arr = np.asarray(getattr(self, name))
            object.__setattr__(self, name, arr)
            arr.flags.writeable = False
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise GeometryError("nodes must have shape (N, 2)")
        if self.elements.ndim != 2 or self.elements.shape[1] != 4:
            raise GeometryError("elements must have shape (E, 4)")
        if len(self.regions) != len(self.elements):
            raise GeometryError("one region tag per element required")
        if len(self.element_scale) != len(self.elements):
            raise GeometryError("one scale factor per element required")
        dets = element_jacobians(self.nodes, self.elements)
        if np.any(dets <= 0.0):
            bad = int(np.argwhere(np.any(dets <= 0.0, axis=1))[0][0])
            raise GeometryError(f"degenerate element {bad}: Jacobian <= 0")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_dofs(self) -> int:
        return 2 * len(self.nodes)


def _segment_ladder(breakpoints, n_target: int, total: float) -> np.ndarray:
    """1-d node ladder hitting every breakpoint, ~n_target intervals overall."""
    pts = [breakpoints[0]]
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        n = max(1, round(n_target * (hi - lo) / total))
        pts.extend(np.linspace(lo, hi, n + 1)[1:])
    return np.asarray(pts)


def rectangle_mesh(r_range, z_range, nr: int, nz: int, region: str = "silica",
                   fix_bottom: bool = False, clamp_bottom: bool = False) -> Mesh:
    """Plain tensor-product mesh of a rectangle in the (r, z) plane.

    Intended for verification problems (rods, free disks).  With fix_bottom
    the z_lo row is constrained; with clamp_bottom the z_lo row edges are
    tagged as the clamp plane.
    """
    r_lo, r_hi = map(float, r_range)
    z_lo, z_hi = map(float, z_range)
    if r_lo < 0 or r_hi <= r_lo or z_hi <= z_lo:
        raise GeometryError("rectangle must have r_lo >= 0, positive extents")
    rs = np.linspace(r_lo, r_hi, nr + 1)
    zs = np.linspace(z_lo, z_hi, nz + 1)
    nodes = np.array([(r, z) for z in zs for r in rs])

    def nid(i, j):
        return j * (nr + 1) + i

    elements = np.array([[nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)]
                         for j in range(nz) for i in range(nr)])
    bottom = np.array([nid(i, 0) for i in range(nr + 1)])
    clamp = np.array([(nid(i, 0), nid(i + 1, 0)) for i in range(nr)]) \
        if clamp_bottom else np.empty((0, 2), dtype=int)
    axis = nodes[:, 0] < _AXIS_TOL * max(r_hi, 1.0)
    return Mesh(
        nodes=nodes,
        elements=elements,
        regions=np.full(len(elements), region, dtype="<U16"),
        element_scale=np.ones(len(elements)),
        clamp_edges=clamp,
        fixed_nodes=bottom if fix_bottom else np.empty(0, dtype=int),
        axis_nodes=np.flatnonzero(axis),
        meta={"kind": "rectangle", "nr": nr, "nz": nz},
    )


def mesh_counts(geometry: ResonatorGeometry, refinement: int) -> dict:
    """Interval counts the generator will use at a given refinement."""
    r = geometry.major_radius
    breakpoints = {0.0, geometry.pillar_radius, r}
    if geometry.rim_width > 0:
        breakpoints.add(r - geometry.rim_width)
    if geometry.spokes is not None:
        breakpoints.add(geometry.spokes.inner_radius)
        breakpoints.add(geometry.spokes.outer_radius)
    bp = sorted(breakpoints)
    n_target = 8 * refinement
    seg = [max(1, round(n_target * (hi - lo) / r)) for lo, hi in zip(bp, bp[1:])]
    n_radial = sum(seg)
    i_pillar = sum(s for (lo, hi), s in zip(zip(bp, bp[1:]), seg)
                   if hi <= geometry.pillar_radius + 1e-15)
    n_thickness = 2 * refinement
    n_pillar_rows = 3 * refinement
    n_rim_rows = 0
    if geometry.rim_overhang > 0:
        n_rim_rows = max(1, round(n_thickness * geometry.rim_overhang
                                  / geometry.thickness))
    return {"breakpoints": bp, "segments": seg, "n_radial": n_radial,
            "i_pillar": i_pillar, "n_thickness": n_thickness,
            "n_pillar_rows": n_pillar_rows, "n_rim_rows": n_rim_rows}


def generate_mesh(geometry: ResonatorGeometry, refinement: int) -> Mesh:
    """Mesh the silica membrane/rim plus the conical silicon pillar.

    The clamp plane (membrane bottom over the pillar) is tagged for the
    overlap integral and the pillar base for fixed boundary conditions.
    Element counts grow quadratically with the refinement level.
    """
    if refinement < 1:
        raise GeometryError("refinement must be >= 1")
    counts = mesh_counts(geometry, refinement)
    ladder = _segment_ladder(counts["breakpoints"], 8 * refinement,
                             geometry.major_radius)
    n_l = len(ladder) - 1
    i_p = counts["i_pillar"]
    n_t = counts["n_thickness"]
    n_pz = counts["n_pillar_rows"]
    n_rim = counts["n_rim_rows"]
    t = geometry.thickness
    h_p = geometry.resolved_pillar_height

    nodes = [(r, z) for z in np.linspace(0.0, t, n_t + 1) for r in ladder]

    def mem_id(i, j):
        return j * (n_l + 1) + i

    elements = []
    regions = []
    scales = []
    spokes = geometry.spokes
    for j in range(n_t):
        for i in range(n_l):
            elements.append([mem_id(i, j), mem_id(i + 1, j),
                             mem_id(i + 1, j + 1), mem_id(i, j + 1)])
            regions.append("silica")
            r_c = 0.5 * (ladder[i] + ladder[i + 1])
            scale = 1.0
            if spokes is not None and spokes.inner_radius <= r_c <= spokes.outer_radius:
                scale = spokes.fill_fraction(r_c)
            scales.append(scale)

    # pillar block: rows widen toward the base following the sidewall cone
    prev_row = [mem_id(i, 0) for i in range(i_p + 1)]
    pillar_base = prev_row
    for j in range(1, n_pz + 1):
        depth = h_p * j / n_pz
        scale_r = geometry.pillar_wall_radius(depth) / geometry.pillar_radius
        row = []
        for i in range(i_p + 1):
            row.append(len(nodes))
            nodes.append((ladder[i] * scale_r, -depth))
        for i in range(i_p):
            elements.append([row[i], row[i + 1], prev_row[i + 1], prev_row[i]])
            regions.append("silicon")
            scales.append(1.0)
        prev_row = row
    pillar_base = prev_row

    # rim blocks above and below the membrane stand in for the torus
    if n_rim > 0:
        i_rim = int(np.argmin(np.abs(ladder - (geometry.major_radius
                                               - geometry.rim_width))))
        h_rim = geometry.rim_overhang
        for sign, j_shared in ((+1, n_t), (-1, 0)):
            prev_row = [mem_id(i, j_shared) for i in range(i_rim, n_l + 1)]
            z_base = t if sign > 0 else 0.0
            for m in range(1, n_rim + 1):
                z = z_base + sign * h_rim * m / n_rim
                row = []
                for i in range(i_rim, n_l + 1):
                    row.append(len(nodes))
                    nodes.append((ladder[i], z))
                for a in range(len(row) - 1):
                    if sign > 0:
                        quad = [prev_row[a], prev_row[a + 1], row[a + 1], row[a]]
                    else:
                        quad = [row[a], row[a + 1], prev_row[a + 1], prev_row[a]]
                    elements.append(quad)
                    regions.append("silica")
                    scales.append(1.0)
                prev_row = row

    nodes = np.array(nodes)
    clamp_edges = np.array([(mem_id(i, 0), mem_id(i + 1, 0)) for i in range(i_p)])
    axis = np.flatnonzero(nodes[:, 0] < _AXIS_TOL * geometry.major_radius)
    return Mesh(
        nodes=nodes,
        elements=np.array(elements),
        regions=np.array(regions, dtype="<U16"),
        element_scale=np.array(scales),
        clamp_edges=clamp_edges,
        fixed_nodes=np.array(pillar_base),
        axis_nodes=axis,
        meta={"kind": "resonator", "refinement": refinement, **counts,
              "geometry": geometry.to_dict()},
    )
