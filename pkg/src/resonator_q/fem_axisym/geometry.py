"""Materials and parametric cross-section geometry for axisymmetric solves."""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, replace

from ..errors import DataError, GeometryError


@dataclass(frozen=True)
class Material:
    """Isotropic linear-elastic material.

    sound_speed defaults to the extensional value sqrt(E/rho) when not
    supplied explicitly.
    """

    youngs_modulus: float   # Pa
    poisson_ratio: float
    density: float          # kg/m^3
    _sound_speed: float | None = None

    def __post_init__(self):
        if self.youngs_modulus < 0:
            raise DataError("Young's modulus cannot be negative")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise DataError("Poisson ratio must lie in [0, 0.5)")
        if self.density < 0:
            raise DataError("density cannot be negative")

    @property
    def sound_speed(self) -> float:
        if self._sound_speed is not None:
            return self._sound_speed
        return math.sqrt(self.youngs_modulus / self.density)

    @property
    def lame(self) -> tuple[float, float]:
        e, nu = self.youngs_modulus, self.poisson_ratio
        lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        mu = e / (2.0 * (1.0 + nu))
        return lam, mu


def load_default_materials() -> dict[str, Material]:
    """Silica and silicon defaults from the editable data file."""
    ref = importlib.resources.files("resonator_q.data") / "materials.json"
    data = json.loads(ref.read_text())
    out = {}
    for name, entry in data.items():
        if name.startswith("_"):
            continue
        out[name] = Material(
            youngs_modulus=entry["youngs_modulus"],
            poisson_ratio=entry["poisson_ratio"],
            density=entry["density"],
            _sound_speed=entry.get("sound_speed"),
        )
    return out


@dataclass(frozen=True)
class SpokeSpec:
    """Spoke suspension, entered as an azimuthally averaged annulus.

    The annulus between the attachment radii carries the spokes' fill
    fraction n*width/(2 pi r) as a stiffness and mass scale; the full 3-d
    spoke pattern is out of scope for the 2-d axisymmetric solver.
    """

    count: int
    width: float          # m
    inner_radius: float   # m
    outer_radius: float   # m

    def __post_init__(self):
        if self.count < 1:
            raise GeometryError("need at least one spoke")
        if self.width <= 0:
            raise GeometryError("spoke width must be positive")
        if not 0 < self.inner_radius < self.outer_radius:
            raise GeometryError("spoke radii must satisfy 0 < inner < outer")

    def fill_fraction(self, radius: float) -> float:
        if radius < self.inner_radius or radius > self.outer_radius:
            return 1.0
        return min(1.0, self.count * self.width / (2.0 * math.pi * radius))


@dataclass(frozen=True)
class ResonatorGeometry:
    """Disk/torus cross-section on a conical pillar.

    The torus is approximated by a rectangular rim block of the same
    cross-section area (width pi*r_minor/2, height 2*r_minor centered on the
    membrane midplane); zero minor radius gives a plain disk.  The relative
    undercut is u = (R - pillar_radius)/R.
    """

    major_radius: float            # m
    thickness: float               # m
    pillar_radius: float           # m
    torus_minor_radius: float = 0.0
    pillar_height: float | None = None    # default major_radius / 2
    pillar_angle_deg: float = 30.0        # sidewall angle from vertical
    spokes: SpokeSpec | None = None

    def __post_init__(self):
        if self.major_radius <= 0 or self.thickness <= 0:
            raise GeometryError("radius and thickness must be positive")
        if not 0.0 < self.pillar_radius < self.major_radius:
            raise GeometryError("pillar radius must lie in (0, major_radius)")
        if self.torus_minor_radius < 0:
            raise GeometryError("torus minor radius cannot be negative")
        if self.pillar_height is not None and self.pillar_height <= 0:
            raise GeometryError("pillar height must be positive")
        if not 0.0 <= self.pillar_angle_deg < 80.0:
            raise GeometryError("pillar sidewall angle must lie in [0, 80) deg")
        if self.rim_width > 0:
            if self.major_radius - self.rim_width <= self.pillar_radius:
                raise GeometryError("torus rim block reaches the pillar; "
                                    "reduce the minor radius or the undercut")
        if self.spokes is not None:
            if self.spokes.outer_radius > self.major_radius:
                raise GeometryError("spoke annulus extends past the rim")
            if self.spokes.inner_radius <= self.pillar_radius:
                raise GeometryError("spoke annulus overlaps the pillar")

    @property
    def undercut(self) -> float:
        return (self.major_radius - self.pillar_radius) / self.major_radius

    @property
    def rim_width(self) -> float:
        if self.torus_minor_radius <= self.thickness / 2.0:
            return 0.0
        return math.pi * self.torus_minor_radius / 2.0

    @property
    def rim_overhang(self) -> float:
        """Height of the rim block above/below the membrane faces."""
        if self.torus_minor_radius <= self.thickness / 2.0:
            return 0.0
        return self.torus_minor_radius - self.thickness / 2.0

    @property
    def resolved_pillar_height(self) -> float:
        return self.pillar_height if self.pillar_height is not None \
            else 0.5 * self.major_radius

    def pillar_wall_radius(self, depth: float) -> float:
        """Pillar sidewall radius at a depth below the clamp plane."""
        return self.pillar_radius + depth * math.tan(
            math.radians(self.pillar_angle_deg))

    def with_undercut(self, u: float) -> "ResonatorGeometry":
        if not 0.0 < u < 1.0:
            raise GeometryError(f"undercut {u} outside (0, 1)")
        return replace(self, pillar_radius=(1.0 - u) * self.major_radius)

    @classmethod
    def from_dict(cls, d: dict) -> "ResonatorGeometry":
        spokes = None
        if d.get("spokes") is not None:
            s = d["spokes"]
            spokes = SpokeSpec(count=s["count"], width=s["width_m"],
                               inner_radius=s["inner_radius_m"],
                               outer_radius=s["outer_radius_m"])
        if "pillar_radius_m" in d:
            pillar = d["pillar_radius_m"]
        elif "undercut" in d:
            pillar = (1.0 - d["undercut"]) * d["major_radius_m"]
        else:
            raise DataError("geometry needs pillar_radius_m or undercut")
        return cls(major_radius=d["major_radius_m"], thickness=d["thickness_m"],
                   pillar_radius=pillar,
                   torus_minor_radius=d.get("torus_minor_radius_m", 0.0),
                   pillar_height=d.get("pillar_height_m"),
                   pillar_angle_deg=d.get("pillar_angle_deg", 30.0),
                   spokes=spokes)

    def to_dict(self) -> dict:
        out = {"major_radius_m": self.major_radius, "thickness_m": self.thickness,
               "pillar_radius_m": self.pillar_radius,
               "torus_minor_radius_m": self.torus_minor_radius,
               "pillar_height_m": self.resolved_pillar_height,
               "pillar_angle_deg": self.pillar_angle_deg, "spokes": None}
        if self.spokes is not None:
            out["spokes"] = {"count": self.spokes.count,
                             "width_m": self.spokes.width,
                             "inner_radius_m": self.spokes.inner_radius,
                             "outer_radius_m": self.spokes.outer_radius}
        return out
