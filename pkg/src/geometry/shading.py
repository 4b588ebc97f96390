"""
Field shading factor of a tracked panel array and its affine tilt fit.

Frame: x east, y north, z up, origin at the array centre on the ground. Panel
centres sit on a regular grid at ``mount_height``; rows run east-west and are
spaced ``row_pitch`` apart north-south. Every panel shares one orientation.

Each panel rectangle is projected along the sun ray onto the ground; the
shadow quads are unioned and clipped to the field polygon with shapely, and the
shaded fraction is the clipped area over the field area.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import shapely
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from shapely.geometry import Polygon

from src.errors.agrivoltaic_errors import ShadingFitError
from src.geometry.solar_geometry import (
    OrientationLimits,
    PanelOrientation,
    SolarPosition,
    incidence_cosine,
)

logger = logging.getLogger(__name__)

EDGE_ON_TOLERANCE = 1e-12


class ArrayLayout(BaseModel):
    """Panel array and crop field geometry (metres)."""

    model_config = ConfigDict(frozen=True)

    rows: int = Field(gt=0)
    panels_per_row: int = Field(gt=0)
    panel_width: float = Field(gt=0.0)
    panel_height: float = Field(gt=0.0)
    mount_height: float = Field(gt=0.0)
    row_pitch: float = Field(gt=0.0)
    panel_pitch: float = Field(gt=0.0)
    field_polygon: Tuple[Tuple[float, float], ...]

    _field: Polygon = PrivateAttr()
    _centres: np.ndarray = PrivateAttr()

    @field_validator("field_polygon")
    @classmethod
    def _check_polygon(cls, value):
        if len(value) < 3:
            raise ValueError("field_polygon needs at least 3 vertices")
        polygon = Polygon(value)
        if not polygon.is_valid or polygon.area <= 0.0:
            raise ValueError("field_polygon must be simple (non-self-intersecting) with positive area")
        return value

    @model_validator(mode="after")
    def _check_clearance(self) -> "ArrayLayout":
        if self.mount_height <= self.panel_height / 2.0:
            raise ValueError("mount_height must exceed panel_height / 2 so panels clear the ground at any tilt")
        return self

    def model_post_init(self, __context) -> None:
        self._field = Polygon(self.field_polygon)
        xs = (np.arange(self.panels_per_row) - (self.panels_per_row - 1) / 2.0) * self.panel_pitch
        ys = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.row_pitch
        grid_x, grid_y = np.meshgrid(xs, ys)
        self._centres = np.column_stack([
            grid_x.ravel(), grid_y.ravel(), np.full(grid_x.size, self.mount_height)
        ])

    @property
    def field(self) -> Polygon:
        return self._field

    @property
    def panel_centres(self) -> np.ndarray:
        """(n_panels, 3) array of panel centres."""
        return self._centres


@dataclass(frozen=True)
class ShadingAffineFit:
    """Per-step fit S_F(delta) ~ g1 * cos(delta) + g2."""
    t: int
    g1: float
    g2: float
    r_squared: float
    max_residual: float
    sf_tracking: float = 0.0
    n_points: int = 0
    monotone_violations: int = 0

    def predict(self, x: float) -> float:
        """Shading factor at cos(delta) = x, clamped to [0, 1]."""
        return min(1.0, max(0.0, self.g1 * x + self.g2))


def sun_vector(sun: SolarPosition) -> np.ndarray:
    """Unit vector toward the sun."""
    beta = math.radians(sun.altitude_s)
    phi = math.radians(sun.azimuth_s)
    return np.array([math.cos(beta) * math.sin(phi), -math.cos(beta) * math.cos(phi), math.sin(beta)])


def panel_axes(panel: PanelOrientation) -> Tuple[np.ndarray, np.ndarray]:
    """(edge, up-slope) unit vectors spanning the panel plane."""
    phi = math.radians(panel.azimuth_pv)
    tilt = math.radians(panel.tilt_pv)
    edge = np.array([math.cos(phi), math.sin(phi), 0.0])
    slope = np.array([-math.cos(tilt) * math.sin(phi), math.cos(tilt) * math.cos(phi), math.sin(tilt)])
    return edge, slope


def shadow_quads(layout: ArrayLayout, sun: SolarPosition, panel: PanelOrientation) -> np.ndarray:
    """
    Ground shadow corners of every panel.

    Returns:
        (n_panels, 4, 2) array of shadow vertices in ring order
    """
    ray = sun_vector(sun)
    edge, slope = panel_axes(panel)
    half_w = 0.5 * layout.panel_width * edge
    half_h = 0.5 * layout.panel_height * slope
    offsets = np.stack([-half_w - half_h, half_w - half_h, half_w + half_h, -half_w + half_h])

    corners = layout.panel_centres[:, None, :] + offsets[None, :, :]
    scale = corners[..., 2:3] / ray[2]
    return (corners - scale * ray)[..., :2]


def shading_factor(layout: ArrayLayout, sun: SolarPosition, panel: PanelOrientation) -> float:
    """
    Fraction of the field covered by panel shadows.

    Args:
        layout: Array and field geometry
        sun: Sun position
        panel: Shared panel orientation

    Returns:
        Shaded fraction in [0, 1]; 0 at night or with the panel edge-on to the sun
    """
    if not sun.is_daylight:
        return 0.0
    if abs(incidence_cosine(sun, panel)) < EDGE_ON_TOLERANCE:
        return 0.0

    shadows = shapely.polygons(shadow_quads(layout, sun, panel))
    covered = shapely.union_all(shadows).intersection(layout.field)
    return min(1.0, max(0.0, covered.area / layout.field.area))


def sweep_offsets(tracking_tilt: float, limits: OrientationLimits, step: float = 1.0) -> np.ndarray:
    """Tilt deviations in [-90, 90] at ``step`` keeping tracking_tilt + delta inside the limits."""
    n_half = int(math.floor(90.0 / step + 1e-9))
    offsets = np.arange(-n_half, n_half + 1) * step
    tilts = tracking_tilt + offsets
    keep = (tilts >= limits.tilt_min - 1e-9) & (tilts <= limits.tilt_max + 1e-9)
    return offsets[keep]


def fit_affine_sf(
    layout: ArrayLayout,
    sun: SolarPosition,
    tracking: PanelOrientation,
    tilt_limits: OrientationLimits,
    t: int = 0,
    step: float = 1.0,
    monotonicity_tolerance: float = 1e-9
) -> ShadingAffineFit:
    """
    Least-squares fit of S_F against cos(delta) over a tilt sweep.

    The sweep keeps the tracking azimuth and moves the tilt by delta in
    [-90, 90] at ``step`` degrees, restricted to the tilt limits.

    Args:
        layout: Array and field geometry
        sun: Sun position (daylight)
        tracking: Unclamped sun-tracking orientation the deviation is measured from
        tilt_limits: Tilt design limits
        t: Time index recorded on the fit
        step: Sweep resolution in degrees
        monotonicity_tolerance: Slack for counting shading increases away from tracking

    Returns:
        ShadingAffineFit with R^2, max residual and sweep diagnostics

    Raises:
        ShadingFitError: If fewer than two sweep points are feasible
    """
    offsets = sweep_offsets(tracking.tilt_pv, tilt_limits, step)
    if offsets.size < 2:
        raise ShadingFitError(f"step {t}: only {offsets.size} feasible tilt sweep point(s)")

    values = np.array([
        shading_factor(layout, sun, PanelOrientation(tracking.azimuth_pv, tracking.tilt_pv + float(delta)))
        for delta in offsets
    ])
    cosines = np.cos(np.radians(offsets))

    if np.ptp(cosines) < 1e-12:
        g1, g2 = 0.0, float(values.mean())
    else:
        design = np.column_stack([cosines, np.ones_like(cosines)])
        (g1, g2), *_ = np.linalg.lstsq(design, values, rcond=None)
        g1, g2 = float(g1), float(g2)

    residuals = values - (g1 * cosines + g2)
    ss_res = float(residuals @ residuals)
    centred = values - values.mean()
    ss_tot = float(centred @ centred)
    r_squared = 1.0 if ss_tot <= 1e-24 else 1.0 - ss_res / ss_tot

    zero = np.flatnonzero(np.isclose(offsets, 0.0))
    sf_tracking = float(values[zero[0]]) if zero.size else g1 + g2
    violations = monotone_violations(offsets, values, monotonicity_tolerance)
    if violations:
        logger.debug("step %d: shading grows away from tracking at %d sweep point(s)", t, violations)

    return ShadingAffineFit(
        t=t,
        g1=g1,
        g2=g2,
        r_squared=r_squared,
        max_residual=float(np.max(np.abs(residuals))),
        sf_tracking=sf_tracking,
        n_points=int(offsets.size),
        monotone_violations=violations,
    )


def monotone_violations(offsets: np.ndarray, values: np.ndarray, tolerance: float) -> int:
    """
    Count sweep points where shading grows while moving away from delta = 0.

    Each side of the sweep is walked outward from the point closest to zero.
    """
    violations = 0
    centre = int(np.argmin(np.abs(offsets)))
    for side in (np.arange(centre, offsets.size), np.arange(centre, -1, -1)):
        walk = values[side]
        violations += int(np.count_nonzero(np.diff(walk) > tolerance))
    return violations


def par_field(
    shading: Union[ShadingAffineFit, float],
    par_db: float,
    par_diff: float,
    x: float = 1.0
) -> float:
    """
    PAR reaching the field.

    Args:
        shading: Affine fit (evaluated at x and clamped) or an exact shading factor
        par_db: Direct-beam PAR on the field, alpha * DNI
        par_diff: Diffuse PAR, alpha * DHI
        x: cos(delta) for the affine fit

    Returns:
        (1 - S_F) * par_db + par_diff
    """
    sf = shading.predict(x) if isinstance(shading, ShadingAffineFit) else min(1.0, max(0.0, float(shading)))
    return (1.0 - sf) * par_db + par_diff


def azimuth_sensitivity(
    layout: ArrayLayout,
    sun: SolarPosition,
    tracking: PanelOrientation,
    azimuth_limits: OrientationLimits,
    step: float = 1.0,
    span: float = 90.0
) -> float:
    """
    Largest shading change from moving the azimuth away from tracking.

    Args:
        layout: Array and field geometry
        sun: Sun position
        tracking: Sun-tracking orientation
        azimuth_limits: Azimuth design limits
        step: Sweep resolution in degrees
        span: Half-width of the azimuth sweep in degrees

    Returns:
        max |S_F(delta_phi) - S_F(0)| at the tracking tilt
    """
    if not sun.is_daylight:
        return 0.0
    n_half = int(math.floor(span / step + 1e-9))
    offsets = np.arange(-n_half, n_half + 1) * step
    azimuths = tracking.azimuth_pv + offsets
    azimuths = azimuths[(azimuths >= azimuth_limits.azimuth_min) & (azimuths <= azimuth_limits.azimuth_max)]

    base = shading_factor(layout, sun, tracking)
    changes = [
        abs(shading_factor(layout, sun, PanelOrientation(float(az), tracking.tilt_pv)) - base)
        for az in azimuths
    ]
    return max(changes, default=0.0)
