"""
Shared fixtures: a small array, an illustrative crop and short synthetic seasons.
"""

from datetime import date
from pathlib import Path

import pytest

import src.logging.audit_logger as audit_module
from src.control.mpc_engine import SeasonRunner
from src.crop.crop_epic import CropParams
from src.geometry.shading import ArrayLayout
from src.geometry.solar_geometry import OrientationLimits, ParkOrientation, Site
from src.pv.pv_array import PvParams
from src.scenario.scenario_config import ScenarioConfig, load_scenario

REPO_ROOT = Path(__file__).resolve().parents[1]
DESK_SCENARIO = REPO_ROOT / "scenarios" / "desk_season.json"

PRICES = tuple([5e-5] * 14 + [1.2e-4] * 6 + [5e-5] * 4)


@pytest.fixture(autouse=True, scope="session")
def _audit_log_to_tmp(tmp_path_factory):
    """Keep audit events of the test session out of the working tree."""
    path = tmp_path_factory.mktemp("audit") / "audit.log"
    audit_module._audit_logger = audit_module.AuditLogger(log_path=str(path), log_level="INFO")
    yield path
    audit_module._audit_logger = None


@pytest.fixture
def site() -> Site:
    return Site(latitude=42.28, longitude=-83.74, timezone_offset=-5.0, name="Ann Arbor, MI")


@pytest.fixture
def limits() -> OrientationLimits:
    return OrientationLimits()


@pytest.fixture
def park() -> ParkOrientation:
    return ParkOrientation(azimuth=0.0, tilt=0.0)


@pytest.fixture
def layout() -> ArrayLayout:
    return ArrayLayout(
        rows=2,
        panels_per_row=3,
        panel_width=1.0,
        panel_height=1.6,
        mount_height=2.5,
        row_pitch=6.0,
        panel_pitch=2.0,
        field_polygon=((-6.0, -8.0), (6.0, -8.0), (6.0, 8.0), (-6.0, 8.0)),
    )


@pytest.fixture
def pv_params() -> PvParams:
    return PvParams(area_total=9.6, efficiency=0.2, price_profile=PRICES, alpha=0.5)


@pytest.fixture
def crop_params() -> CropParams:
    return CropParams(
        name="lettuce (illustrative)", t_base=4.0, t_opt=18.0, phu=1100.0,
        lai_max=3.0, ah1=5.41, ah2=18.1, be=23.0, hi=0.9,
    )


def make_scenario(site, layout, pv_params, crop_params, park, days=2, **overrides) -> ScenarioConfig:
    """Synthetic-weather scenario for tests."""
    fields = dict(
        name="test season",
        site=site,
        layout=layout,
        pv=pv_params,
        crop=crop_params,
        park=park,
        weather={"kind": "synthetic", "start_day": date(2023, 7, 1)},
        days=days,
        omega=0.5,
        seeds=[0, 1],
    )
    fields.update(overrides)
    return ScenarioConfig.model_validate(fields)


@pytest.fixture
def scenario(site, layout, pv_params, crop_params, park) -> ScenarioConfig:
    return make_scenario(site, layout, pv_params, crop_params, park, days=2)


@pytest.fixture
def scenario_factory(site, layout, pv_params, crop_params, park):
    """Build scenarios with overridden fields."""
    def build(days: int = 2, **overrides) -> ScenarioConfig:
        return make_scenario(site, layout, pv_params, crop_params, park, days=days, **overrides)
    return build


@pytest.fixture(scope="session")
def desk_scenario_path() -> Path:
    return DESK_SCENARIO


@pytest.fixture(scope="session")
def desk_runner():
    """Two-day cut of the bundled desk scenario, shared across integration tests."""
    cfg = load_scenario(DESK_SCENARIO).model_copy(update={"days": 2})
    return SeasonRunner(cfg)
