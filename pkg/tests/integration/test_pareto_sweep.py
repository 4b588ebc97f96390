"""
Open-loop omega sweeps: a two-day cut of the desk scenario, and the full
desk season on the 0.05 grid.
"""

import pytest

from src.control.mpc_engine import SeasonRunner
from src.control.pareto import PARETO_COLUMNS, best_omega, omega_grid, pareto_violations, sweep_pareto
from src.scenario.scenario_config import load_scenario


@pytest.fixture(scope="module")
def table(desk_runner):
    return sweep_pareto(desk_runner.cfg, [0.0, 0.25, 0.5, 0.75, 1.0], runner=desk_runner)


def test_columns_and_rows(table):
    assert list(table.columns) == PARETO_COLUMNS
    assert list(table["omega"]) == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_endpoints_normalize_to_one(table):
    assert table.iloc[0]["normalized_yield"] == pytest.approx(1.0)
    assert table.iloc[-1]["normalized_revenue"] == pytest.approx(1.0)


def test_predicted_front_is_monotone(table):
    assert pareto_violations(table, tolerance=1e-6, predicted=True) == {"revenue": 0, "yield": 0}


def test_best_omega_on_grid(table):
    best = best_omega(table)
    assert best["omega"] in set(table["omega"])
    assert best["ler_total"] == pytest.approx(table["ler_total"].max())


def test_ler_total_is_sum(table):
    assert ((table["ler_crop"] + table["ler_pv"] - table["ler_total"]).abs() < 1e-12).all()


@pytest.fixture(scope="module")
def season_table(desk_scenario_path):
    cfg = load_scenario(desk_scenario_path)
    return sweep_pareto(cfg, omega_grid(0.05), runner=SeasonRunner(cfg, jobs=4))


@pytest.mark.slow
class TestFullSeasonSweep:
    """14-day desk season, 21 omegas."""

    def test_grid(self, season_table):
        assert len(season_table) == 21
        assert season_table["omega"].iloc[0] == 0.0
        assert season_table["omega"].iloc[-1] == 1.0

    def test_realized_front_is_monotone(self, season_table):
        assert pareto_violations(season_table, tolerance=1e-6) == {"revenue": 0, "yield": 0}

    def test_interior_omega_beats_single_use(self, season_table):
        interior = season_table[(season_table["omega"] > 0.0) & (season_table["omega"] < 1.0)]
        assert interior["ler_total"].max() > 1.0

    def test_endpoints_normalize_to_one(self, season_table):
        assert season_table.iloc[0]["normalized_yield"] == pytest.approx(1.0)
        assert season_table.iloc[-1]["normalized_revenue"] == pytest.approx(1.0)

    def test_linear_model_accurate_when_revenue_weighted(self, season_table):
        weighted = season_table[season_table["omega"] >= 0.4 - 1e-9]
        assert len(weighted) == 13
        assert (weighted["yield_pct_error"] < 0.5).all()
        assert (weighted["revenue_pct_error"] < 0.5).all()
