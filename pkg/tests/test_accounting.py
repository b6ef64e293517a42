"""TEA/LCA accounting tests: characterization, CRF, BSM1 bindings."""

import math

import numpy as np
import pytest

from asmbench import (
    AccountingError,
    ASM1ParameterSet,
    BSM1Settings,
    CapitalItem,
    FlowsheetError,
    ImpactIndicator,
    ImpactItem,
    Inventory,
    InventoryEntry,
    TEAInputs,
    aeration_energy,
    assemble_ode,
    bsm1_initial_state,
    bsm1_operating_bindings,
    build_bsm1,
    capital_recovery_factor,
    effluent_metrics,
    lca_total,
    steady_state,
    tea_annualize,
)

GWP = ImpactIndicator("GWP", "kg CO2eq")


def entry(qty, cf, item_id="it", offset=False, **kw):
    return InventoryEntry(
        ImpactItem(item_id, "kWh", cf={"GWP": cf}, offset=offset), qty, **kw)


@pytest.fixture(scope="module")
def baseline():
    problem = assemble_ode(build_bsm1(BSM1Settings(), ASM1ParameterSet()))
    ss = steady_state(problem, bsm1_initial_state(problem),
                      tol_ss=1e-3, t_max=150.0)
    return problem, ss


class TestImpactTypes:
    def test_indicator_needs_id(self):
        with pytest.raises(AccountingError):
            ImpactIndicator("", "kg")

    def test_item_factor_lookup(self):
        it = ImpactItem("elec", "kWh", cf={"GWP": 0.5})
        assert it.factor("GWP") == 0.5
        with pytest.raises(AccountingError):
            it.factor("ODP")

    def test_nonfinite_factor_rejected(self):
        with pytest.raises(AccountingError):
            ImpactItem("elec", "kWh", cf={"GWP": math.inf})

    def test_entry_validation(self):
        with pytest.raises(AccountingError):
            entry(-1.0, 0.5)
        assert entry(-1.0, 0.5, offset=True).quantity == -1.0
        with pytest.raises(AccountingError):
            entry(1.0, 0.5, basis="per_week")
        with pytest.raises(AccountingError):
            entry(1.0, 0.5, source="pipe")
        with pytest.raises(AccountingError):
            entry(math.nan, 0.5)

    def test_entry_unit_must_match_functional_unit(self):
        with pytest.raises(AccountingError):
            entry(1.0, 0.5, unit="MJ")
        assert entry(1.0, 0.5, unit="kWh").unit == "kWh"

    def test_quantity_over_horizon(self):
        per_day = entry(2.0, 1.0)
        once = entry(5.0, 1.0, basis="per_lifetime")
        assert per_day.quantity_over(30.0) == 60.0
        assert once.quantity_over(30.0) == 5.0


class TestLcaTotal:
    def test_one_item_product(self):
        inv = Inventory((entry(2.0, 0.5),))
        res = lca_total(inv, [GWP], horizon_days=1.0)
        assert res.totals["GWP"] == pytest.approx(1.0)

    def test_empty_inventory(self):
        res = lca_total(Inventory(()), [GWP], horizon_days=100.0)
        assert res.totals["GWP"] == 0.0
        assert res.breakdown["GWP"] == {}

    def test_offset_breakdown(self):
        inv = Inventory((entry(3.0, 2.0, item_id="a"),
                         entry(-4.0, 0.5, item_id="b", offset=True)))
        res = lca_total(inv, [GWP], horizon_days=1.0)
        assert res.totals["GWP"] == pytest.approx(4.0)
        assert res.breakdown["GWP"]["a"] == pytest.approx(6.0)
        assert res.breakdown["GWP"]["b"] == pytest.approx(-2.0)

    def test_breakdown_sums_to_total(self):
        rng = np.random.default_rng(4)
        entries = tuple(
            entry(float(q), float(cf), item_id=f"i{j}")
            for j, (q, cf) in enumerate(zip(rng.random(50) * 100.0,
                                            rng.random(50) * 10.0)))
        res = lca_total(Inventory(entries), [GWP], horizon_days=365.0)
        total = res.totals["GWP"]
        assert sum(res.breakdown["GWP"].values()) == pytest.approx(
            total, rel=1e-12)

    def test_linear_in_quantity_and_factor(self):
        inv1 = Inventory((entry(3.0, 2.0),))
        inv2 = Inventory((entry(6.0, 2.0),))
        inv3 = Inventory((entry(3.0, 4.0),))
        t1 = lca_total(inv1, [GWP], 10.0).totals["GWP"]
        assert lca_total(inv2, [GWP], 10.0).totals["GWP"] == pytest.approx(
            2.0 * t1, rel=1e-15)
        assert lca_total(inv3, [GWP], 10.0).totals["GWP"] == pytest.approx(
            2.0 * t1, rel=1e-15)

    def test_horizon_scales_per_day_only(self):
        inv = Inventory((entry(1.0, 1.0, item_id="daily"),
                         entry(7.0, 1.0, item_id="once",
                               basis="per_lifetime")))
        res = lca_total(inv, [GWP], horizon_days=100.0)
        assert res.breakdown["GWP"]["daily"] == pytest.approx(100.0)
        assert res.breakdown["GWP"]["once"] == pytest.approx(7.0)

    def test_missing_factor_is_an_error(self):
        inv = Inventory((entry(1.0, 0.5),))
        with pytest.raises(AccountingError):
            lca_total(inv, [GWP, ImpactIndicator("ODP", "kg CFC-11eq")], 1.0)
        with pytest.raises(AccountingError):
            lca_total(inv, [GWP], horizon_days=-1.0)

    def test_duplicate_item_ids_merge(self):
        inv = Inventory((entry(1.0, 2.0, item_id="x"),
                         entry(3.0, 2.0, item_id="x")))
        res = lca_total(inv, [GWP], 1.0)
        assert res.breakdown["GWP"]["x"] == pytest.approx(8.0)
        assert res.totals["GWP"] == pytest.approx(8.0)


class TestCapitalRecovery:
    def test_zero_rate_is_straight_line(self):
        assert capital_recovery_factor(0.0, 10.0) == pytest.approx(0.1)

    def test_five_percent_ten_years(self):
        crf = capital_recovery_factor(0.05, 10.0)
        plain = 0.05 * 1.05 ** 10 / (1.05 ** 10 - 1.0)
        assert crf == pytest.approx(plain, rel=1e-12)
        assert crf == pytest.approx(0.129505, abs=5e-7)

    def test_tiny_rate_continuous(self):
        for n in (1.0, 7.0, 10.0, 30.0):
            assert abs(capital_recovery_factor(1e-12, n) - 1.0 / n) <= 1e-9

    def test_validation(self):
        with pytest.raises(AccountingError):
            capital_recovery_factor(0.05, 0.0)
        with pytest.raises(AccountingError):
            capital_recovery_factor(-0.01, 10.0)


class TestTeaAnnualize:
    def test_straight_line_capital(self):
        res = tea_annualize(TEAInputs(
            capital=(CapitalItem("tank", 100.0, 10.0),), horizon_yr=10.0))
        assert res.net_annual == pytest.approx(10.0)
        assert res.breakdown["capital:tank"] == pytest.approx(10.0)

    def test_discounted_capital(self):
        res = tea_annualize(TEAInputs(
            capital=(CapitalItem("tank", 100.0, 10.0),),
            discount_rate=0.05, horizon_yr=10.0))
        assert res.net_annual == pytest.approx(12.95, abs=5e-3)

    def test_opex_revenue_cancellation(self):
        res = tea_annualize(TEAInputs(operating_costs={"power": 10.0},
                                      revenues={"biogas": 10.0}))
        assert res.net_annual == pytest.approx(0.0, abs=1e-9)
        assert res.breakdown["opex:power"] == pytest.approx(3650.0)
        assert res.breakdown["revenue:biogas"] == pytest.approx(-3650.0)

    def test_income_tax_on_net_positive_revenue(self):
        inputs = TEAInputs(capital=(CapitalItem("plant", 1000.0, 10.0),),
                           operating_costs={"ops": 100.0},
                           revenues={"sales": 400.0},
                           income_tax=0.3, horizon_yr=10.0)
        res = tea_annualize(inputs)
        net_revenue = 365.0 * 400.0 - 365.0 * 100.0 - 100.0
        assert res.breakdown["income_tax"] == pytest.approx(0.3 * net_revenue)
        assert res.net_annual == pytest.approx(
            -net_revenue + 0.3 * net_revenue)

    def test_no_tax_when_costs_dominate(self):
        res = tea_annualize(TEAInputs(operating_costs={"ops": 100.0},
                                      revenues={"sales": 10.0},
                                      income_tax=0.3))
        assert res.breakdown["income_tax"] == 0.0
        assert res.net_annual == pytest.approx(365.0 * 90.0)

    def test_per_capita(self):
        res = tea_annualize(TEAInputs(operating_costs={"ops": 1.0},
                                      population=100.0))
        assert res.per_capita == pytest.approx(3.65)
        res = tea_annualize(TEAInputs(operating_costs={"ops": 1.0}))
        assert res.per_capita is None

    def test_validation(self):
        with pytest.raises(AccountingError):
            TEAInputs(discount_rate=-0.1)
        with pytest.raises(AccountingError):
            TEAInputs(horizon_yr=0.5)
        with pytest.raises(AccountingError):
            TEAInputs(income_tax=1.0)
        with pytest.raises(AccountingError):
            CapitalItem("x", 10.0, 0.0)


class TestAerationEnergy:
    def test_baseline_formula_value(self):
        ae = aeration_energy(BSM1Settings())
        pinned = 8.0 / 1800.0 * (1333.0 * 240.0 + 1333.0 * 240.0
                                 + 1333.0 * 84.0)
        assert ae == pytest.approx(pinned, abs=1e-6)
        assert ae == pytest.approx(3341.3866666666668, abs=1e-6)

    def test_zero_aeration(self):
        st = BSM1Settings(K_La1=0.0, K_La2=0.0)
        assert aeration_energy(st) == 0.0

    def test_linear_in_kla(self):
        full = aeration_energy(BSM1Settings())
        half = aeration_energy(BSM1Settings(K_La1=120.0, K_La2=42.0))
        assert half == pytest.approx(0.5 * full, rel=1e-12)


class TestBsm1OperatingBindings:
    def test_quantities_and_opex(self, baseline):
        problem, ss = baseline
        inv, opex = bsm1_operating_bindings(problem, ss,
                                            electricity_price=0.124,
                                            sludge_price=0.05)
        by_id = {e.item.id: e for e in inv.entries}
        ae = aeration_energy(BSM1Settings())
        sp = effluent_metrics(problem, ss)["sludge_production"]
        assert by_id["aeration_electricity"].quantity == pytest.approx(ae)
        assert by_id["sludge_disposal"].quantity == pytest.approx(sp)
        assert opex["aeration_energy"] == pytest.approx(0.124 * ae)
        assert opex["sludge_disposal"] == pytest.approx(0.05 * sp)

    def test_lca_through_bindings(self, baseline):
        problem, ss = baseline
        elec = ImpactItem("aeration_electricity", "kWh", cf={"GWP": 0.7})
        sludge = ImpactItem("sludge_disposal", "kg", cf={"GWP": 0.2})
        inv, _ = bsm1_operating_bindings(problem, ss, electricity_item=elec,
                                         sludge_item=sludge)
        res = lca_total(inv, [GWP], horizon_days=365.0)
        ae = aeration_energy(BSM1Settings())
        sp = effluent_metrics(problem, ss)["sludge_production"]
        expect = 365.0 * (0.7 * ae + 0.2 * sp)
        assert res.totals["GWP"] == pytest.approx(expect, rel=1e-12)

    def test_refresh_follows_resimulation(self, baseline):
        problem, ss = baseline
        inv, _ = bsm1_operating_bindings(problem, ss)
        # same state: refresh is a no-op
        same = inv.refresh(problem, ss)
        for a, b in zip(inv.entries, same.entries):
            assert a.quantity == b.quantity
        # less aeration: the linked quantities move with the new plant
        low = BSM1Settings(K_La1=180.0)
        problem2 = assemble_ode(build_bsm1(low, ASM1ParameterSet()))
        ss2 = steady_state(problem2, ss.state, tol_ss=1e-3, t_max=150.0)
        fresh = inv.refresh(problem2, ss2)
        by_id = {e.item.id: e for e in fresh.entries}
        assert by_id["aeration_electricity"].quantity == pytest.approx(
            aeration_energy(low))
        sp2 = effluent_metrics(problem2, ss2)["sludge_production"]
        assert by_id["sludge_disposal"].quantity == pytest.approx(sp2)

    def test_unconverged_state_rejected(self, baseline):
        problem, ss = baseline

        class Fake:
            converged = False

        with pytest.raises(FlowsheetError):
            bsm1_operating_bindings(problem, Fake())
