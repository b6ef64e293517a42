"""Techno-economic and life-cycle accounting on steady-state results.

Impact indicators and items with characterization factors turn an
inventory of material and energy quantities into per-indicator impact
totals; a capital-recovery-factor model annualizes capital against
daily operating costs and revenues. The BSM1 bindings supply the two
operating inventory lines (aeration electricity, sludge disposal) that
re-evaluate automatically from a converged steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .flowsheet import FlowsheetError, effluent_metrics


class AccountingError(ValueError):
    """Invalid accounting input: factors, units, or lifetimes."""


@dataclass(frozen=True)
class ImpactIndicator:
    """A reporting category for environmental impact.

    Parameters
    ----------
    id : str
        Unique indicator name (e.g. "GWP").
    unit : str
        Reporting unit (e.g. "kg CO2eq").
    """

    id: str
    unit: str

    def __post_init__(self):
        if not self.id:
            raise AccountingError("indicator id must be non-empty")


@dataclass(frozen=True)
class ImpactItem:
    """A material or energy flow with characterization factors.

    Parameters
    ----------
    id : str
    functional_unit : str
        Unit the quantities and factors refer to (e.g. "kWh", "kg").
    cf : dict
        Characterization factors, indicator id -> impact per
        functional unit.
    linkage : callable, optional
        `linkage(problem, steady) -> quantity per day`; linked items
        refresh whenever the system is re-simulated.
    offset : bool
        Offsets (credits) may carry negative quantities.
    """

    id: str
    functional_unit: str
    cf: dict = field(default_factory=dict)
    linkage: object = None
    offset: bool = False

    def __post_init__(self):
        for ind, v in self.cf.items():
            if not math.isfinite(v):
                raise AccountingError(
                    f"item {self.id!r}: factor for {ind!r} is not finite")

    def factor(self, indicator_id):
        if indicator_id not in self.cf:
            raise AccountingError(
                f"item {self.id!r} has no characterization factor for "
                f"{indicator_id!r}")
        return self.cf[indicator_id]


@dataclass(frozen=True)
class InventoryEntry:
    """One inventory line: an item with its quantity and provenance.

    Parameters
    ----------
    item : ImpactItem
    quantity : float
        In the item's functional unit; interpreted per day or per
        lifetime according to `basis`.
    basis : {"per_day", "per_lifetime"}
    source : {"stream", "unit", "standalone"}
    unit : str, optional
        Quantity unit; when given, it must equal the item's
        functional unit.
    """

    item: ImpactItem
    quantity: float
    basis: str = "per_day"
    source: str = "standalone"
    unit: str = None

    def __post_init__(self):
        if self.basis not in ("per_day", "per_lifetime"):
            raise AccountingError(f"unknown basis {self.basis!r}")
        if self.source not in ("stream", "unit", "standalone"):
            raise AccountingError(f"unknown source {self.source!r}")
        if self.unit is not None and self.unit != self.item.functional_unit:
            raise AccountingError(
                f"entry unit {self.unit!r} does not match item "
                f"{self.item.id!r} functional unit "
                f"{self.item.functional_unit!r}")
        if not math.isfinite(self.quantity):
            raise AccountingError(f"item {self.item.id!r}: quantity not finite")
        if self.quantity < 0.0 and not self.item.offset:
            raise AccountingError(
                f"item {self.item.id!r}: negative quantity on a non-offset")

    def quantity_over(self, horizon_days):
        if self.basis == "per_day":
            return self.quantity * horizon_days
        return self.quantity


@dataclass(frozen=True)
class Inventory:
    """An immutable collection of inventory entries."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def refresh(self, problem, steady):
        """Re-evaluate every linked entry against a new steady state."""
        new = []
        for e in self.entries:
            if e.item.linkage is not None:
                new.append(replace(e, quantity=float(
                    e.item.linkage(problem, steady))))
            else:
                new.append(e)
        return Inventory(tuple(new))


@dataclass(frozen=True)
class LCAResult:
    """Per-indicator totals with a per-item breakdown."""

    totals: dict
    breakdown: dict
    horizon_days: float


def lca_total(inventory, indicators, horizon_days):
    """Characterize an inventory over a horizon.

    Parameters
    ----------
    inventory : Inventory
    indicators : sequence of ImpactIndicator
    horizon_days : float

    Returns
    -------
    LCAResult
        `totals[ind.id]` and `breakdown[ind.id][item.id]`; the
        breakdown sums to the total exactly.

    Raises
    ------
    AccountingError
        If any item lacks a factor for a requested indicator.
    """
    if horizon_days < 0.0:
        raise AccountingError("horizon must be non-negative")
    totals = {}
    breakdown = {}
    for ind in indicators:
        per_item = {}
        for e in inventory.entries:
            contrib = e.quantity_over(horizon_days) * e.item.factor(ind.id)
            per_item[e.item.id] = per_item.get(e.item.id, 0.0) + contrib
        breakdown[ind.id] = per_item
        totals[ind.id] = float(sum(per_item.values()))
    return LCAResult(totals, breakdown, float(horizon_days))


@dataclass(frozen=True)
class CapitalItem:
    """A capital expenditure annualized over its lifetime."""

    id: str
    cost: float
    lifetime_yr: float

    def __post_init__(self):
        if self.lifetime_yr <= 0.0:
            raise AccountingError(
                f"capital item {self.id!r}: lifetime must be positive")


@dataclass(frozen=True)
class TEAInputs:
    """Inputs for the annualized-cost model.

    Parameters
    ----------
    capital : sequence of CapitalItem
    operating_costs : dict
        Name -> cost per day.
    revenues : dict
        Name -> revenue per day.
    discount_rate : float
        r >= 0.
    horizon_yr : float
        Analysis horizon n >= 1 (also the default capital lifetime
        reference; each capital item annualizes over its own life).
    income_tax : float
        Rate applied to net positive revenue only.
    population : float, optional
        Served population for per-capita reporting.
    """

    capital: tuple = ()
    operating_costs: dict = field(default_factory=dict)
    revenues: dict = field(default_factory=dict)
    discount_rate: float = 0.0
    horizon_yr: float = 1.0
    income_tax: float = 0.0
    population: float = None

    def __post_init__(self):
        object.__setattr__(self, "capital", tuple(self.capital))
        if self.discount_rate < 0.0:
            raise AccountingError("discount rate must be >= 0")
        if self.horizon_yr < 1.0:
            raise AccountingError("analysis horizon must be >= 1 yr")
        if not 0.0 <= self.income_tax < 1.0:
            raise AccountingError("income tax rate must be in [0, 1)")


def capital_recovery_factor(r, n):
    """CRF(r, n) = r (1+r)^n / ((1+r)^n - 1), continuously 1/n at r=0.

    Uses expm1/log1p so tiny rates do not lose the denominator to
    cancellation.
    """
    if n <= 0.0:
        raise AccountingError("lifetime must be positive")
    if r < 0.0:
        raise AccountingError("discount rate must be >= 0")
    if r == 0.0:
        return 1.0 / n
    g = n * math.log1p(r)
    return r * math.exp(g) / math.expm1(g)


@dataclass(frozen=True)
class TEAResult:
    """Annualized cost summary."""

    net_annual: float
    per_capita: float
    breakdown: dict


def tea_annualize(inputs):
    """Annualize capital and roll up daily cash flows.

    Net annual cost = sum of cost * CRF(r, lifetime) over capital
    items + 365 * (operating costs per day - revenues per day) +
    income tax, where tax applies only when revenues exceed all
    costs (net positive revenue).

    Returns
    -------
    TEAResult
        `per_capita` is None without a population. The breakdown
        carries each capital item ("capital:<id>"), each operating
        cost ("opex:<name>"), each revenue ("revenue:<name>",
        negative), and "income_tax".
    """
    breakdown = {}
    annualized = 0.0
    for c in inputs.capital:
        a = c.cost * capital_recovery_factor(inputs.discount_rate,
                                             c.lifetime_yr)
        breakdown[f"capital:{c.id}"] = a
        annualized += a
    opex = 0.0
    for name, v in inputs.operating_costs.items():
        breakdown[f"opex:{name}"] = 365.0 * v
        opex += 365.0 * v
    revenue = 0.0
    for name, v in inputs.revenues.items():
        breakdown[f"revenue:{name}"] = -365.0 * v
        revenue += 365.0 * v
    net_revenue = revenue - opex - annualized
    tax = inputs.income_tax * net_revenue if net_revenue > 0.0 else 0.0
    breakdown["income_tax"] = tax
    net = annualized + opex - revenue + tax
    per_capita = net / inputs.population if inputs.population else None
    return TEAResult(net, per_capita, breakdown)


# BSM1 operating bindings

def aeration_energy(settings):
    """Aeration electricity demand, kWh per day.

    The benchmark energy convention: AE = (DO_sat/1800) * sum of
    V_i * K_La,i over the aerated tanks.
    """
    return settings.DO_sat / 1800.0 * (
        settings.V_o * settings.K_La1
        + settings.V_o * settings.K_La1
        + settings.V_o * settings.K_La2)


def _aeration_linkage(problem, steady):
    return aeration_energy(problem.graph.roles["settings"])


def _sludge_linkage(problem, steady):
    return effluent_metrics(problem, steady)["sludge_production"]


def bsm1_operating_bindings(problem, steady, electricity_item=None,
                            sludge_item=None, electricity_price=0.0,
                            sludge_price=0.0):
    """Operating inventory and cost lines for a converged BSM1 state.

    Parameters
    ----------
    problem : OdeProblem
        Assembled from `build_bsm1`.
    steady : SteadyState
        Must be converged.
    electricity_item, sludge_item : ImpactItem, optional
        Items to bind; defaults have no characterization factors.
    electricity_price : float
        Cost per kWh.
    sludge_price : float
        Cost per kg disposed.

    Returns
    -------
    (Inventory, dict)
        The inventory's two entries are linked so `refresh` follows a
        re-simulation; the dict maps operating-cost names to cost per
        day, ready for TEAInputs.
    """
    if not getattr(steady, "converged", False):
        raise FlowsheetError(
            "operating bindings need a converged steady state")
    roles = getattr(problem.graph, "roles", None)
    if not roles or "settings" not in roles:
        raise FlowsheetError("problem does not carry BSM1 roles")
    if electricity_item is None:
        electricity_item = ImpactItem("aeration_electricity", "kWh",
                                      linkage=_aeration_linkage)
    elif electricity_item.linkage is None:
        electricity_item = replace(electricity_item,
                                   linkage=_aeration_linkage)
    if sludge_item is None:
        sludge_item = ImpactItem("sludge_disposal", "kg",
                                 linkage=_sludge_linkage)
    elif sludge_item.linkage is None:
        sludge_item = replace(sludge_item, linkage=_sludge_linkage)
    ae = _aeration_linkage(problem, steady)
    sp = _sludge_linkage(problem, steady)
    inventory = Inventory((
        InventoryEntry(electricity_item, float(ae), basis="per_day",
                       source="unit"),
        InventoryEntry(sludge_item, float(sp), basis="per_day",
                       source="stream"),
    ))
    opex = {
        "aeration_energy": float(ae) * electricity_price,
        "sludge_disposal": float(sp) * sludge_price,
    }
    return inventory, opex
