"""JSON run configuration: one file, one section per module.

Unknown keys are rejected everywhere, parameter paths are checked
against the model dataclasses, and nothing here ever writes back to
the file. Precedence is flag > config > built-in baseline; the
baseline with no config at all is the standard BSM1 plant.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .flowsheet import BSM1Settings
from .kinetics import ASM1ParameterSet
from .units import SettlingParams
from .uq import DistributionSpec, UQError
from .accounting import (AccountingError, CapitalItem, ImpactIndicator,
                         ImpactItem)


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad type, bad path."""


_ASM1_FIELDS = tuple(f.name for f in dataclasses.fields(ASM1ParameterSet))
_SETTLING_FIELDS = tuple(f.name for f in dataclasses.fields(SettlingParams))
_SETTINGS_FIELDS = tuple(f.name for f in dataclasses.fields(BSM1Settings))


def _require_mapping(obj, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    return obj


def _reject_unknown(d, allowed, where):
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(v)


def validate_parameter_path(name):
    """Check a "scope.field" path against the model dataclasses."""
    scope, _, attr = str(name).partition(".")
    if scope == "asm1" and attr in _ASM1_FIELDS:
        return name
    if scope == "settings" and attr in _SETTINGS_FIELDS \
            and attr != "influent":
        return name
    raise ConfigError(f"unresolvable parameter path {name!r}")


@dataclass(frozen=True)
class RunOptions:
    """Scalar run options shared across commands."""

    seed: int = 0
    n: int = 1000
    n_trajectory: int = 20
    levels: int = 4
    t_end: float = 50.0
    rtol: float = 1e-5
    atol: float = 1e-7
    tol_ss: float = 1e-5
    t_max: float = 200.0
    check_interval: float = 10.0
    mc_tol_ss: float = 1e-3
    mc_t_max: float = 150.0
    warm_start: bool = True
    workers: int = None
    out: str = "results"


@dataclass(frozen=True)
class FilterOptions:
    """Threshold split for Monte Carlo filtering."""

    metric: str = "TN"
    threshold: float = 18.0


@dataclass(frozen=True)
class SweepOptions:
    """Two-parameter grid bounds for decision sweeps."""

    x: str = "settings.K_La1"
    x_min: float = 80.0
    x_max: float = 300.0
    nx: int = 12
    y: str = "settings.Q_WAS"
    y_min: float = 300.0
    y_max: float = 900.0
    ny: int = 13


@dataclass(frozen=True)
class TEAOptions:
    """TEA section: rates, capital, and accounting horizon."""

    discount_rate: float = 0.0
    horizon_yr: float = 1.0
    income_tax: float = 0.0
    population: float = None
    capital: tuple = ()
    operating_costs: dict = field(default_factory=dict)
    revenues: dict = field(default_factory=dict)
    electricity_price: float = 0.0
    sludge_price: float = 0.0
    lca_horizon_days: float = 365.0


@dataclass(frozen=True)
class RunConfig:
    """A fully parsed run configuration."""

    settings: BSM1Settings
    asm1: ASM1ParameterSet
    settling: SettlingParams
    run: RunOptions
    distributions: tuple
    filter: FilterOptions
    sweep: SweepOptions
    indicators: tuple
    items: dict
    tea: TEAOptions
    has_accounting: bool


def _parse_settings(d):
    d = _require_mapping(d, "settings")
    _reject_unknown(d, _SETTINGS_FIELDS, "settings")
    kw = {}
    for k, v in d.items():
        if k == "influent":
            kw[k] = {str(c): _number(x, f"settings.influent.{c}")
                     for c, x in _require_mapping(v, "settings.influent")
                     .items()}
        elif k in ("n_layers", "feed_layer"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"settings.{k} must be an integer")
            kw[k] = v
        else:
            kw[k] = _number(v, f"settings.{k}")
    try:
        return BSM1Settings(**kw)
    except ValueError as e:
        raise ConfigError(f"settings: {e}")


def _parse_fields(d, cls, fields, where):
    d = _require_mapping(d, where)
    _reject_unknown(d, fields, where)
    kw = {k: _number(v, f"{where}.{k}") for k, v in d.items()}
    try:
        return cls(**kw)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}")


def _parse_run(d):
    d = _require_mapping(d, "run")
    fields = {f.name: f for f in dataclasses.fields(RunOptions)}
    _reject_unknown(d, fields, "run")
    kw = {}
    for k, v in d.items():
        if k == "out":
            if not isinstance(v, str):
                raise ConfigError("run.out must be a string")
            kw[k] = v
        elif k == "warm_start":
            if not isinstance(v, bool):
                raise ConfigError("run.warm_start must be a boolean")
            kw[k] = v
        elif k in ("seed", "n", "n_trajectory", "levels", "workers"):
            if v is None and k == "workers":
                kw[k] = None
            elif isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"run.{k} must be an integer")
            else:
                kw[k] = v
        else:
            kw[k] = _number(v, f"run.{k}")
    opts = RunOptions(**kw)
    if opts.seed < 0:
        raise ConfigError("run.seed must be >= 0")
    for name in ("n", "n_trajectory"):
        if getattr(opts, name) < 1:
            raise ConfigError(f"run.{name} must be >= 1")
    return opts


def _parse_distributions(items):
    if not isinstance(items, list):
        raise ConfigError("distributions must be a list")
    specs = []
    for i, d in enumerate(items):
        where = f"distributions[{i}]"
        d = _require_mapping(d, where)
        _reject_unknown(d, ("name", "kind", "min", "max", "mode", "baseline"),
                        where)
        for key in ("name", "kind", "min", "max"):
            if key not in d:
                raise ConfigError(f"{where} is missing {key!r}")
        validate_parameter_path(d["name"])
        try:
            specs.append(DistributionSpec(
                str(d["name"]), str(d["kind"]),
                _number(d["min"], f"{where}.min"),
                _number(d["max"], f"{where}.max"),
                mode=None if d.get("mode") is None
                else _number(d["mode"], f"{where}.mode"),
                baseline=None if d.get("baseline") is None
                else _number(d["baseline"], f"{where}.baseline")))
        except UQError as e:
            raise ConfigError(f"{where}: {e}")
    return tuple(specs)


def _parse_filter(d):
    d = _require_mapping(d, "filter")
    _reject_unknown(d, ("metric", "threshold"), "filter")
    kw = {}
    if "metric" in d:
        if not isinstance(d["metric"], str):
            raise ConfigError("filter.metric must be a string")
        kw["metric"] = d["metric"]
    if "threshold" in d:
        kw["threshold"] = _number(d["threshold"], "filter.threshold")
    return FilterOptions(**kw)


def _parse_sweep(d):
    d = _require_mapping(d, "sweep")
    fields = tuple(f.name for f in dataclasses.fields(SweepOptions))
    _reject_unknown(d, fields, "sweep")
    kw = {}
    for k, v in d.items():
        if k in ("x", "y"):
            kw[k] = validate_parameter_path(v)
        elif k in ("nx", "ny"):
            if isinstance(v, bool) or not isinstance(v, int) or v < 2:
                raise ConfigError(f"sweep.{k} must be an integer >= 2")
            kw[k] = v
        else:
            kw[k] = _number(v, f"sweep.{k}")
    opts = SweepOptions(**kw)
    if opts.x == opts.y:
        raise ConfigError("sweep.x and sweep.y must differ")
    if not opts.x_min < opts.x_max or not opts.y_min < opts.y_max:
        raise ConfigError("sweep bounds must satisfy min < max")
    return opts


def _parse_indicators(items):
    if not isinstance(items, list):
        raise ConfigError("impact_indicators must be a list")
    out = []
    seen = set()
    for i, d in enumerate(items):
        where = f"impact_indicators[{i}]"
        d = _require_mapping(d, where)
        _reject_unknown(d, ("id", "unit"), where)
        if "id" not in d or "unit" not in d:
            raise ConfigError(f"{where} needs id and unit")
        if d["id"] in seen:
            raise ConfigError(f"duplicate indicator id {d['id']!r}")
        seen.add(d["id"])
        out.append(ImpactIndicator(str(d["id"]), str(d["unit"])))
    return tuple(out)


def _parse_items(d):
    d = _require_mapping(d, "impact_items")
    items = {}
    for item_id, spec in d.items():
        where = f"impact_items.{item_id}"
        spec = _require_mapping(spec, where)
        _reject_unknown(spec, ("functional_unit", "cf", "offset"), where)
        if "functional_unit" not in spec:
            raise ConfigError(f"{where} needs functional_unit")
        cf = {str(k): _number(v, f"{where}.cf.{k}")
              for k, v in _require_mapping(spec.get("cf", {}),
                                           f"{where}.cf").items()}
        offset = spec.get("offset", False)
        if not isinstance(offset, bool):
            raise ConfigError(f"{where}.offset must be a boolean")
        try:
            items[str(item_id)] = ImpactItem(
                str(item_id), str(spec["functional_unit"]), cf,
                offset=offset)
        except AccountingError as e:
            raise ConfigError(f"{where}: {e}")
    return items


def _parse_tea(d):
    d = _require_mapping(d, "tea")
    fields = tuple(f.name for f in dataclasses.fields(TEAOptions))
    _reject_unknown(d, fields, "tea")
    kw = {}
    for k, v in d.items():
        if k == "capital":
            if not isinstance(v, list):
                raise ConfigError("tea.capital must be a list")
            cap = []
            for i, c in enumerate(v):
                where = f"tea.capital[{i}]"
                c = _require_mapping(c, where)
                _reject_unknown(c, ("id", "cost", "lifetime_yr"), where)
                for key in ("id", "cost", "lifetime_yr"):
                    if key not in c:
                        raise ConfigError(f"{where} needs {key!r}")
                try:
                    cap.append(CapitalItem(str(c["id"]),
                                           _number(c["cost"],
                                                   f"{where}.cost"),
                                           _number(c["lifetime_yr"],
                                                   f"{where}.lifetime_yr")))
                except AccountingError as e:
                    raise ConfigError(f"{where}: {e}")
            kw[k] = tuple(cap)
        elif k in ("operating_costs", "revenues"):
            kw[k] = {str(n): _number(x, f"tea.{k}.{n}")
                     for n, x in _require_mapping(v, f"tea.{k}").items()}
        elif k == "population":
            kw[k] = None if v is None else _number(v, "tea.population")
        else:
            kw[k] = _number(v, f"tea.{k}")
    try:
        return TEAOptions(**kw)
    except AccountingError as e:
        raise ConfigError(f"tea: {e}")


_SECTIONS = ("settings", "asm1", "settling", "run", "distributions",
             "filter", "sweep", "impact_indicators", "impact_items", "tea")


def config_from_dict(data):
    """Build a RunConfig from a parsed JSON object (strict)."""
    data = _require_mapping(data, "config")
    _reject_unknown(data, _SECTIONS, "config")
    settings = _parse_settings(data.get("settings", {}))
    try:
        asm1 = _parse_fields(data.get("asm1", {}), ASM1ParameterSet,
                             _ASM1_FIELDS, "asm1")
    except TypeError as e:
        raise ConfigError(f"asm1: {e}")
    settling = _parse_fields(data.get("settling", {}), SettlingParams,
                             _SETTLING_FIELDS, "settling")
    run = _parse_run(data.get("run", {}))
    dists = None
    if "distributions" in data and data["distributions"] is not None:
        dists = _parse_distributions(data["distributions"])
    flt = _parse_filter(data.get("filter", {}))
    sweep = _parse_sweep(data.get("sweep", {}))
    indicators = _parse_indicators(data.get("impact_indicators", []))
    items = _parse_items(data.get("impact_items", {}))
    tea = _parse_tea(data.get("tea", {}))
    has_accounting = bool(set(data)
                          & {"impact_indicators", "impact_items", "tea"})
    return RunConfig(settings=settings, asm1=asm1, settling=settling,
                     run=run, distributions=dists, filter=flt, sweep=sweep,
                     indicators=indicators, items=items, tea=tea,
                     has_accounting=has_accounting)


def load_config(path=None):
    """Read a JSON config file; None loads the bundled baseline."""
    if path is None:
        from importlib import resources
        ref = resources.files("asmbench").joinpath(
            "data/bsm1-baseline.json")
        text = ref.read_text(encoding="utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    return config_from_dict(data)
