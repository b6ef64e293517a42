"""Activated-sludge process simulation and uncertainty quantification.

Gujer-matrix ASM1 kinetics with automatic stoichiometry completion,
a layered settler, flowsheet assembly into stiff global ODEs, Monte
Carlo and Morris screening, Monte Carlo filtering, decision sweeps,
and techno-economic / life-cycle accounting for the BSM1 plant.
"""

from .core import (COMPOSITE_NAMES, Component, ComponentSet, CompositeParams,
                   WasteStream, asm1_component_set, composite,
                   composite_weights, mass_flow, mix)
from .kinetics import (UNKNOWN, AerationProcess, ASM1ParameterSet,
                       GujerMatrix, KineticProcess, asm1_matrix, asm1_rates,
                       complete_stoichiometry, production_rates)
from .units import (CSTR, Clarifier, ConversionReactor, Mixer, Reaction,
                    SettlingParams, Splitter, clarifier_derivative,
                    clarifier_outlets, cstr_derivative, is_static,
                    settling_velocity, static_convert)
from .flowsheet import (BSM1_INFLUENT, BSM1_INIT, METRIC_NAMES, BSM1Settings,
                        ConvergenceError, FlowsheetError, OdeProblem,
                        SolverError, SteadyState, SystemGraph, Trajectory,
                        assemble_ode, bsm1_initial_state, build_bsm1,
                        converge_equilibrium, effluent_metrics, integrate,
                        resolve_flows, steady_state)
from .uq import (DistributionSpec, FilterResult, ModelBinding,
                 MonteCarloError, MonteCarloResult, MorrisResult,
                 SampleMatrix, SweepResult, UQError, bsm1_binding,
                 bsm1_parameter_specs, grid_sweep, ks_2sample, mc_filter,
                 morris, run_monte_carlo, sample_lhs, sample_random,
                 spearman)
from .accounting import (AccountingError, CapitalItem, ImpactIndicator,
                         ImpactItem, Inventory, InventoryEntry, LCAResult,
                         TEAInputs, TEAResult, aeration_energy,
                         bsm1_operating_bindings, capital_recovery_factor,
                         lca_total, tea_annualize)
from .config import ConfigError, RunConfig, config_from_dict, load_config

__version__ = "0.1.0"

__all__ = [
    "COMPOSITE_NAMES", "Component", "ComponentSet", "CompositeParams",
    "WasteStream", "asm1_component_set", "composite", "composite_weights",
    "mass_flow", "mix",
    "UNKNOWN", "AerationProcess", "ASM1ParameterSet", "GujerMatrix",
    "KineticProcess", "asm1_matrix", "asm1_rates", "complete_stoichiometry",
    "production_rates",
    "CSTR", "Clarifier", "ConversionReactor", "Mixer", "Reaction",
    "SettlingParams", "Splitter", "clarifier_derivative", "clarifier_outlets",
    "cstr_derivative", "is_static", "settling_velocity", "static_convert",
    "BSM1_INFLUENT", "BSM1_INIT", "METRIC_NAMES", "BSM1Settings",
    "ConvergenceError", "FlowsheetError", "OdeProblem", "SolverError",
    "SteadyState", "SystemGraph", "Trajectory", "assemble_ode",
    "bsm1_initial_state", "build_bsm1", "converge_equilibrium",
    "effluent_metrics", "integrate", "resolve_flows", "steady_state",
    "DistributionSpec", "FilterResult", "ModelBinding", "MonteCarloError",
    "MonteCarloResult", "MorrisResult", "SampleMatrix", "SweepResult",
    "UQError", "bsm1_binding", "bsm1_parameter_specs", "grid_sweep",
    "ks_2sample", "mc_filter", "morris", "run_monte_carlo", "sample_lhs",
    "sample_random", "spearman",
    "AccountingError", "CapitalItem", "ImpactIndicator", "ImpactItem",
    "Inventory", "InventoryEntry", "LCAResult", "TEAInputs", "TEAResult",
    "aeration_energy", "bsm1_operating_bindings", "capital_recovery_factor",
    "lca_total", "tea_annualize",
    "ConfigError", "RunConfig", "config_from_dict", "load_config",
    "__version__",
]
