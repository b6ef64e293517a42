"""Gujer-matrix kinetics: processes, stoichiometry completion, ASM1.

A biokinetic model is a set of processes, each pairing a stoichiometric
row with a rate law. Rows may leave one coefficient per declared
conservation law unknown; :func:`complete_stoichiometry` solves the
resulting linear system so each conservation holds exactly. Net
production rates are the rate vector times the stoichiometric matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType

import numpy as np

from .core import ComponentSet, CompositeParams, asm1_component_set


class _Unknown:
    """Sentinel marking a stoichiometric coefficient to be solved for."""

    def __repr__(self):
        return "UNKNOWN"


UNKNOWN = _Unknown()


@dataclass(frozen=True)
class KineticProcess:
    """One process: a stoichiometric row plus a rate law.

    Parameters
    ----------
    id : str
        Process name.
    stoichiometry : mapping
        {component id: coefficient}; a coefficient may be the
        :data:`UNKNOWN` sentinel, one per entry of `conserved_for`.
    rate_law : callable
        ``rate_law(conc, params) -> float``, non-negative on
        non-negative concentrations.
    conserved_for : tuple of str
        Conservation laws that close this row, e.g. ``("COD",)``. The
        number of UNKNOWN coefficients must match.
    weights : mapping, optional
        {law: {component id: weight}} used to complete and to audit the
        row. Attached by :func:`complete_stoichiometry`.
    """

    id: str
    stoichiometry: dict
    rate_law: object
    conserved_for: tuple = ()
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        stoich = dict(self.stoichiometry)
        n_unknown = sum(1 for v in stoich.values() if v is UNKNOWN)
        if n_unknown > 0 and n_unknown != len(self.conserved_for):
            raise ValueError(
                f"process {self.id!r}: {n_unknown} unknown coefficients but "
                f"{len(self.conserved_for)} conservation laws declared"
            )
        for cid, v in stoich.items():
            if v is not UNKNOWN and not np.isfinite(v):
                raise ValueError(f"process {self.id!r}: coefficient {cid} not finite")
        object.__setattr__(self, "stoichiometry", MappingProxyType(stoich))
        object.__setattr__(self, "conserved_for", tuple(self.conserved_for))
        object.__setattr__(
            self, "weights",
            MappingProxyType({k: MappingProxyType(dict(v))
                              for k, v in self.weights.items()}))

    @property
    def is_complete(self):
        return not any(v is UNKNOWN for v in self.stoichiometry.values())

    def rate(self, conc, params):
        return self.rate_law(conc, params)

    def residual(self, law, weights=None):
        """Conservation residual sum(nu_c * w_c) for a completed row."""
        if not self.is_complete:
            raise ValueError(f"process {self.id!r} still has unknown coefficients")
        if weights is None:
            if law not in self.weights:
                raise KeyError(f"process {self.id!r} has no stored weights for {law!r}")
            weights = self.weights[law]
        return float(sum(nu * weights.get(cid, 0.0)
                         for cid, nu in self.stoichiometry.items()))


def complete_stoichiometry(process, weights):
    """Solve a process row's unknown coefficients from conservation laws.

    Parameters
    ----------
    process : KineticProcess
        Row with as many UNKNOWN coefficients as declared laws.
    weights : mapping
        {law: {component id: weight}}; every law in
        ``process.conserved_for`` must be present.

    Returns
    -------
    KineticProcess
        Completed row with the weight maps attached for later audits.
        A process with nothing to solve is returned unchanged.

    Raises
    ------
    ValueError
        If a required law has no weights, or the linear system is
        singular (coefficient not determined by the declared laws).
    """
    unknowns = [cid for cid, v in process.stoichiometry.items() if v is UNKNOWN]
    if not unknowns and not process.conserved_for:
        return process
    for law in process.conserved_for:
        if law not in weights:
            raise ValueError(f"process {process.id!r}: no weights given for law {law!r}")

    n = len(unknowns)
    A = np.zeros((n, n))
    b = np.zeros(n)
    for i, law in enumerate(process.conserved_for):
        w = weights[law]
        for j, cid in enumerate(unknowns):
            A[i, j] = w.get(cid, 0.0)
        b[i] = -sum(nu * w.get(cid, 0.0)
                    for cid, nu in process.stoichiometry.items()
                    if nu is not UNKNOWN)
    s = np.linalg.svd(A, compute_uv=False) if n else np.array([])
    if n and s[-1] <= 1e-12 * max(1.0, float(s[0])):
        raise ValueError(
            f"process {process.id!r}: conservation system is singular; the "
            f"declared laws do not determine {unknowns}"
        )
    x = np.linalg.solve(A, b) if n else b
    stoich = dict(process.stoichiometry)
    for cid, val in zip(unknowns, x):
        stoich[cid] = float(val)
    done = replace(process, stoichiometry=stoich,
                   weights={law: dict(weights[law]) for law in process.conserved_for})
    for law in done.conserved_for:
        res = done.residual(law)
        if abs(res) > 1e-12:
            raise ValueError(
                f"process {process.id!r}: completion left a {law} residual of {res:g}"
            )
    return done


class GujerMatrix:
    """Stoichiometric matrix and rate laws over one component set.

    Parameters
    ----------
    components : ComponentSet
    processes : sequence of KineticProcess
        All rows must be complete (no UNKNOWN left) and reference only
        known components.
    rate_function : callable, optional
        Fused ``rate_function(conc, params) -> (n_process,) array``
        evaluating all rates at once; falls back to the per-process
        rate laws when omitted. `conc` may carry leading batch axes.
    params : object, optional
        Default parameter set consistent with the matrix coefficients.
    """

    def __init__(self, components, processes, rate_function=None, params=None):
        processes = tuple(processes)
        for p in processes:
            if not p.is_complete:
                raise ValueError(f"process {p.id!r} has unresolved coefficients")
            for cid in p.stoichiometry:
                components.index(cid)
        ids = [p.id for p in processes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate process ids")
        self.components = components
        self.processes = processes
        self.params = params
        self._rate_function = rate_function
        nu = np.zeros((len(processes), len(components)))
        for i, p in enumerate(processes):
            for cid, v in p.stoichiometry.items():
                nu[i, components.index(cid)] = v
        nu.flags.writeable = False
        self.nu = nu

    @property
    def process_ids(self):
        return tuple(p.id for p in self.processes)

    def rates(self, conc, params=None):
        """Process rate vector at the given concentrations."""
        if params is None:
            params = self.params
        if self._rate_function is not None:
            return self._rate_function(conc, params)
        conc = np.asarray(conc, dtype=float)
        return np.array([p.rate_law(conc, params) for p in self.processes])

    def production(self, conc, params=None):
        return production_rates(self, conc, params)

    def conservation_residuals(self, law, weights=None):
        """Residual of one conservation law for every process row.

        Uses each row's stored weight map unless an explicit map is
        given; rows without stored weights for the law require one.
        """
        out = {}
        for p in self.processes:
            if weights is None and law not in p.weights:
                continue
            out[p.id] = p.residual(law, weights)
        return out


def production_rates(matrix, conc, params=None):
    """Net specific production of every component, rate @ nu.

    Parameters
    ----------
    matrix : GujerMatrix
    conc : array_like
        Concentration vector, or a batch with components on the last
        axis.
    params : parameter set, optional
        Defaults to the matrix's own.

    Returns
    -------
    ndarray
        Same leading shape as `conc`, component production rates in
        concentration units per day.
    """
    rho = matrix.rates(np.asarray(conc, dtype=float), params)
    return rho @ matrix.nu


@dataclass(frozen=True)
class AerationProcess:
    """Gas-liquid oxygen transfer K_La * (DO_sat - S_O).

    Kept separate from the biokinetic matrix so conservation audits can
    span the biology alone.
    """

    K_La: float
    DO_sat: float = 8.0

    def __post_init__(self):
        if self.K_La < 0.0:
            raise ValueError("K_La must be non-negative")
        if self.DO_sat <= 0.0:
            raise ValueError("DO_sat must be positive")

    def rate(self, S_O):
        """Transfer rate in g O2/m3/d; negative when supersaturated."""
        return self.K_La * (self.DO_sat - S_O)


@dataclass(frozen=True)
class ASM1ParameterSet:
    """ASM1 kinetic and stoichiometric parameters at 20 C.

    Rates are d^-1, half-saturation constants g/m3, yields and
    fractions dimensionless. `f_Pobs` is the observed inert fraction of
    biomass products; the matrix uses the death-regeneration value
    ``f_P = f_Pobs*(1-Y_H)/(1-Y_H*f_Pobs)``.
    """

    mu_H: float = 4.0
    K_S: float = 10.0
    K_OH: float = 0.2
    K_NO: float = 0.5
    b_H: float = 0.3
    eta_g: float = 0.8
    eta_h: float = 0.8
    k_h: float = 3.0
    K_X: float = 0.1
    mu_A: float = 0.5
    K_NH: float = 1.0
    K_OA: float = 0.4
    b_A: float = 0.05
    k_a: float = 0.05
    Y_H: float = 0.67
    Y_A: float = 0.24
    f_Pobs: float = 0.21
    i_XB: float = 0.08
    i_XP: float = 0.06
    K_ALK: float = 0.0  # reserved; alkalinity does not limit rates here

    def __post_init__(self):
        positive = ("mu_H", "K_S", "K_OH", "K_NO", "b_H", "k_h", "K_X",
                    "mu_A", "K_NH", "K_OA", "b_A", "k_a")
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("eta_g", "eta_h"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1]")
        for name in ("Y_H", "Y_A", "f_Pobs", "i_XB", "i_XP"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1)")

    @property
    def f_P(self):
        """Inert product fraction under death-regeneration accounting."""
        return self.f_Pobs * (1.0 - self.Y_H) / (1.0 - self.Y_H * self.f_Pobs)

    def composite_params(self, f_SS_COD=0.75):
        """Composition parameters consistent with this set."""
        return CompositeParams(f_SS_COD=f_SS_COD, i_XB=self.i_XB,
                               i_XP=self.i_XP, f_P=self.f_P)

    def replace(self, **changes):
        return replace(self, **changes)


# Indices into the concentration vector, fixed ASM1 order.
_S_S, _X_S, _X_BH, _X_BA = 1, 3, 4, 5
_S_O, _S_NO, _S_NH, _S_ND, _X_ND = 7, 8, 9, 10, 11


def asm1_rates(conc, p):
    """All eight ASM1 process rates, batch-friendly.

    Parameters
    ----------
    conc : ndarray
        (..., 13) concentrations; negative entries are treated as zero
        so transient integrator undershoot cannot flip rate signs.
    p : ASM1ParameterSet

    Returns
    -------
    ndarray
        (..., 8) rates, ordered: aerobic heterotroph growth, anoxic
        heterotroph growth, autotroph growth, heterotroph decay,
        autotroph decay, ammonification, hydrolysis, organic-N
        hydrolysis.
    """
    c = np.maximum(np.asarray(conc, dtype=float), 0.0)
    S_S = c[..., _S_S]
    X_S = c[..., _X_S]
    X_BH = c[..., _X_BH]
    X_BA = c[..., _X_BA]
    S_O = c[..., _S_O]
    S_NO = c[..., _S_NO]
    S_NH = c[..., _S_NH]
    S_ND = c[..., _S_ND]
    X_ND = c[..., _X_ND]

    monod_S = S_S / (p.K_S + S_S)
    aerobic = S_O / (p.K_OH + S_O)
    anoxic = p.K_OH / (p.K_OH + S_O)
    nitrate = S_NO / (p.K_NO + S_NO)

    rho = np.empty(c.shape[:-1] + (8,))
    rho[..., 0] = p.mu_H * monod_S * aerobic * X_BH
    rho[..., 1] = p.mu_H * monod_S * anoxic * nitrate * p.eta_g * X_BH
    rho[..., 2] = p.mu_A * (S_NH / (p.K_NH + S_NH)) * (S_O / (p.K_OA + S_O)) * X_BA
    rho[..., 3] = p.b_H * X_BH
    rho[..., 4] = p.b_A * X_BA
    rho[..., 5] = p.k_a * S_ND * X_BH
    # (X_S/X_BH)/(K_X + X_S/X_BH) written with the common denominator
    # K_X*X_BH + X_S, which removes the X_BH -> 0 singularity.
    den = p.K_X * X_BH + X_S
    safe = np.where(den > 0.0, den, 1.0)
    hyd = p.k_h * (aerobic + p.eta_h * anoxic * nitrate) * X_BH / safe
    rho[..., 6] = np.where(den > 0.0, hyd * X_S, 0.0)
    rho[..., 7] = np.where(den > 0.0, hyd * X_ND, 0.0)
    z = X_S <= 0.0
    if np.any(z):
        # organic-N hydrolysis follows rho7 * X_ND/X_S, zero when X_S is
        rho[..., 7] = np.where(z, 0.0, rho[..., 7])
    return rho


def _rate_picker(j):
    def rate(conc, params):
        return asm1_rates(conc, params)[..., j]
    return rate


def asm1_nitrogen_weights(params, components=None):
    """Tracked-nitrogen weight map for conservation audits.

    Dinitrogen gas is not a state variable, so anoxic growth shows a
    negative tracked-N residual equal to the nitrate reduced.
    """
    if components is None:
        components = asm1_component_set(params.i_XB, params.i_XP)
    return components.weight_map("N")


def asm1_matrix(params=None, components=None):
    """Build the eight-process ASM1 Gujer matrix.

    The oxygen coefficients of both growth processes and the nitrate
    coefficient of anoxic growth are completed from COD conservation;
    anoxic growth books nitrate at -2.86 g COD/g N (reduction to N2)
    and autotroph growth books it at -4.57 (ammonium fully oxidized).

    Parameters
    ----------
    params : ASM1ParameterSet, optional
    components : ComponentSet, optional
        Defaults to the ASM1 set with the parameter set's i_XB, i_XP.

    Returns
    -------
    GujerMatrix
    """
    if params is None:
        params = ASM1ParameterSet()
    if components is None:
        components = asm1_component_set(params.i_XB, params.i_XP)
    Y_H, Y_A = params.Y_H, params.Y_A
    i_XB, i_XP, f_P = params.i_XB, params.i_XP, params.f_P

    cod_denit = {"COD": components.weight_map("COD")}
    cod_nitrif = {"COD": components.weight_map("COD", S_NO=-4.57)}

    decay = {"X_S": 1.0 - f_P, "X_P": f_P, "X_ND": i_XB - f_P * i_XP}
    rows = [
        ("aerobic_growth_H",
         {"S_S": -1.0 / Y_H, "X_BH": 1.0, "S_NH": -i_XB,
          "S_ALK": -i_XB / 14.0, "S_O": UNKNOWN},
         cod_denit),
        ("anoxic_growth_H",
         {"S_S": -1.0 / Y_H, "X_BH": 1.0, "S_NH": -i_XB,
          "S_ALK": (1.0 - Y_H) / (14.0 * 2.86 * Y_H) - i_XB / 14.0,
          "S_NO": UNKNOWN},
         cod_denit),
        ("aerobic_growth_A",
         {"X_BA": 1.0, "S_NO": 1.0 / Y_A, "S_NH": -i_XB - 1.0 / Y_A,
          "S_ALK": -i_XB / 14.0 - 1.0 / (7.0 * Y_A), "S_O": UNKNOWN},
         cod_nitrif),
        ("decay_H", {"X_BH": -1.0, **decay}, None),
        ("decay_A", {"X_BA": -1.0, **decay}, None),
        ("ammonification", {"S_ND": -1.0, "S_NH": 1.0, "S_ALK": 1.0 / 14.0}, None),
        ("hydrolysis", {"X_S": -1.0, "S_S": 1.0}, None),
        ("hydrolysis_N", {"X_ND": -1.0, "S_ND": 1.0}, None),
    ]
    processes = []
    for j, (pid, stoich, weights) in enumerate(rows):
        proc = KineticProcess(pid, stoich, _rate_picker(j),
                              conserved_for=("COD",) if weights else ())
        if weights:
            proc = complete_stoichiometry(proc, weights)
        processes.append(proc)
    return GujerMatrix(components, processes, rate_function=asm1_rates,
                       params=params)
