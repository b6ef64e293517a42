"""Component schema, waste streams, and composite bulk measures.

Concentrations are held per component in the measurement basis of that
component (g COD/m3 for organics, g N/m3 for nitrogen species, g O2/m3
for dissolved oxygen, mol/m3 for alkalinity). Composite measures (COD,
BOD5, TKN, TN, TSS) are linear functionals of the concentration vector
with weights derived from component content and a small set of
composition parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from types import MappingProxyType

import numpy as np

#: Most negative concentration tolerated before construction fails.
#: Small negative round-off from integrators is clamped to zero.
NEG_TOL = -1e-9

VALID_BASES = ("g-COD/m3", "g-N/m3", "g-O2/m3", "mol/m3")

COMPOSITE_NAMES = ("COD", "BOD5", "TKN", "TN", "TSS")


@dataclass(frozen=True)
class Component:
    """One chemical species tracked by a model.

    Parameters
    ----------
    id : str
        Short identifier, unique within a component set.
    basis : str
        Measurement basis, one of ``g-COD/m3``, ``g-N/m3``, ``g-O2/m3``,
        ``mol/m3``.
    particulate : bool
        True for suspended solids, False for solubles.
    i_COD : float
        COD content per unit of the component's own basis. Organics
        measured as COD carry 1 by definition; dissolved oxygen carries
        -1 (oxygen is negative COD).
    i_N : float
        Nitrogen content per unit basis. Nitrogen species measured as
        g-N carry exactly 1.
    i_charge : float
        Charge content in mol(+)/unit basis. Unverified bookkeeping
        defaults are provided for the usual ions; no shipped
        calculation depends on them.
    description : str
        Free-text label.
    """

    id: str
    basis: str
    particulate: bool
    i_COD: float = 0.0
    i_N: float = 0.0
    i_charge: float = 0.0
    description: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("component id must be non-empty")
        if self.basis not in VALID_BASES:
            raise ValueError(
                f"component {self.id!r}: unknown basis {self.basis!r}, "
                f"expected one of {VALID_BASES}"
            )
        for name in ("i_COD", "i_N", "i_charge"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"component {self.id!r}: {name} must be finite")
        if self.basis == "g-COD/m3" and self.i_COD != 1.0:
            raise ValueError(
                f"component {self.id!r}: COD-basis components must have i_COD == 1"
            )
        if self.basis == "g-N/m3" and self.i_N != 1.0:
            raise ValueError(
                f"component {self.id!r}: N-basis components must have i_N == 1"
            )

    @property
    def content(self):
        """Conserved-quantity weights as a read-only mapping."""
        return MappingProxyType(
            {"COD": self.i_COD, "N": self.i_N, "charge": self.i_charge}
        )


class ComponentSet:
    """Ordered, immutable collection of components with unique ids.

    Provides index lookup and aligned weight vectors for conserved
    quantities, which is what the stoichiometry and composite machinery
    consume.
    """

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ValueError("component set must not be empty")
        ids = [c.id for c in comps]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate component ids: {dupes}")
        self._components = comps
        self._ids = tuple(ids)
        self._index = {cid: k for k, cid in enumerate(ids)}
        self.particulate_mask = np.array([c.particulate for c in comps])
        self.soluble_mask = ~self.particulate_mask

    @property
    def ids(self):
        return self._ids

    def index(self, component_id):
        """Position of `component_id` in the set's fixed order."""
        try:
            return self._index[component_id]
        except KeyError:
            raise KeyError(
                f"unknown component {component_id!r}; set has {list(self._ids)}"
            ) from None

    def __len__(self):
        return len(self._components)

    def __iter__(self):
        return iter(self._components)

    def __getitem__(self, component_id):
        return self._components[self.index(component_id)]

    def __contains__(self, component_id):
        return component_id in self._index

    def __eq__(self, other):
        if not isinstance(other, ComponentSet):
            return NotImplemented
        return self._components == other._components

    def __hash__(self):
        return hash(self._components)

    def weights(self, quantity):
        """Aligned weight vector for a conserved quantity.

        Parameters
        ----------
        quantity : str
            ``COD``, ``N``, or ``charge``.
        """
        if quantity not in ("COD", "N", "charge"):
            raise ValueError(f"unknown conserved quantity {quantity!r}")
        return np.array([getattr(c, "i_" + quantity) for c in self._components])

    def weight_map(self, quantity, **overrides):
        """Weight mapping {component id: weight}, with optional overrides."""
        if quantity not in ("COD", "N", "charge"):
            raise ValueError(f"unknown conserved quantity {quantity!r}")
        w = {c.id: getattr(c, "i_" + quantity) for c in self._components}
        for cid, val in overrides.items():
            if cid not in self._index:
                raise KeyError(f"override for unknown component {cid!r}")
            w[cid] = val
        return w


#: Fixed ASM1 component order used throughout.
ASM1_IDS = (
    "S_I", "S_S", "X_I", "X_S", "X_BH", "X_BA", "X_P",
    "S_O", "S_NO", "S_NH", "S_ND", "X_ND", "S_ALK",
)


class _Asm1Index:
    """Integer positions of the ASM1 components, attribute-addressable."""

    def __init__(self):
        for k, cid in enumerate(ASM1_IDS):
            setattr(self, cid, k)
        self.n = len(ASM1_IDS)


IDX = _Asm1Index()


def asm1_component_set(i_XB=0.08, i_XP=0.06):
    """The 13 ASM1 components in fixed order.

    Parameters
    ----------
    i_XB, i_XP : float
        Nitrogen content of biomass and of inert/endogenous particulate
        COD, g N per g COD.

    Notes
    -----
    Nitrate carries -2.86 g COD equivalents per g N (electron content
    of denitrification to N2); the charge weights are bookkeeping
    defaults only.
    """
    mk = Component
    return ComponentSet([
        mk("S_I", "g-COD/m3", False, i_COD=1.0, description="soluble inert organics"),
        mk("S_S", "g-COD/m3", False, i_COD=1.0, description="readily biodegradable substrate"),
        mk("X_I", "g-COD/m3", True, i_COD=1.0, i_N=i_XP, description="particulate inert organics"),
        mk("X_S", "g-COD/m3", True, i_COD=1.0, description="slowly biodegradable substrate"),
        mk("X_BH", "g-COD/m3", True, i_COD=1.0, i_N=i_XB, description="heterotrophic biomass"),
        mk("X_BA", "g-COD/m3", True, i_COD=1.0, i_N=i_XB, description="autotrophic biomass"),
        mk("X_P", "g-COD/m3", True, i_COD=1.0, i_N=i_XP, description="particulate decay products"),
        mk("S_O", "g-O2/m3", False, i_COD=-1.0, description="dissolved oxygen"),
        mk("S_NO", "g-N/m3", False, i_COD=-2.86, i_N=1.0, i_charge=-1.0 / 14.0,
           description="nitrate and nitrite nitrogen"),
        mk("S_NH", "g-N/m3", False, i_N=1.0, i_charge=1.0 / 14.0,
           description="ammonium nitrogen"),
        mk("S_ND", "g-N/m3", False, i_N=1.0, description="soluble biodegradable organic N"),
        mk("X_ND", "g-N/m3", True, i_N=1.0, description="particulate biodegradable organic N"),
        mk("S_ALK", "mol/m3", False, i_charge=-1.0, description="alkalinity"),
    ])


def _is_asm1_like(components):
    return components.ids == ASM1_IDS


@dataclass(frozen=True)
class CompositeParams:
    """Composition parameters feeding the composite bulk measures.

    Parameters
    ----------
    f_SS_COD : float
        Suspended-solids mass per particulate COD, g TSS per g COD.
    i_XB, i_XP : float
        Nitrogen content of biomass and of inert/endogenous particulate
        COD, g N per g COD.
    f_P : float
        Inert fraction of decayed biomass COD; (1 - f_P) of biomass is
        counted as ultimately degradable in BOD5.
    """

    f_SS_COD: float = 0.75
    i_XB: float = 0.08
    i_XP: float = 0.06
    # 0.21 observed inert product fraction mapped onto decay-regeneration
    # accounting: f_Pobs*(1-Y_H)/(1-Y_H*f_Pobs) at Y_H = 0.67.
    f_P: float = 0.21 * (1.0 - 0.67) / (1.0 - 0.67 * 0.21)

    def __post_init__(self):
        for name in ("f_SS_COD", "i_XB", "i_XP", "f_P"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


@dataclass(frozen=True)
class WasteStream:
    """A flowing stream: concentration vector, flow, and conditions.

    Parameters
    ----------
    components : ComponentSet
        Schema the concentration vector is aligned to.
    conc : array_like
        Concentrations in component order, each in its component basis.
        Values in [-1e-9, 0) are clamped to zero; anything lower fails.
    flow : float
        Volumetric flow in m3/d, non-negative.
    temperature : float
        Kelvin.
    pressure : float
        Pa.
    """

    components: ComponentSet
    conc: np.ndarray
    flow: float
    temperature: float = 293.15
    pressure: float = 101325.0

    def __post_init__(self):
        conc = np.array(self.conc, dtype=float)
        if conc.shape != (len(self.components),):
            raise ValueError(
                f"conc has shape {conc.shape}, expected ({len(self.components)},)"
            )
        if not np.all(np.isfinite(conc)):
            raise ValueError("conc must be finite")
        if np.any(conc < NEG_TOL):
            bad = [self.components.ids[k] for k in np.nonzero(conc < NEG_TOL)[0]]
            raise ValueError(f"negative concentrations beyond tolerance: {bad}")
        np.clip(conc, 0.0, None, out=conc)
        conc.flags.writeable = False
        object.__setattr__(self, "conc", conc)
        if not np.isfinite(self.flow) or self.flow < 0.0:
            raise ValueError(f"flow must be non-negative, got {self.flow}")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive (K)")
        if self.pressure <= 0.0:
            raise ValueError("pressure must be positive (Pa)")

    def get(self, component_id):
        """Concentration of one component."""
        return float(self.conc[self.components.index(component_id)])

    def with_flow(self, flow):
        return replace(self, flow=flow)

    def with_conc(self, conc):
        return replace(self, conc=np.asarray(conc, dtype=float))


def composite_weights(components, which, params=None):
    """Weight vector of a composite measure over a component set.

    Every composite is a linear functional of the concentration vector;
    this returns the weights so that ``composite = weights @ conc``.

    Parameters
    ----------
    components : ComponentSet
    which : str
        ``COD``, ``BOD5``, ``TKN``, ``TN``, or ``TSS``.
    params : CompositeParams, optional
    """
    if which not in COMPOSITE_NAMES:
        raise ValueError(f"unknown composite {which!r}, expected one of {COMPOSITE_NAMES}")
    if params is None:
        params = CompositeParams()
    if not _is_asm1_like(components):
        raise ValueError("composite weights are defined for the ASM1 component set")
    w = np.zeros(len(components))

    def put(cid, val):
        w[components.index(cid)] = val

    if which == "COD":
        # All organic COD; dissolved oxygen and nitrate credits excluded
        # from the bulk measure by convention.
        for cid in ("S_I", "S_S", "X_I", "X_S", "X_BH", "X_BA", "X_P"):
            put(cid, 1.0)
    elif which == "BOD5":
        put("S_S", 0.25)
        put("X_S", 0.25)
        put("X_BH", 0.25 * (1.0 - params.f_P))
        put("X_BA", 0.25 * (1.0 - params.f_P))
    elif which == "TSS":
        for cid in ("X_I", "X_S", "X_BH", "X_BA", "X_P"):
            put(cid, params.f_SS_COD)
    elif which in ("TKN", "TN"):
        for cid in ("S_NH", "S_ND", "X_ND"):
            put(cid, 1.0)
        put("X_BH", params.i_XB)
        put("X_BA", params.i_XB)
        put("X_P", params.i_XP)
        put("X_I", params.i_XP)
        if which == "TN":
            put("S_NO", 1.0)
    return w


def composite(stream, which, params=None):
    """Composite bulk measure of a stream.

    Parameters
    ----------
    stream : WasteStream
    which : str
        ``COD``, ``BOD5``, ``TKN``, ``TN``, or ``TSS``.
    params : CompositeParams, optional

    Returns
    -------
    float
        g/m3 (COD basis for COD and BOD5, N basis for TKN and TN, dry
        mass for TSS).
    """
    w = composite_weights(stream.components, which, params)
    return float(w @ stream.conc)


def mix(streams):
    """Flow-weighted blend of streams sharing one component set.

    Component mass and flow are conserved exactly; temperature mixes
    flow-weighted. If every inflow has zero flow the result carries the
    plain average composition at zero flow.
    """
    streams = list(streams)
    if not streams:
        raise ValueError("mix needs at least one stream")
    first = streams[0]
    for s in streams[1:]:
        if s.components.ids != first.components.ids:
            raise ValueError("cannot mix streams with different component sets")
    flows = np.array([s.flow for s in streams])
    total = flows.sum()
    concs = np.stack([s.conc for s in streams])
    temps = np.array([s.temperature for s in streams])
    if total > 0.0:
        conc = flows @ concs / total
        temp = float(flows @ temps / total)
    else:
        conc = concs.mean(axis=0)
        temp = float(temps.mean())
    return WasteStream(first.components, conc, float(total),
                       temperature=temp, pressure=first.pressure)


def mass_flow(stream, which, params=None):
    """Mass flow of a component or composite, in kg/d.

    Parameters
    ----------
    stream : WasteStream
    which : str
        A component id or a composite name.
    params : CompositeParams, optional
        Used only when `which` is a composite.
    """
    if which in stream.components:
        conc = stream.get(which)
    elif which in COMPOSITE_NAMES:
        conc = composite(stream, which, params)
    else:
        raise ValueError(f"{which!r} is neither a component id nor a composite name")
    return conc * stream.flow / 1000.0
