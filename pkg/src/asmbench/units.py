"""Unit operations: CSTRs, a layered gravity settler, static junctions.

Dynamic units (CSTR, Clarifier) expose a derivative of their own state
given the instantaneous inflow; static units (mixers, splitters, fixed
conversion reactors) map inlet streams to outlet streams algebraically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import WasteStream, mix
from .kinetics import production_rates


@dataclass(frozen=True)
class SettlingParams:
    """Double-exponential settling velocity parameters.

    v0 is the theoretical maximum velocity (m/d), v0_prime the practical
    cap, r_h and r_p the hindered and flocculant zone coefficients
    (m3/g), f_ns the non-settleable fraction of feed solids, and X_t the
    threshold concentration (g/m3) above which a layer's descending flux
    is limited by the layer below even in the clarification zone.
    """

    v0: float = 474.0
    v0_prime: float = 250.0
    r_h: float = 5.76e-4
    r_p: float = 2.86e-3
    f_ns: float = 2.28e-3
    X_t: float = 3000.0

    def __post_init__(self):
        if not (0.0 <= self.v0_prime <= self.v0):
            raise ValueError("need 0 <= v0_prime <= v0")
        if not (0.0 <= self.r_h <= self.r_p):
            raise ValueError("need 0 <= r_h <= r_p")
        if not (0.0 <= self.f_ns < 1.0):
            raise ValueError("f_ns must lie in [0, 1)")
        if self.X_t < 0.0:
            raise ValueError("X_t must be non-negative")


def settling_velocity(X, X_feed, params):
    """Hindered settling velocity of a layer, m/d.

    Only the settleable excess over the non-settleable floor
    ``f_ns * X_feed`` settles; the double-exponential law is clamped to
    [0, v0_prime].

    Parameters
    ----------
    X : float or ndarray
        Layer solids concentration, g/m3.
    X_feed : float
        Feed solids concentration defining the non-settleable floor.
    params : SettlingParams
    """
    X_star = np.maximum(np.asarray(X, dtype=float) - params.f_ns * X_feed, 0.0)
    v = params.v0 * (np.exp(-params.r_h * X_star) - np.exp(-params.r_p * X_star))
    return np.clip(v, 0.0, params.v0_prime)


@dataclass(frozen=True)
class CSTR:
    """Ideally mixed tank of fixed volume, optionally reactive/aerated.

    Parameters
    ----------
    id : str
    volume : float
        m3.
    components : ComponentSet
    matrix : GujerMatrix, optional
        Biokinetics; omit for a plain mixed tank.
    aeration : AerationProcess, optional
        Oxygen transfer applied to the dissolved-oxygen component; the
        component set must then contain ``S_O``.
    """

    id: str
    volume: float
    components: object
    matrix: object = None
    aeration: object = None

    def __post_init__(self):
        if self.volume <= 0.0:
            raise ValueError(f"CSTR {self.id!r}: volume must be positive")
        if self.aeration is not None and "S_O" not in self.components:
            raise ValueError(f"CSTR {self.id!r}: aeration requires an S_O component")

    @property
    def n_states(self):
        return len(self.components)

    def state_labels(self):
        return [f"{self.id}.{cid}" for cid in self.components.ids]


def cstr_derivative(unit, inflow, state, params=None):
    """Concentration derivative of a CSTR, 1/d.

    dC/dt = Q/V (C_in - C) + production(C) + aeration, with the liquid
    volume constant (outflow equals inflow).

    Parameters
    ----------
    unit : CSTR
    inflow : WasteStream
        Combined inlet; mix upstream streams first.
    state : array_like
        Tank concentrations in component order.
    params : parameter set, optional
        Kinetic parameters; defaults to the matrix's own.
    """
    c = np.asarray(state, dtype=float)
    if c.shape != (len(unit.components),):
        raise ValueError(f"CSTR {unit.id!r}: state has wrong shape {c.shape}")
    if inflow.components.ids != unit.components.ids:
        raise ValueError(f"CSTR {unit.id!r}: inflow component set mismatch")
    dc = (inflow.flow / unit.volume) * (inflow.conc - c)
    if unit.matrix is not None:
        dc = dc + production_rates(unit.matrix, c, params)
    if unit.aeration is not None:
        k = unit.components.index("S_O")
        dc[k] += unit.aeration.rate(c[k])
    return dc


@dataclass(frozen=True)
class Clarifier:
    """One-dimensional layered gravity settler.

    Solids follow the layered flux model on ``n_layers`` horizontal
    slices; solubles pass through one ideally mixed volume (the whole
    tank). Dynamic state is the per-layer solids concentration stacked
    on top of the soluble concentrations.

    Parameters
    ----------
    id : str
    components : ComponentSet
    area : float
        Surface area, m2.
    height : float
        Depth, m.
    n_layers : int
    feed_layer : int
        1-indexed from the top.
    settling : SettlingParams
    tss_per_cod : float
        Dry mass per particulate COD used to express feed solids as
        TSS, g/g.
    """

    id: str
    components: object
    area: float = 1500.0
    height: float = 4.0
    n_layers: int = 10
    feed_layer: int = 5
    settling: SettlingParams = field(default_factory=SettlingParams)
    tss_per_cod: float = 0.75

    def __post_init__(self):
        if self.area <= 0.0 or self.height <= 0.0:
            raise ValueError(f"clarifier {self.id!r}: area and height must be positive")
        if self.n_layers < 2:
            raise ValueError(f"clarifier {self.id!r}: need at least 2 layers")
        if not (1 <= self.feed_layer <= self.n_layers):
            raise ValueError(
                f"clarifier {self.id!r}: feed layer {self.feed_layer} outside "
                f"1..{self.n_layers}"
            )
        if not (0.0 < self.tss_per_cod <= 1.0):
            raise ValueError(f"clarifier {self.id!r}: tss_per_cod must lie in (0, 1]")
        part = np.nonzero(self.components.particulate_mask)[0]
        sol = np.nonzero(self.components.soluble_mask)[0]
        tss_w = np.zeros(len(self.components))
        for k in part:
            c = self.components.ids[k]
            if self.components[c].basis == "g-COD/m3":
                tss_w[k] = self.tss_per_cod
        for arr in (part, sol, tss_w):
            arr.flags.writeable = False
        object.__setattr__(self, "particulate_idx", part)
        object.__setattr__(self, "soluble_idx", sol)
        object.__setattr__(self, "tss_weights", tss_w)

    @property
    def volume(self):
        return self.area * self.height

    @property
    def layer_height(self):
        return self.height / self.n_layers

    @property
    def n_states(self):
        return self.n_layers + len(self.soluble_idx)

    def state_labels(self):
        lab = [f"{self.id}.TSS_{i + 1}" for i in range(self.n_layers)]
        lab += [f"{self.id}.{self.components.ids[k]}" for k in self.soluble_idx]
        return lab

    def feed_tss(self, feed_conc):
        """Feed solids as TSS, g/m3."""
        return float(self.tss_weights @ np.asarray(feed_conc, dtype=float))

    def feed_composition(self, feed_conc):
        """Particulate make-up per unit feed TSS (full-width vector)."""
        feed_conc = np.asarray(feed_conc, dtype=float)
        tss = self.feed_tss(feed_conc)
        comp = np.zeros(len(self.components))
        if tss > 0.0:
            comp[self.particulate_idx] = feed_conc[self.particulate_idx] / tss
        return comp

    def outlet_conc(self, feed_conc, state):
        """Effluent and underflow concentration vectors.

        Particulates leave in feed proportions scaled to the top and
        bottom layer TSS; solubles leave at the mixed concentration.
        """
        state = np.asarray(state, dtype=float)
        comp = self.feed_composition(feed_conc)
        z = state[self.n_layers:]
        base = np.zeros(len(self.components))
        base[self.soluble_idx] = z
        c_eff = base + comp * state[0]
        c_under = base + comp * state[self.n_layers - 1]
        return c_eff, c_under

    def initial_state(self, feed_conc, solids=None):
        """Default initial state from a feed composition.

        Layer TSS defaults to the feed TSS spread over a geometric
        profile thickening toward the bottom; solubles start at feed
        concentrations.
        """
        feed_conc = np.asarray(feed_conc, dtype=float)
        n = self.n_layers
        if solids is None:
            solids = self.feed_tss(feed_conc) * 20.0 ** np.linspace(-1.0, 1.0, n)
        solids = np.asarray(solids, dtype=float)
        if solids.shape != (n,):
            raise ValueError(f"expected {n} layer concentrations")
        return np.concatenate([solids, feed_conc[self.soluble_idx]])


def _clarifier_tss_rhs(unit, X, feed_tss, q_feed, q_eff, q_under):
    """Layer solids balance, g/m3/d for each of the n layers."""
    p = unit.settling
    n = unit.n_layers
    jf = unit.feed_layer - 1
    A = unit.area
    h = unit.layer_height

    # gravitational flux through each layer, limited pairwise so a
    # compacted layer throttles what the layer above can hand down
    v = settling_velocity(X, feed_tss, p)
    VX = v * X
    J = np.minimum(VX[:-1], VX[1:])
    if jf > 0:
        free = X[1:jf + 1] <= p.X_t
        J[:jf] = np.where(free, VX[:jf], J[:jf])
    settle_in = np.zeros(n)
    settle_out = np.zeros(n)
    settle_out[:-1] = J
    settle_in[1:] = J

    # bulk flow: upward at Q_eff above the feed, downward at Q_under
    # below it; the feed layer sees the raw feed flux
    q_out = np.empty(n)
    q_out[:jf] = q_eff
    q_out[jf] = q_feed
    q_out[jf + 1:] = q_under
    flow_out = X * q_out
    flow_in = np.empty(n)
    flow_in[:jf] = X[1:jf + 1] * q_eff
    flow_in[jf] = feed_tss * q_feed
    flow_in[jf + 1:] = X[jf:-1] * q_under
    return ((flow_in - flow_out) / A + settle_in - settle_out) / h


def clarifier_derivative(unit, feed, state, q_eff, q_under):
    """State derivative of the layered settler.

    Parameters
    ----------
    unit : Clarifier
    feed : WasteStream
    state : array_like
        Layer TSS (top to bottom) followed by soluble concentrations.
    q_eff, q_under : float
        Effluent and underflow draws, m3/d; must sum to the feed flow
        for the constant-volume balance to hold.

    Returns
    -------
    ndarray
        d(state)/dt, same layout as `state`.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (unit.n_states,):
        raise ValueError(f"clarifier {unit.id!r}: state has wrong shape {state.shape}")
    if feed.components.ids != unit.components.ids:
        raise ValueError(f"clarifier {unit.id!r}: feed component set mismatch")
    if q_eff < 0.0 or q_under < 0.0:
        raise ValueError(f"clarifier {unit.id!r}: negative outlet flow")
    if abs((q_eff + q_under) - feed.flow) > 1e-6 * max(1.0, feed.flow):
        raise ValueError(
            f"clarifier {unit.id!r}: outlet flows {q_eff + q_under:g} do not "
            f"match feed {feed.flow:g}"
        )
    n = unit.n_layers
    X = np.maximum(state[:n], 0.0)
    Z = state[n:]
    if q_under == 0.0 and X.sum() > 0.0:
        raise ValueError(
            f"clarifier {unit.id!r}: zero underflow with a nonzero solids "
            f"inventory cannot reach steady state"
        )
    feed_tss = unit.feed_tss(feed.conc)
    dX = _clarifier_tss_rhs(unit, X, feed_tss, feed.flow, q_eff, q_under)
    dZ = (feed.flow / unit.volume) * (feed.conc[unit.soluble_idx] - Z)
    return np.concatenate([dX, dZ])


def clarifier_outlets(unit, feed, state, q_eff, q_under):
    """Effluent and underflow streams at the current state."""
    c_eff, c_under = unit.outlet_conc(feed.conc, np.asarray(state, dtype=float))
    eff = WasteStream(unit.components, c_eff, q_eff, temperature=feed.temperature)
    under = WasteStream(unit.components, c_under, q_under, temperature=feed.temperature)
    return eff, under


@dataclass(frozen=True)
class Mixer:
    """Flow-weighted junction of any number of inlets."""

    id: str


@dataclass(frozen=True)
class Splitter:
    """Splits one inlet into fixed flow fractions at equal composition."""

    id: str
    fractions: tuple

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        if not fr:
            raise ValueError(f"splitter {self.id!r}: need at least 1 fraction")
        if any(f < 0.0 for f in fr):
            raise ValueError(f"splitter {self.id!r}: fractions must be non-negative")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"splitter {self.id!r}: fractions must sum to 1")
        object.__setattr__(self, "fractions", fr)


@dataclass(frozen=True)
class Reaction:
    """Fixed-conversion reaction on one reactant.

    `conversion` of the inlet reactant concentration is consumed; each
    product gains ``yield * consumed`` in its own basis.
    """

    reactant: str
    conversion: float
    products: dict

    def __post_init__(self):
        if not (0.0 <= self.conversion <= 1.0):
            raise ValueError(f"conversion must lie in [0, 1], got {self.conversion}")
        object.__setattr__(self, "products", dict(self.products))


@dataclass(frozen=True)
class ConversionReactor:
    """Applies fixed-conversion reactions in order, no holdup."""

    id: str
    reactions: tuple

    def __post_init__(self):
        object.__setattr__(self, "reactions", tuple(self.reactions))


STATIC_KINDS = (Mixer, Splitter, ConversionReactor)


def is_static(unit):
    return isinstance(unit, STATIC_KINDS)


def static_convert(unit, inlets):
    """Outlet streams of a static unit for the given inlet streams.

    Parameters
    ----------
    unit : Mixer, Splitter, or ConversionReactor
    inlets : sequence of WasteStream

    Returns
    -------
    tuple of WasteStream
    """
    if isinstance(unit, Mixer):
        return (mix(inlets),)
    if isinstance(unit, Splitter):
        if len(inlets) != 1:
            raise ValueError(f"splitter {unit.id!r}: expected 1 inlet")
        s = inlets[0]
        return tuple(s.with_flow(s.flow * f) for f in unit.fractions)
    if isinstance(unit, ConversionReactor):
        if len(inlets) != 1:
            raise ValueError(f"reactor {unit.id!r}: expected 1 inlet")
        s = inlets[0]
        conc = np.array(s.conc)
        comps = s.components
        for rxn in unit.reactions:
            if rxn.reactant not in comps:
                continue
            k = comps.index(rxn.reactant)
            consumed = conc[k] * rxn.conversion
            conc[k] -= consumed
            for cid, y in rxn.products.items():
                conc[comps.index(cid)] += y * consumed
        return (s.with_conc(conc),)
    raise TypeError(f"not a static unit: {type(unit).__name__}")
