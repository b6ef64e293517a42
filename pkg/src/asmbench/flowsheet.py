"""System graphs, compiled ODEs, steady states, and the BSM1 plant.

A SystemGraph wires units together with named streams. Dynamic graphs
compile to one global ODE whose state concatenates every dynamic unit's
state; recycle stream concentrations are resolved algebraically from
the current state on every derivative evaluation. Purely static graphs
converge by sequential-modular iteration instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import odeint, solve_ivp

from .core import (ASM1_IDS, WasteStream, asm1_component_set,
                   composite_weights)
from .kinetics import AerationProcess, ASM1ParameterSet, asm1_matrix
from .units import (CSTR, Clarifier, ConversionReactor, Mixer, Splitter,
                    _clarifier_tss_rhs, is_static, static_convert)


class FlowsheetError(ValueError):
    """Graph construction or configuration problem."""


class SolverError(RuntimeError):
    """Integrator failure; carries the failing time and state snapshot."""

    def __init__(self, message, time=None, state=None):
        super().__init__(message)
        self.time = time
        self.state = None if state is None else np.array(state)


class ConvergenceError(RuntimeError):
    """Steady state or equilibrium iteration did not converge."""

    def __init__(self, message, steady=None):
        super().__init__(message)
        self.steady = steady


@dataclass
class Stream:
    """A directed edge; source and target are (unit id, port) or None."""

    id: str
    source: tuple = None
    target: tuple = None


METRIC_NAMES = ("COD", "BOD5", "TSS", "TN", "TKN", "sludge_production", "SRT")


class SystemGraph:
    """Units connected by named streams, plus boundary conditions.

    Streams are created implicitly the first time a unit references
    them; a stream with no producing unit is a boundary inlet and needs
    an influent value, one with no consumer is a boundary outlet.
    """

    def __init__(self, components):
        self.components = components
        self.units = {}
        self.unit_inlets = {}
        self.unit_outlets = {}
        self.streams = {}
        self.influents = {}
        self.fixed_flows = {}
        self.roles = {}

    def _stream(self, sid):
        if sid not in self.streams:
            self.streams[sid] = Stream(sid)
        return self.streams[sid]

    def add_unit(self, unit, inlets, outlets):
        """Register a unit and connect it to named streams."""
        if unit.id in self.units:
            raise FlowsheetError(f"duplicate unit id {unit.id!r}")
        inlets = tuple(inlets)
        outlets = tuple(outlets)
        for port, sid in enumerate(inlets):
            s = self._stream(sid)
            if s.target is not None:
                raise FlowsheetError(
                    f"stream {sid!r} already consumed by {s.target[0]!r}")
            s.target = (unit.id, port)
        for port, sid in enumerate(outlets):
            s = self._stream(sid)
            if s.source is not None:
                raise FlowsheetError(
                    f"stream {sid!r} already produced by {s.source[0]!r}")
            s.source = (unit.id, port)
        self.units[unit.id] = unit
        self.unit_inlets[unit.id] = inlets
        self.unit_outlets[unit.id] = outlets
        return unit

    def set_influent(self, sid, stream):
        """Pin a boundary inlet stream to a fixed WasteStream value."""
        s = self._stream(sid)
        if s.source is not None:
            raise FlowsheetError(f"stream {sid!r} is produced internally")
        if stream.components.ids != self.components.ids:
            raise FlowsheetError(f"influent {sid!r}: component set mismatch")
        self.influents[sid] = stream

    def set_flow(self, sid, flow):
        """Pin a pumped draw (e.g. a settler underflow) to a fixed flow."""
        if flow < 0.0:
            raise FlowsheetError(f"stream {sid!r}: negative pinned flow")
        self._stream(sid)
        self.fixed_flows[sid] = float(flow)

    @property
    def mode(self):
        kinds = [is_static(u) for u in self.units.values()]
        if all(kinds):
            return "equilibrium"
        if not any(kinds):
            return "dynamic"
        return "mixed"

    def dynamic_units(self):
        return {uid: u for uid, u in self.units.items() if not is_static(u)}

    def validate(self):
        """Check stream wiring, port counts, and boundary conditions."""
        if not self.units:
            raise FlowsheetError("graph has no units")
        for sid, s in self.streams.items():
            if s.source is None and s.target is None:
                raise FlowsheetError(f"stream {sid!r} is dangling")
            if s.source is None and sid not in self.influents:
                raise FlowsheetError(f"boundary inlet {sid!r} has no influent value")
        for uid, u in self.units.items():
            n_in = len(self.unit_inlets[uid])
            n_out = len(self.unit_outlets[uid])
            if isinstance(u, CSTR):
                ok = n_in >= 1 and n_out == 1
            elif isinstance(u, Clarifier):
                ok = n_in == 1 and n_out == 2
            elif isinstance(u, Splitter):
                ok = n_in == 1 and n_out == len(u.fractions)
            elif isinstance(u, Mixer):
                ok = n_in >= 1 and n_out == 1
            elif isinstance(u, ConversionReactor):
                ok = n_in == 1 and n_out == 1
            else:
                raise FlowsheetError(f"unknown unit type {type(u).__name__}")
            if not ok:
                raise FlowsheetError(
                    f"unit {uid!r}: {n_in} inlets / {n_out} outlets is invalid "
                    f"for a {type(u).__name__}")
        for sid in self.fixed_flows:
            s = self.streams[sid]
            if s.source is None or not isinstance(self.units[s.source[0]], Clarifier):
                raise FlowsheetError(
                    f"stream {sid!r}: only settler draws accept a pinned flow")


def resolve_flows(graph):
    """Volumetric flow of every stream, m3/d.

    Constant-volume units pass flow through, so flows are independent
    of concentrations and solved once by sweeping units to a fixed
    point (recycle loops converge geometrically).
    """
    flows = {sid: 0.0 for sid in graph.streams}
    for sid, ws in graph.influents.items():
        flows[sid] = ws.flow
    scale = max([1.0] + [ws.flow for ws in graph.influents.values()])
    for _ in range(100000):
        delta = 0.0
        for uid, unit in graph.units.items():
            q_in = sum(flows[s] for s in graph.unit_inlets[uid])
            outs = graph.unit_outlets[uid]
            if isinstance(unit, Splitter):
                new = tuple(q_in * f for f in unit.fractions)
            elif isinstance(unit, Clarifier):
                eff_sid, under_sid = outs
                if under_sid in graph.fixed_flows:
                    q_u = graph.fixed_flows[under_sid]
                    new = (max(q_in - q_u, 0.0), q_u)
                elif eff_sid in graph.fixed_flows:
                    q_e = graph.fixed_flows[eff_sid]
                    new = (q_e, max(q_in - q_e, 0.0))
                else:
                    raise FlowsheetError(
                        f"clarifier {uid!r}: pin one outlet flow with set_flow")
            else:
                new = (q_in,)
            for sid, q in zip(outs, new):
                delta = max(delta, abs(q - flows[sid]))
                flows[sid] = q
        if delta <= 1e-13 * scale:
            break
    else:
        raise FlowsheetError("flow resolution did not converge; check recycles")
    for uid, unit in graph.units.items():
        q_in = sum(flows[s] for s in graph.unit_inlets[uid])
        q_out = sum(flows[s] for s in graph.unit_outlets[uid])
        if abs(q_in - q_out) > 1e-9 * max(1.0, q_in):
            raise FlowsheetError(
                f"inconsistent flows at {uid!r}: in {q_in:g}, out {q_out:g} "
                f"(a pinned draw may exceed its feed)")
    return flows


def _order_streams(graph):
    """Evaluation order for stream concentrations (topological).

    CSTR outlets depend only on state; clarifier outlets depend on the
    clarifier feed; static unit outlets depend on all unit inlets. A
    cycle here is an algebraic loop that no unit state breaks.
    """
    deps = {sid: () for sid in graph.streams}
    for uid, unit in graph.units.items():
        ins = graph.unit_inlets[uid]
        outs = graph.unit_outlets[uid]
        if isinstance(unit, CSTR):
            continue
        for o in outs:
            deps[o] = tuple(ins) if is_static(unit) else (ins[0],)
    order = []
    done = set()
    ready = [sid for sid in graph.streams if not deps[sid]]
    while ready:
        sid = ready.pop(0)
        order.append(sid)
        done.add(sid)
        for t, dd in deps.items():
            if t not in done and t not in ready and all(d in done for d in dd):
                ready.append(t)
    if len(order) != len(graph.streams):
        stuck = sorted(set(graph.streams) - set(order))
        raise FlowsheetError(f"algebraic loop through static units: {stuck}")
    return order


@dataclass
class OdeProblem:
    """A compiled dynamic system: one global ODE plus bookkeeping.

    ``rhs(t, y)`` is the global derivative and ``jac(t, y)`` its
    Jacobian, assembled from the constant flow topology, finite
    differences of the kinetic and settling blocks, and chain-rule
    couplings through recycle streams.
    """

    graph: SystemGraph
    size: int
    slices: dict
    labels: list
    flows: dict
    params: object = None
    rhs: object = field(default=None, repr=False)
    jac: object = field(default=None, repr=False)
    _full_plan: object = field(default=None, repr=False)
    _svals: object = field(default=None, repr=False)
    _sidx: dict = field(default=None, repr=False)

    def pack(self, init):
        """Build a global state vector from {unit id: state array}."""
        if isinstance(init, np.ndarray) or np.ndim(init) == 1:
            y = np.asarray(init, dtype=float)
            if y.shape != (self.size,):
                raise FlowsheetError(
                    f"initial state has length {y.shape}, expected {self.size}")
            return np.array(y)
        y = np.empty(self.size)
        seen = set()
        for uid, vec in init.items():
            if uid not in self.slices:
                raise FlowsheetError(f"unknown dynamic unit {uid!r}")
            vec = np.asarray(vec, dtype=float)
            sl = self.slices[uid]
            if vec.shape != (sl.stop - sl.start,):
                raise FlowsheetError(f"unit {uid!r}: wrong initial state size")
            y[sl] = vec
            seen.add(uid)
        missing = set(self.slices) - seen
        if missing:
            raise FlowsheetError(f"initial state missing for {sorted(missing)}")
        return y

    def unit_state(self, y, uid):
        return np.asarray(y)[self.slices[uid]]

    def eval_streams(self, y):
        """All stream values at a state, as WasteStream objects."""
        y = np.asarray(y, dtype=float)
        sv = self._svals
        for step in self._full_plan:
            step(y, sv)
        temp = 293.15
        for ws in self.graph.influents.values():
            temp = ws.temperature
            break
        out = {}
        for sid, k in self._sidx.items():
            out[sid] = WasteStream(self.graph.components, np.array(sv[k]),
                                   self.flows[sid], temperature=temp)
        return out

    def scaled_derivative(self, y, t=0.0):
        """max_i |dy_i/dt| / max(|y_i|, 1), the steady-state measure."""
        dy = self.rhs(t, np.asarray(y, dtype=float))
        return float(np.max(np.abs(dy) / np.maximum(np.abs(y), 1.0)))


def _mix_plan(graph, flows, inlet_sids, sidx):
    """(stream id, stream index, weight) terms of a combined inflow."""
    q_tot = sum(flows[s] for s in inlet_sids)
    if q_tot > 0.0:
        plan = [(s, sidx[s], flows[s] / q_tot) for s in inlet_sids
                if flows[s] > 0.0]
    else:
        plan = [(s, sidx[s], 1.0 / len(inlet_sids)) for s in inlet_sids]
    return plan, q_tot


def _conversion_matrix(unit, comps):
    """Linear map applied by a conversion reactor, outlet = M @ inlet."""
    n = len(comps)
    M = np.eye(n)
    for r in unit.reactions:
        T = np.eye(n)
        j = comps.index(r.reactant)
        T[j, j] -= r.conversion
        for cid, yld in r.products.items():
            T[comps.index(cid), j] += yld * r.conversion
        M = T @ M
    return M


def assemble_ode(graph, params=None):
    """Compile a dynamic graph into one global ODE.

    The global state concatenates each dynamic unit's state in
    registration order. The returned problem's ``rhs(t, y)`` is pure:
    recycle concentrations are recomputed from `y` on every call. A
    matching ``jac(t, y)`` is compiled alongside; the stiff solvers
    use it instead of finite-differencing the full system.

    Parameters
    ----------
    graph : SystemGraph
    params : parameter set, optional
        Kinetic parameters for every reactive unit; defaults to each
        matrix's own.
    """
    graph.validate()
    if graph.mode == "equilibrium":
        raise FlowsheetError("all units are static; use converge_equilibrium")
    flows = resolve_flows(graph)
    comps = graph.components
    n_comp = len(comps)

    slices = {}
    labels = []
    pos = 0
    for uid, u in graph.units.items():
        if is_static(u):
            continue
        m = u.n_states
        slices[uid] = slice(pos, pos + m)
        labels.extend(u.state_labels())
        pos += m
    size = pos

    sidx = {sid: k for k, sid in enumerate(graph.streams)}
    svals = [None] * len(sidx)
    for sid, ws in graph.influents.items():
        svals[sidx[sid]] = np.array(ws.conc)

    order = _order_streams(graph)

    def make_steps(sids_needed):
        """Stream-evaluation closures covering `sids_needed`."""
        steps = []
        produced = {sidx[s] for s in graph.influents}
        for sid in order:
            if sid not in sids_needed:
                continue
            s = graph.streams[sid]
            if s.source is None:
                continue
            uid, port = s.source
            unit = graph.units[uid]
            k = sidx[sid]
            if k in produced:
                continue
            if isinstance(unit, CSTR):
                sl = slices[uid]

                def step(y, sv, k=k, sl=sl):
                    sv[k] = y[sl]
            elif isinstance(unit, Clarifier):
                sl = slices[uid]
                fk = sidx[graph.unit_inlets[uid][0]]
                n = unit.n_layers
                layer = 0 if port == 0 else n - 1
                sol = unit.soluble_idx
                part = unit.particulate_idx
                wtss = unit.tss_weights
                buf = np.zeros(n_comp)

                def step(y, sv, k=k, sl=sl, fk=fk, n=n, layer=layer,
                         sol=sol, part=part, wtss=wtss, buf=buf):
                    st = y[sl]
                    feed = sv[fk]
                    tss_f = wtss @ feed
                    buf[sol] = st[n:]
                    if tss_f > 0.0:
                        buf[part] = feed[part] * (max(st[layer], 0.0) / tss_f)
                    else:
                        buf[part] = 0.0
                    sv[k] = buf
            elif isinstance(unit, Splitter):
                ik = sidx[graph.unit_inlets[uid][0]]

                def step(y, sv, k=k, ik=ik):
                    sv[k] = sv[ik]
            elif isinstance(unit, Mixer):
                plan, _ = _mix_plan(graph, flows, graph.unit_inlets[uid], sidx)

                def step(y, sv, k=k, plan=plan):
                    acc = plan[0][2] * sv[plan[0][1]]
                    for _, kk, w in plan[1:]:
                        acc += w * sv[kk]
                    sv[k] = acc
            else:
                ik = sidx[graph.unit_inlets[uid][0]]
                M = _conversion_matrix(unit, comps)

                def step(y, sv, k=k, ik=ik, M=M):
                    sv[k] = M @ sv[ik]
            steps.append(step)
            produced.add(k)
        return steps

    # hot path computes only streams feeding dynamic units
    hot = set()
    frontier = []
    for uid in slices:
        frontier.extend(graph.unit_inlets[uid])
    while frontier:
        sid = frontier.pop()
        if sid in hot:
            continue
        hot.add(sid)
        s = graph.streams[sid]
        if s.source is not None:
            src_uid, _ = s.source
            u = graph.units[src_uid]
            if isinstance(u, Clarifier):
                frontier.append(graph.unit_inlets[src_uid][0])
            elif is_static(u):
                frontier.extend(graph.unit_inlets[src_uid])
    hot_steps = make_steps(hot)
    full_plan = make_steps(set(graph.streams))

    iSO = comps.index("S_O") if "S_O" in comps else -1

    # dynamic-unit metadata: CSTRs grouped per shared matrix for
    # vectorized kinetics, settlers individually
    batches = {}
    clar_infos = []
    for uid, u in graph.units.items():
        if isinstance(u, CSTR):
            p_eff = params if (params is not None and u.matrix is not None) \
                else (u.matrix.params if u.matrix is not None else None)
            key = (id(u.matrix), id(p_eff)) if u.matrix is not None else (uid,)
            batches.setdefault(key, (u.matrix, p_eff, []))[2].append(uid)
        elif isinstance(u, Clarifier):
            feed_sid = graph.unit_inlets[uid][0]
            eff_sid, under_sid = graph.unit_outlets[uid]
            q_u = flows[under_sid]
            if q_u <= 0.0:
                raise FlowsheetError(
                    f"clarifier {uid!r}: zero underflow cannot carry a "
                    f"solids inventory; pin a positive draw")
            clar_infos.append({
                "uid": uid, "unit": u, "sl": slices[uid],
                "feed_sid": feed_sid, "fk": sidx[feed_sid],
                "n": u.n_layers, "sol": u.soluble_idx,
                "part": u.particulate_idx, "wtss": u.tss_weights,
                "q_f": flows[feed_sid], "q_e": flows[eff_sid], "q_u": q_u,
                "V": u.volume,
            })

    kin_batches = []
    for matrix, p_eff, uids in batches.values():
        k_units = len(uids)
        starts = [slices[uid].start for uid in uids]
        contiguous = all(starts[i] + n_comp == starts[i + 1]
                         for i in range(k_units - 1))
        rows = np.array([np.arange(slices[uid].start, slices[uid].stop)
                         for uid in uids])
        QV = np.empty(k_units)
        kla = np.zeros(k_units)
        dosat = np.ones(k_units)
        plans = []
        for r, uid in enumerate(uids):
            u = graph.units[uid]
            plan, q_tot = _mix_plan(graph, flows, graph.unit_inlets[uid], sidx)
            plans.append(plan)
            QV[r] = q_tot / u.volume
            if u.aeration is not None:
                kla[r] = u.aeration.K_La
                dosat[r] = u.aeration.DO_sat
        kin_batches.append({
            "uids": uids, "rows": rows, "contiguous": contiguous,
            "a0": starts[0], "b0": starts[0] + k_units * n_comp,
            "k": k_units, "QV": QV, "kla": kla, "dosat": dosat,
            "plans": plans, "matrix": matrix, "p": p_eff,
        })

    dyn_steps = []
    for b in kin_batches:
        nu = b["matrix"].nu if b["matrix"] is not None else None
        ratefn = b["matrix"].rates if b["matrix"] is not None else None
        cin = np.empty((b["k"], n_comp))

        def step(y, sv, dy, b=b, nu=nu, ratefn=ratefn, cin=cin):
            if b["contiguous"]:
                S = y[b["a0"]:b["b0"]].reshape(b["k"], n_comp)
            else:
                S = y[b["rows"]]
            for r, plan in enumerate(b["plans"]):
                if len(plan) == 1:
                    cin[r] = sv[plan[0][1]]
                else:
                    np.multiply(sv[plan[0][1]], plan[0][2], out=cin[r])
                    row = cin[r]
                    for _, kk, w in plan[1:]:
                        row += w * sv[kk]
            d = b["QV"][:, None] * (cin - S)
            if ratefn is not None:
                d += ratefn(S, b["p"]) @ nu
            if iSO >= 0:
                d[:, iSO] += b["kla"] * (b["dosat"] - S[:, iSO])
            if b["contiguous"]:
                dy[b["a0"]:b["b0"]] = d.ravel()
            else:
                dy[b["rows"]] = d
        dyn_steps.append(step)

    for c in clar_infos:
        unit, sl, fk = c["unit"], c["sl"], c["fk"]
        n, sol, wtss = c["n"], c["sol"], c["wtss"]
        q_f, q_e, q_u, V = c["q_f"], c["q_e"], c["q_u"], c["V"]

        def kernel(X, tss_f, unit=unit, q_f=q_f, q_e=q_e, q_u=q_u):
            return _clarifier_tss_rhs(unit, np.maximum(X, 0.0),
                                      max(tss_f, 0.0), q_f, q_e, q_u)
        c["kernel"] = kernel

        def step(y, sv, dy, sl=sl, fk=fk, n=n, sol=sol, wtss=wtss,
                 q_f=q_f, V=V, kernel=kernel):
            st = y[sl]
            feed = sv[fk]
            tss_f = wtss @ feed
            dy_u = dy[sl]
            dy_u[:n] = kernel(st[:n], tss_f)
            dy_u[n:] = (q_f / V) * (feed[sol] - st[n:])
        dyn_steps.append(step)

    def rhs(t, y):
        m = y.min()
        if m != m or m < -1.0:
            raise SolverError(
                f"state diverged (min {m:g} at t={t:g} d)", time=t, state=y)
        for st in hot_steps:
            st(y, svals)
        dy = np.empty(size)
        for st in dyn_steps:
            st(y, svals, dy)
        return dy

    jac = _compile_jacobian(graph, flows, slices, sidx, svals, hot_steps,
                            kin_batches, clar_infos, size, n_comp, iSO)

    return OdeProblem(graph=graph, size=size, slices=slices, labels=labels,
                      flows=flows, params=params, rhs=rhs, jac=jac,
                      _full_plan=full_plan, _svals=svals, _sidx=sidx)


def _compile_jacobian(graph, flows, slices, sidx, svals, hot_steps,
                      kin_batches, clar_infos, size, n_comp, iSO):
    """Jacobian closure for the compiled ODE.

    The flow network contributes a constant matrix, precomputed here.
    Kinetic blocks and settler solids blocks are finite-differenced per
    call (block-local, not a full-system sweep); couplings through
    streams that pass a settler outlet are chained analytically from
    the current state.
    """
    comps = graph.components
    eye = np.eye(n_comp)
    clar_by_uid = {c["uid"]: c for c in clar_infos}
    conv_mats = {uid: _conversion_matrix(u, comps)
                 for uid, u in graph.units.items()
                 if isinstance(u, ConversionReactor)}

    def stream_const(sid):
        s = graph.streams[sid]
        if s.source is None:
            return True
        uid, _ = s.source
        u = graph.units[uid]
        if isinstance(u, CSTR):
            return True
        if isinstance(u, Clarifier):
            return False
        return all(stream_const(i) for i in graph.unit_inlets[uid])

    def stream_deriv(sid, y, cache):
        """{unit id: d conc(sid) / d state_block} at the current state."""
        if sid in cache:
            return cache[sid]
        s = graph.streams[sid]
        if s.source is None:
            d = {}
        else:
            uid, port = s.source
            u = graph.units[uid]
            if isinstance(u, CSTR):
                d = {uid: eye}
            elif isinstance(u, Splitter):
                d = stream_deriv(graph.unit_inlets[uid][0], y, cache)
            elif isinstance(u, Mixer):
                plan, _ = _mix_plan(graph, flows, graph.unit_inlets[uid], sidx)
                d = {}
                for in_sid, _, w in plan:
                    for k2, V in stream_deriv(in_sid, y, cache).items():
                        d[k2] = d.get(k2, 0.0) + w * V
            elif isinstance(u, ConversionReactor):
                M = conv_mats[uid]
                d = {k2: M @ V
                     for k2, V in stream_deriv(
                         graph.unit_inlets[uid][0], y, cache).items()}
            else:
                c = clar_by_uid[uid]
                st = y[c["sl"]]
                n = c["n"]
                feed = svals[c["fk"]]
                tss_f = float(c["wtss"] @ feed)
                layer = 0 if port == 0 else n - 1
                m = c["sl"].stop - c["sl"].start
                B = np.zeros((n_comp, m))
                for z, ci in enumerate(c["sol"]):
                    B[ci, n + z] = 1.0
                d = {}
                if tss_f > 0.0:
                    XL = max(float(st[layer]), 0.0)
                    part = c["part"]
                    B[part, layer] = feed[part] / tss_f
                    A = np.zeros((n_comp, n_comp))
                    A[part, part] = XL / tss_f
                    A[np.ix_(part, np.arange(n_comp))] -= np.outer(
                        feed[part] * XL / tss_f ** 2, c["wtss"])
                    for k2, V in stream_deriv(c["feed_sid"], y, cache).items():
                        d[k2] = A @ V
                prev = d.get(uid)
                d[uid] = B if prev is None else prev + B
        cache[sid] = d
        return d

    const_cache = {}
    for sid in graph.streams:
        if stream_const(sid):
            stream_deriv(sid, None, const_cache)

    base = np.zeros((size, size))
    dyn_inflow = []
    for b in kin_batches:
        for r, uid in enumerate(b["uids"]):
            sl_r = slices[uid]
            qv = b["QV"][r]
            diag = np.arange(sl_r.start, sl_r.stop)
            base[diag, diag] -= qv
            if iSO >= 0 and b["kla"][r] > 0.0:
                so = sl_r.start + iSO
                base[so, so] -= b["kla"][r]
            for in_sid, _, w in b["plans"][r]:
                if in_sid in const_cache:
                    for uid2, V in const_cache[in_sid].items():
                        base[sl_r, slices[uid2]] += qv * w * V
                else:
                    dyn_inflow.append((sl_r, qv * w, in_sid))
    dyn_clar_sol = []
    for c in clar_infos:
        sl_c = c["sl"]
        n = c["n"]
        qv = c["q_f"] / c["V"]
        rows = np.arange(sl_c.start + n, sl_c.stop)
        base[rows, rows] -= qv
        if c["feed_sid"] in const_cache:
            for uid2, V in const_cache[c["feed_sid"]].items():
                cols = np.arange(slices[uid2].start, slices[uid2].stop)
                base[np.ix_(rows, cols)] += qv * V[c["sol"], :]
        else:
            dyn_clar_sol.append((rows, qv, c))

    def jac(t, y):
        for stp in hot_steps:
            stp(y, svals)
        J = base.copy()
        cache = dict(const_cache)
        for b in kin_batches:
            if b["matrix"] is None:
                continue
            if b["contiguous"]:
                S = y[b["a0"]:b["b0"]].reshape(b["k"], n_comp)
            else:
                S = y[b["rows"]]
            ratefn = b["matrix"].rates
            nu = b["matrix"].nu
            rho0 = ratefn(S, b["p"])
            for i in range(n_comp):
                eps = 1e-7 * max(1.0, float(np.max(np.abs(S[:, i]))))
                Sp = S.copy()
                Sp[:, i] += eps
                dprod = ((ratefn(Sp, b["p"]) - rho0) / eps) @ nu
                for r, uid in enumerate(b["uids"]):
                    sl_r = slices[uid]
                    J[sl_r, sl_r.start + i] += dprod[r]
        for c in clar_infos:
            sl_c = c["sl"]
            n = c["n"]
            X = y[sl_c][:n]
            feed = svals[c["fk"]]
            tss_f = float(c["wtss"] @ feed)
            kernel = c["kernel"]
            f0 = kernel(X, tss_f)
            rows = np.arange(sl_c.start, sl_c.start + n)
            for i in range(n):
                eps = 1e-7 * max(1.0, abs(float(X[i])))
                Xp = X.copy()
                Xp[i] += eps
                J[rows, sl_c.start + i] += (kernel(Xp, tss_f) - f0) / eps
            epsf = 1e-7 * max(1.0, tss_f)
            dfdt = (kernel(X, tss_f + epsf) - f0) / epsf
            for uid2, V in stream_deriv(c["feed_sid"], y, cache).items():
                cols = np.arange(slices[uid2].start, slices[uid2].stop)
                J[np.ix_(rows, cols)] += np.outer(dfdt, c["wtss"] @ V)
        for sl_r, coef, sid in dyn_inflow:
            for uid2, V in stream_deriv(sid, y, cache).items():
                J[sl_r, slices[uid2]] += coef * V
        for rows, coef, c in dyn_clar_sol:
            for uid2, V in stream_deriv(c["feed_sid"], y, cache).items():
                cols = np.arange(slices[uid2].start, slices[uid2].stop)
                J[np.ix_(rows, cols)] += coef * V[c["sol"], :]
        return J

    return jac


@dataclass
class Trajectory:
    """Time series of the global state."""

    times: np.ndarray
    states: np.ndarray
    problem: OdeProblem

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=float)
        if s.shape != (t.size, self.problem.size):
            raise ValueError("trajectory shape mismatch")
        if t.size > 1 and not np.all(np.diff(t) > 0.0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(s)):
            raise ValueError("trajectory states must be finite")
        self.times = t
        self.states = s

    def final_state(self):
        return self.states[-1]

    def to_csv(self, path):
        write_state_csv(path, self.problem.labels, self.times, self.states)


@dataclass
class SteadyState:
    """A converged state with its convergence diagnostics."""

    state: np.ndarray
    problem: OdeProblem
    diagnostics: dict

    @property
    def converged(self):
        return bool(self.diagnostics.get("converged", False))


def _fmt(x):
    return format(float(x), ".17g")


def write_state_csv(path, labels, times, states):
    """Trajectory CSV: t_d column plus one column per state label."""
    lines = ["t_d," + ",".join(labels)]
    for t, row in zip(np.atleast_1d(times), np.atleast_2d(states)):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def _odeint_run(problem, y, t_req, rtol, atol, dfun=None):
    """One LSODA call over a time grid, returning all grid states."""
    out, info = odeint(problem.rhs, y, t_req, tfirst=True,
                       Dfun=dfun, rtol=rtol, atol=atol,
                       mxstep=10000000, full_output=True)
    if info["message"] != "Integration successful.":
        t_cur = float(info["tcur"][-1]) if len(info["tcur"]) else t_req[0]
        raise SolverError(
            f"integration failed at t={t_cur:g} d: {info['message']}",
            time=t_cur, state=out[-1])
    return out


def integrate(system, t_end, init, rtol=1e-6, atol=1e-8, t_eval=None,
              method="LSODA", params=None):
    """Integrate a dynamic system from `init` to `t_end` days.

    Parameters
    ----------
    system : SystemGraph or OdeProblem
    t_end : float
    init : array or {unit id: array}
    rtol, atol : float
        Stiff-solver tolerances.
    t_eval : array, optional
        Output grid; defaults to 201 evenly spaced points.
    method : str
        "LSODA" (default, fastest here) or any stiff-capable scipy
        method (BDF, Radau).
    params : parameter set, optional
        Only used when `system` is a graph.

    Returns
    -------
    Trajectory
    """
    problem = system if isinstance(system, OdeProblem) else \
        assemble_ode(system, params)
    y0 = problem.pack(init)
    if not np.all(np.isfinite(y0)):
        raise FlowsheetError("initial state must be finite")
    if np.any(y0 < -1e-9):
        raise FlowsheetError("initial state must be non-negative")
    if t_end < 0.0:
        raise FlowsheetError("t_end must be non-negative")
    if t_end == 0.0:
        return Trajectory(np.array([0.0]), y0[None, :], problem)
    if t_eval is None:
        t_eval = np.linspace(0.0, float(t_end), 201)
    t_eval = np.asarray(t_eval, dtype=float)
    if method == "LSODA":
        if t_eval[0] > 0.0:
            t_req = np.concatenate([[0.0], t_eval])
            skip_first = True
        else:
            t_req = t_eval
            skip_first = False
        # At loose tolerances the solver's own secant Jacobian damps
        # the settling-flux switching better than the compiled one;
        # below the crossover the compiled Jacobian wins on eval cost.
        dfun = problem.jac if rtol < 5e-6 else None
        out = _odeint_run(problem, y0, t_req, rtol, atol, dfun)
        if skip_first:
            return Trajectory(t_req[1:], out[1:], problem)
        return Trajectory(t_req, out, problem)
    sol = solve_ivp(problem.rhs, (0.0, float(t_end)), y0, method=method,
                    rtol=rtol, atol=atol, t_eval=t_eval, jac=problem.jac)
    if not sol.success:
        t_last = float(sol.t[-1]) if sol.t.size else 0.0
        y_last = sol.y[:, -1] if sol.t.size else y0
        raise SolverError(
            f"integration failed at t={t_last:g} d: {sol.message}",
            time=t_last, state=y_last)
    return Trajectory(sol.t, sol.y.T, problem)


def steady_state(system, init, tol_ss=1e-5, t_max=200.0, check_interval=10.0,
                 params=None, use_jac=False):
    """Integrate until the scaled derivative falls below `tol_ss`.

    The criterion is max_i |dy_i/dt| / max(|y_i|, 1) <= tol_ss, checked
    every `check_interval` days up to `t_max`. Integration runs in two
    phases: loose tolerances through the start-up transient (where the
    settler flux limiter makes tight error control pathologically
    expensive), then tolerances two orders below `tol_ss` so the
    integration noise floor sits safely under the criterion.

    Parameters
    ----------
    use_jac : bool
        Hand the compiled Jacobian to the stiff solver during the
        loose phase. Off-nominal parameter sets often make the solver
        re-difference its own Jacobian nearly every step, which the
        cheap compiled one sidesteps; at the nominal operating point
        the differenced Jacobian tracks the settling-flux switching
        better, so this is off by default.

    Raises
    ------
    ConvergenceError
        If the criterion is not met by `t_max`; the error carries the
        state reached in ``err.steady``.
    """
    problem = system if isinstance(system, OdeProblem) else \
        assemble_ode(system, params)
    y = problem.pack(init)
    if not np.all(np.isfinite(y)):
        raise FlowsheetError("initial state must be finite")
    if np.any(y < -1e-9):
        raise FlowsheetError("initial state must be non-negative")

    def advance(y, t, target, rtol, atol, stop_at):
        """Integrate with checkpoints every check_interval; stop early
        once the scaled derivative at a checkpoint drops to stop_at.

        The output grid is much finer than the checkpoints: coarse
        output intervals can lock the solver into a rejected-step
        cycle around the settling-flux switching times, while a dense
        grid (pure interpolation) leaves its step sequence healthy.
        The first block is long so the main transient rides one call;
        later blocks are short so a run that converges just past a
        block boundary does not pay for most of a spare block.
        """
        span = 5.0 * check_interval
        while t < target:
            block = min(target, t + span)
            span = 2.0 * check_interval
            n = max(2, int(round((block - t) / 0.25)) + 1)
            grid = np.linspace(t, block, n)
            out = _odeint_run(problem, y, grid, rtol, atol)
            for ck in np.arange(t + check_interval, block + 1e-9,
                                check_interval):
                k = int(np.argmin(np.abs(grid - ck)))
                sd = problem.scaled_derivative(out[k], grid[k])
                if sd <= stop_at:
                    return out[k], float(grid[k]), sd
            y, t = out[-1], float(block)
        return y, t, problem.scaled_derivative(y, t)

    def advance_jac(y, t, target, rtol, atol, stop_at):
        """Like advance, but one short leg per checkpoint with the
        compiled Jacobian; dense output is unnecessary since the
        supplied Jacobian never goes stale between corrector calls.
        """
        while t < target:
            leg = min(target, t + check_interval)
            out = _odeint_run(problem, y, np.array([t, leg]), rtol, atol,
                              dfun=problem.jac)
            y, t = out[-1], float(leg)
            sd = problem.scaled_derivative(y, t)
            if sd <= stop_at:
                return y, t, sd
        return y, t, problem.scaled_derivative(y, t)

    t = 0.0
    sd = problem.scaled_derivative(y)
    coarse = max(tol_ss, 1e-3)
    if sd > coarse:
        step = advance_jac if use_jac else advance
        y, t, sd = step(y, t, t_max, 1e-5, 1e-7, coarse)
    if coarse > tol_ss and sd > tol_ss:
        rtol_b = min(1e-7, tol_ss * 1e-2)
        atol_b = min(1e-9, tol_ss * 1e-4)
        y, t, sd = advance(y, t, t_max, rtol_b, atol_b, tol_ss)
    diag = {"converged": sd <= tol_ss, "time": t,
            "max_scaled_derivative": sd, "tol_ss": tol_ss}
    result = SteadyState(np.array(y), problem, diag)
    if not result.converged:
        raise ConvergenceError(
            f"no steady state by t={t_max:g} d "
            f"(scaled derivative {sd:.3g} > {tol_ss:g})", steady=result)
    return result


def converge_equilibrium(graph, tol=1e-8, max_iter=200):
    """Converge a static graph by sequential-modular iteration.

    Cycles are torn at the member stream with the smallest registration
    index; torn streams start at zero flow and iterate to a fixed point
    (relative tolerance `tol` on flow and component mass flows).
    Acyclic graphs converge in a single pass.

    Returns
    -------
    dict
        {stream id: WasteStream} for every stream.
    """
    graph.validate()
    if graph.mode != "equilibrium":
        raise FlowsheetError("converge_equilibrium requires all-static graphs")
    reg_index = {sid: k for k, sid in enumerate(graph.streams)}

    deps = {sid: () for sid in graph.streams}
    for uid in graph.units:
        for o in graph.unit_outlets[uid]:
            deps[o] = tuple(graph.unit_inlets[uid])

    tears = []
    while True:
        cyclic = _find_cycle_streams(deps, set(tears))
        if not cyclic:
            break
        tears.append(min(cyclic, key=lambda s: reg_index[s]))

    unit_order = []
    done = set(graph.influents) | set(tears)
    remaining = dict(graph.units)
    while remaining:
        progressed = False
        for uid in list(remaining):
            if all(s in done for s in graph.unit_inlets[uid]):
                unit_order.append(uid)
                done.update(graph.unit_outlets[uid])
                del remaining[uid]
                progressed = True
        if not progressed:
            raise FlowsheetError(
                f"cannot order units; unresolved: {sorted(remaining)}")

    comps = graph.components
    zero = WasteStream(comps, np.zeros(len(comps)), 0.0)
    sv = {sid: zero for sid in graph.streams}
    sv.update(graph.influents)

    worst = np.inf
    for _ in range(max_iter):
        old_tears = {sid: sv[sid] for sid in tears}
        for uid in unit_order:
            ins = [sv[s] for s in graph.unit_inlets[uid]]
            outs = static_convert(graph.units[uid], ins)
            for sid, ws in zip(graph.unit_outlets[uid], outs):
                sv[sid] = ws
        if not tears:
            return sv
        worst = 0.0
        for sid in tears:
            a, b = old_tears[sid], sv[sid]
            worst = max(worst, _rel_diff(a.flow, b.flow))
            ma = a.conc * a.flow
            mb = b.conc * b.flow
            for x, yv in zip(ma, mb):
                worst = max(worst, _rel_diff(x, yv))
        if worst <= tol:
            return sv
    raise ConvergenceError(
        f"equilibrium iteration limit ({max_iter}) exceeded; "
        f"last relative change {worst:.3g}")


def _rel_diff(a, b):
    m = max(abs(a), abs(b))
    return 0.0 if m == 0.0 else abs(a - b) / m


def _find_cycle_streams(deps, torn):
    """Streams on some dependency cycle, ignoring torn streams."""
    color = {}
    cyclic = set()

    def visit(sid, path):
        color[sid] = 1
        path.append(sid)
        for d in deps[sid]:
            if d in torn:
                continue
            c = color.get(d, 0)
            if c == 1:
                k = path.index(d)
                cyclic.update(path[k:])
            elif c == 0:
                visit(d, path)
        path.pop()
        color[sid] = 2

    for sid in deps:
        if color.get(sid, 0) == 0 and sid not in torn:
            visit(sid, [])
    return cyclic


# BSM1 reference plant

#: Constant influent composition, g/m3 (alkalinity mol/m3).
BSM1_INFLUENT = {
    "S_I": 30.0, "S_S": 69.5, "X_I": 51.2, "X_S": 202.32, "X_BH": 28.17,
    "X_BA": 0.0, "X_P": 0.0, "S_O": 0.0, "S_NO": 0.0, "S_NH": 31.56,
    "S_ND": 6.95, "X_ND": 10.59, "S_ALK": 7.0,
}

#: Reactor initial concentrations for dynamic runs, g/m3.
BSM1_INIT = {
    "S_I": 0.0, "S_S": 5.0, "X_I": 1000.0, "X_S": 100.0, "X_BH": 500.0,
    "X_BA": 100.0, "X_P": 100.0, "S_O": 2.0, "S_NO": 20.0, "S_NH": 2.0,
    "S_ND": 1.0, "X_ND": 1.0, "S_ALK": 7.0,
}

#: Settler initial TSS profile, top to bottom, g/m3.
BSM1_INIT_TSS = (10.0, 20.0, 40.0, 70.0, 200.0, 300.0, 350.0, 350.0,
                 2000.0, 4000.0)


@dataclass(frozen=True)
class BSM1Settings:
    """Open-loop BSM1 configuration at 15 C equivalent conditions.

    Flows in m3/d, volumes in m3, K_La in 1/d. The internal recycle is
    realized as a split of the last reactor's outflow with ratio
    Q_intr/(Q_intr + Q_in + Q_RAS), which reproduces Q_intr exactly
    under constant-volume flow propagation.
    """

    Q_in: float = 18446.0
    T_water: float = 293.15
    DO_sat: float = 8.0
    influent: dict = field(default_factory=lambda: dict(BSM1_INFLUENT))
    V_a: float = 1000.0
    V_o: float = 1333.0
    K_La1: float = 240.0
    K_La2: float = 84.0
    Q_RAS: float = 18446.0
    Q_WAS: float = 385.0
    Q_intr: float = 3.0 * 18446.0
    clarifier_area: float = 1500.0
    clarifier_height: float = 4.0
    n_layers: int = 10
    feed_layer: int = 5
    f_SS_COD: float = 0.75
    T_air: float = 293.15
    P: float = 101325.0

    def __post_init__(self):
        for name in ("Q_RAS", "Q_WAS", "Q_intr", "K_La1", "K_La2"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("Q_in", "V_a", "V_o", "DO_sat", "clarifier_area",
                     "clarifier_height", "f_SS_COD"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.Q_RAS + self.Q_WAS <= 0.0:
            raise ValueError("underflow Q_RAS + Q_WAS must be positive")
        unknown = set(self.influent) - set(ASM1_IDS)
        if unknown:
            raise ValueError(f"unknown influent components: {sorted(unknown)}")
        if any(v < 0.0 for v in self.influent.values()):
            raise ValueError("influent concentrations must be non-negative")

    @property
    def internal_split(self):
        """Fraction of the last reactor's outflow recycled to the inlet."""
        return self.Q_intr / (self.Q_intr + self.Q_in + self.Q_RAS)

    @property
    def underflow(self):
        return self.Q_RAS + self.Q_WAS

    def influent_conc(self, components):
        conc = np.zeros(len(components))
        for cid, v in self.influent.items():
            conc[components.index(cid)] = v
        return conc

    def replace(self, **changes):
        return replace(self, **changes)


def build_bsm1(settings=None, params=None, settling=None):
    """Assemble the open-loop BSM1 plant.

    Two anoxic reactors, three aerated reactors, an internal recycle
    split off the last reactor, and a 10-layer settler whose underflow
    splits into RAS (back to the inlet) and WAS.

    Parameters
    ----------
    settings : BSM1Settings, optional
    params : ASM1ParameterSet, optional
    settling : SettlingParams, optional

    Returns
    -------
    SystemGraph
        Tagged with roles ("effluent", "was", "reactors", ...) consumed
        by :func:`effluent_metrics`.
    """
    from .units import SettlingParams

    settings = settings if settings is not None else BSM1Settings()
    params = params if params is not None else ASM1ParameterSet()
    settling = settling if settling is not None else SettlingParams()
    comps = asm1_component_set(params.i_XB, params.i_XP)
    matrix = asm1_matrix(params, comps)
    composite = params.composite_params(settings.f_SS_COD)

    g = SystemGraph(comps)
    aer1 = AerationProcess(settings.K_La1, settings.DO_sat)
    aer2 = AerationProcess(settings.K_La2, settings.DO_sat)
    g.add_unit(CSTR("A1", settings.V_a, comps, matrix),
               inlets=("influent", "ras", "internal_recycle"),
               outlets=("a1_out",))
    g.add_unit(CSTR("A2", settings.V_a, comps, matrix),
               inlets=("a1_out",), outlets=("a2_out",))
    g.add_unit(CSTR("O1", settings.V_o, comps, matrix, aer1),
               inlets=("a2_out",), outlets=("o1_out",))
    g.add_unit(CSTR("O2", settings.V_o, comps, matrix, aer1),
               inlets=("o1_out",), outlets=("o2_out",))
    g.add_unit(CSTR("O3", settings.V_o, comps, matrix, aer2),
               inlets=("o2_out",), outlets=("o3_out",))
    split = settings.internal_split
    g.add_unit(Splitter("recycle_split", (split, 1.0 - split)),
               inlets=("o3_out",),
               outlets=("internal_recycle", "settler_feed"))
    g.add_unit(Clarifier("settler", comps, area=settings.clarifier_area,
                         height=settings.clarifier_height,
                         n_layers=settings.n_layers,
                         feed_layer=settings.feed_layer,
                         settling=settling,
                         tss_per_cod=settings.f_SS_COD),
               inlets=("settler_feed",), outlets=("effluent", "underflow"))
    under = settings.underflow
    g.add_unit(Splitter("sludge_split",
                        (settings.Q_RAS / under, settings.Q_WAS / under)),
               inlets=("underflow",), outlets=("ras", "was"))
    g.set_influent("influent",
                   WasteStream(comps, settings.influent_conc(comps),
                               settings.Q_in, temperature=settings.T_water))
    g.set_flow("underflow", under)
    g.roles = {
        "reactors": ("A1", "A2", "O1", "O2", "O3"),
        "clarifier": "settler",
        "influent": "influent",
        "effluent": "effluent",
        "was": "was",
        "ras": "ras",
        "composite": composite,
        "settings": settings,
        "asm1": params,
    }
    g.validate()
    return g


def bsm1_initial_state(problem, conc=None, layer_tss=None):
    """Default BSM1 initial state, packed for `problem`.

    All five reactors start at the same concentrations (`conc`,
    defaulting to the published baseline initial conditions); the
    settler's solubles start at the same values and its layer TSS
    follows the baseline profile scaled in proportion to the reactor
    TSS (the profile-to-TSS factors are fixed constants).
    """
    graph = problem.graph
    comps = graph.components
    if conc is None:
        conc = np.array([BSM1_INIT[cid] for cid in comps.ids])
    else:
        conc = np.asarray(conc, dtype=float)
    clar = graph.units[graph.roles["clarifier"]]
    if layer_tss is None:
        base_tss = clar.tss_weights @ np.array(
            [BSM1_INIT[cid] for cid in comps.ids])
        factors = np.array(BSM1_INIT_TSS) / base_tss
        layer_tss = factors * (clar.tss_weights @ conc)
    init = {}
    for uid in graph.roles["reactors"]:
        init[uid] = conc
    init[clar.id] = clar.initial_state(conc, solids=layer_tss)
    return problem.pack(init)


def effluent_metrics(problem, steady, params=None):
    """The seven BSM1 performance metrics at a steady state.

    COD, BOD5, TSS and TN are composites of the settler effluent in
    g/m3.  TKN is the dissolved Kjeldahl fraction of the effluent,
    ammonium plus soluble organic nitrogen, the portion a filtered
    Kjeldahl assay sees; particulate organic nitrogen is counted in
    TN only.  Sludge production is the wasted solids in kg/d; SRT is
    the reactor solids inventory over the solids leaving in WAS and
    effluent, in days.

    Parameters
    ----------
    problem : OdeProblem
        Must come from a role-tagged graph (see :func:`build_bsm1`).
    steady : SteadyState or state vector
    params : CompositeParams, optional
        Defaults to the graph's tagged composite parameters.
    """
    graph = problem.graph
    roles = graph.roles
    for key in ("effluent", "was", "reactors", "composite"):
        if key not in roles:
            raise FlowsheetError(f"graph lacks the {key!r} role tag")
    if isinstance(steady, SteadyState):
        if not steady.converged:
            raise ConvergenceError("metrics need a converged steady state")
        state = steady.state
    else:
        state = np.asarray(steady, dtype=float)
    cp = params if params is not None else roles["composite"]
    sv = problem.eval_streams(state)
    eff = sv[roles["effluent"]]
    was = sv[roles["was"]]
    comps = graph.components
    w = {name: composite_weights(comps, name, cp)
         for name in ("COD", "BOD5", "TSS", "TN")}
    out = {name: float(w[name] @ eff.conc)
           for name in ("COD", "BOD5", "TSS", "TN")}
    out["TKN"] = float(eff.conc[comps.index("S_NH")]
                       + eff.conc[comps.index("S_ND")])
    tss_was = float(w["TSS"] @ was.conc)
    out["sludge_production"] = was.flow * tss_was / 1000.0
    inventory = 0.0
    for uid in roles["reactors"]:
        u = graph.units[uid]
        tss_r = float(w["TSS"] @ problem.unit_state(state, uid))
        inventory += u.volume * tss_r
    leaving = was.flow * tss_was + eff.flow * float(w["TSS"] @ eff.conc)
    if leaving <= 0.0:
        raise FlowsheetError("SRT undefined: no solids leave the system")
    out["SRT"] = inventory / leaving
    return out


def write_steady_csv(path, problem, steady, metrics, time=None):
    """Steady-state CSV: state columns plus the seven metrics."""
    if isinstance(steady, SteadyState):
        state = steady.state
        time = steady.diagnostics.get("time", 0.0) if time is None else time
    else:
        state = np.asarray(steady, dtype=float)
        time = 0.0 if time is None else time
    header = ["t_d"] + list(problem.labels) + list(METRIC_NAMES)
    row = [time] + [float(v) for v in state] + [metrics[m] for m in METRIC_NAMES]
    text = ",".join(header) + "\n" + ",".join(_fmt(v) for v in row) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
