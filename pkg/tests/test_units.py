"""Unit operations: CSTR, layered settler, static junctions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from asmbench import (CSTR, BSM1_INFLUENT, Clarifier, ConversionReactor,
                      Mixer, Reaction, SettlingParams, Splitter, WasteStream,
                      asm1_component_set, clarifier_derivative,
                      clarifier_outlets, cstr_derivative, is_static, mix,
                      settling_velocity, static_convert)

COMPS = asm1_component_set()


def influent(flow=18446.0):
    conc = [BSM1_INFLUENT[cid] for cid in COMPS.ids]
    return WasteStream(COMPS, conc, flow)


def stream_from(mapping, flow=100.0):
    conc = [mapping.get(cid, 0.0) for cid in COMPS.ids]
    return WasteStream(COMPS, conc, flow)


class TestSettlingVelocity:
    def test_nonsettleable_floor_gives_zero(self):
        p = SettlingParams()
        X = p.f_ns * 3000.0
        assert settling_velocity(X, 3000.0, p) == 0.0

    def test_vanishes_at_high_solids(self):
        assert settling_velocity(1e9, 0.0, SettlingParams()) == pytest.approx(
            0.0, abs=1e-12)

    def test_report_default_arithmetic(self):
        # X* = 200 with the report defaults: 474*(e^-0.1152 - e^-0.572)
        v = settling_velocity(200.0, 0.0, SettlingParams())
        assert v == pytest.approx(154.9, abs=0.05)
        assert v == pytest.approx(
            474.0 * (np.exp(-0.1152) - np.exp(-0.572)), rel=1e-12)

    def test_practical_cap(self):
        p = SettlingParams(v0=474.0, v0_prime=100.0)
        x = np.linspace(0.0, 5000.0, 200)
        v = settling_velocity(x, 0.0, p)
        assert v.max() == pytest.approx(100.0)

    def test_vectorized_matches_scalar(self):
        p = SettlingParams()
        x = np.array([0.0, 50.0, 500.0, 5000.0])
        v = settling_velocity(x, 400.0, p)
        for xi, vi in zip(x, v):
            assert settling_velocity(xi, 400.0, p) == vi

    @given(st.floats(0.0, 5e4), st.floats(0.0, 1e4))
    @settings(max_examples=100, deadline=None)
    def test_bounded(self, X, X_feed):
        p = SettlingParams()
        v = settling_velocity(X, X_feed, p)
        assert 0.0 <= v <= p.v0_prime

    @given(st.floats(0.0, 2e4), st.floats(0.0, 2e4))
    @settings(max_examples=100, deadline=None)
    def test_lipschitz_continuous(self, a, b):
        p = SettlingParams()
        va = settling_velocity(a, 100.0, p)
        vb = settling_velocity(b, 100.0, p)
        assert abs(va - vb) <= p.v0 * p.r_p * abs(a - b) + 1e-9

    def test_zero_params_allowed(self):
        p = SettlingParams(v0=0.0, v0_prime=0.0, r_h=0.0, r_p=0.0,
                           f_ns=0.0, X_t=0.0)
        assert settling_velocity(2000.0, 500.0, p) == 0.0

    def test_invalid_cap_rejected(self):
        with pytest.raises(ValueError, match="v0_prime"):
            SettlingParams(v0=100.0, v0_prime=200.0)

    def test_invalid_fns_rejected(self):
        with pytest.raises(ValueError, match="f_ns"):
            SettlingParams(f_ns=1.0)


class TestCSTR:
    def test_equilibrium_derivative_zero(self):
        unit = CSTR("R", 1000.0, COMPS)
        s = influent()
        d = cstr_derivative(unit, s, s.conc)
        np.testing.assert_allclose(d, 0.0, atol=1e-14)

    def test_first_order_step_response(self):
        # C(t) = 10 (1 - e^-t) at HRT = 1 d; C(1) = 6.321...
        unit = CSTR("R", 100.0, COMPS)
        feed = stream_from({"S_I": 10.0}, flow=100.0)
        sol = solve_ivp(
            lambda t, y: cstr_derivative(unit, feed, y),
            (0.0, 1.0), np.zeros(13), rtol=1e-10, atol=1e-12)
        k = COMPS.index("S_I")
        exact = 10.0 * (1.0 - np.exp(-1.0))
        assert sol.y[k, -1] == pytest.approx(exact, abs=1e-6)
        assert exact == pytest.approx(6.321, abs=5e-4)

    def test_no_aeration_means_no_kla_term(self):
        unit = CSTR("A1", 1000.0, COMPS)
        s = influent()
        state = np.array(s.conc)
        base = cstr_derivative(unit, s, state)
        state2 = state.copy()
        state2[COMPS.index("S_O")] += 1.0
        shifted = cstr_derivative(unit, s, state2)
        k = COMPS.index("S_O")
        # only dilution responds to S_O without aeration or kinetics
        assert shifted[k] - base[k] == pytest.approx(-s.flow / unit.volume)

    def test_steady_state_conserves_mass_flow(self):
        unit = CSTR("R", 2000.0, COMPS)
        feed = influent()
        out = WasteStream(COMPS, feed.conc, feed.flow)
        for k in range(13):
            fin = feed.flow * feed.conc[k]
            fout = out.flow * out.conc[k]
            assert fout == pytest.approx(fin, rel=1e-9)

    def test_bad_state_shape_rejected(self):
        unit = CSTR("R", 10.0, COMPS)
        with pytest.raises(ValueError, match="shape"):
            cstr_derivative(unit, influent(), np.zeros(5))

    def test_zero_volume_rejected(self):
        with pytest.raises(ValueError, match="volume"):
            CSTR("R", 0.0, COMPS)

    def test_aeration_needs_oxygen_component(self):
        from asmbench import AerationProcess
        from asmbench.core import Component, ComponentSet
        no_o2 = ComponentSet([Component("S_S", "g-COD/m3", False, i_COD=1.0)])
        with pytest.raises(ValueError, match="S_O"):
            CSTR("R", 10.0, no_o2, aeration=AerationProcess(240.0))


def clarifier(n_layers=10, feed_layer=5, **kw):
    return Clarifier("C1", COMPS, area=1500.0, height=4.0,
                     n_layers=n_layers, feed_layer=feed_layer, **kw)


def mlss_feed(flow=36892.0, tss=3000.0):
    # particulate make-up roughly like an activated-sludge mixed liquor
    cod = tss / 0.75
    return stream_from(
        {"S_I": 30.0, "S_S": 1.0, "S_O": 0.5, "S_NO": 10.0, "S_NH": 2.0,
         "S_ND": 0.7, "S_ALK": 4.0, "X_I": 0.38 * cod, "X_S": 0.02 * cod,
         "X_BH": 0.45 * cod, "X_BA": 0.03 * cod, "X_P": 0.12 * cod},
        flow=flow)


class TestClarifier:
    def test_pure_convection_steady_state(self):
        # v0 = 0: the balance is linear in layer TSS; build the matrix by
        # probing the derivative and solve directly for the steady state
        p = SettlingParams(v0=0.0, v0_prime=0.0, r_h=0.0, r_p=0.0,
                           f_ns=0.0, X_t=0.0)
        unit = clarifier(settling=p)
        feed = mlss_feed()
        q_eff, q_under = 0.5 * feed.flow, 0.5 * feed.flow
        n = unit.n_layers
        z = np.array(feed.conc)[unit.soluble_idx]

        def xdot(x):
            state = np.concatenate([x, z])
            return clarifier_derivative(unit, feed, state, q_eff, q_under)[:n]

        b = -xdot(np.zeros(n))
        A = np.column_stack(
            [xdot(np.eye(n)[j]) + b for j in range(n)])
        x_ss = np.linalg.solve(A, b)
        tss_feed = unit.feed_tss(feed.conc)
        np.testing.assert_allclose(x_ss, tss_feed, rtol=1e-10)
        # and the ODE sits still there
        ss = np.concatenate([x_ss, z])
        d = clarifier_derivative(unit, feed, ss, q_eff, q_under)
        np.testing.assert_allclose(d, 0.0, atol=1e-6)

    def test_zero_particulate_feed_drains(self):
        unit = clarifier()
        feed = stream_from({"S_I": 30.0, "S_S": 5.0, "S_ALK": 7.0},
                           flow=20000.0)
        x0 = np.concatenate([np.full(unit.n_layers, 500.0),
                             np.zeros(len(unit.soluble_idx))])
        sol = solve_ivp(
            lambda t, y: clarifier_derivative(unit, feed, y, 15000.0, 5000.0),
            (0.0, 30.0), x0, method="LSODA", rtol=1e-8, atol=1e-10)
        end = sol.y[:, -1]
        np.testing.assert_allclose(end[:unit.n_layers], 0.0, atol=1e-6)
        # solubles follow the one-CSTR exponential approach
        k = [i for i, j in enumerate(unit.soluble_idx)
             if COMPS.ids[j] == "S_I"][0]
        tau = unit.volume / feed.flow
        exact = 30.0 * (1.0 - np.exp(-30.0 / tau))
        assert end[unit.n_layers + k] == pytest.approx(exact, rel=1e-6)

    def test_solubles_identical_in_both_outlets(self):
        unit = clarifier()
        feed = mlss_feed()
        state = unit.initial_state(feed.conc)
        eff, under = clarifier_outlets(unit, feed, state, 18000.0, 18892.0)
        sol = unit.soluble_idx
        np.testing.assert_array_equal(eff.conc[sol], under.conc[sol])

    def test_outlet_particulates_follow_feed_composition(self):
        unit = clarifier()
        feed = mlss_feed()
        state = unit.initial_state(feed.conc)
        eff, _ = clarifier_outlets(unit, feed, state, 18000.0, 18892.0)
        part = unit.particulate_idx
        feed_part = np.array(feed.conc)[part]
        eff_part = eff.conc[part]
        # same ratios: eff = comp * TSS_top with comp = feed / feed TSS
        expected = feed_part / unit.feed_tss(feed.conc) * state[0]
        np.testing.assert_allclose(eff_part, expected, rtol=1e-12)

    def test_flux_limiter_branches(self):
        # 3 layers, feed at the bottom: both interfaces are above the
        # feed layer, so the min-limitation engages only past X_t
        unit = clarifier(n_layers=3, feed_layer=3)
        p = unit.settling
        feed = mlss_feed(tss=1000.0)
        tss_f = unit.feed_tss(feed.conc)
        z = np.array(feed.conc)[unit.soluble_idx]
        q_eff, q_under = 0.6 * feed.flow, 0.4 * feed.flow

        def dx(x1, x2, x3):
            state = np.concatenate([[x1, x2, x3], z])
            return clarifier_derivative(
                unit, feed, state, q_eff, q_under)[:3]

        h, A = unit.layer_height, unit.area

        # free branch: X2 below X_t, layer 1 hands its own flux down
        x = (800.0, 1500.0, 2500.0)
        v = [settling_velocity(xi, tss_f, p) for xi in x]
        d1 = dx(*x)[0]
        expected = ((x[1] - x[0]) * q_eff / A - v[0] * x[0]) / h
        assert d1 == pytest.approx(expected, rel=1e-12)

        # limited branch: X2 above X_t and slower, min flux applies
        x = (3500.0, 3600.0, 3800.0)
        v = [settling_velocity(xi, tss_f, p) for xi in x]
        assert v[1] * x[1] < v[0] * x[0]
        d1 = dx(*x)[0]
        expected = ((x[1] - x[0]) * q_eff / A - v[1] * x[1]) / h
        assert d1 == pytest.approx(expected, rel=1e-12)

    def test_outlet_flow_mismatch_rejected(self):
        unit = clarifier()
        feed = mlss_feed()
        state = unit.initial_state(feed.conc)
        with pytest.raises(ValueError, match="match feed"):
            clarifier_derivative(unit, feed, state, feed.flow, feed.flow)

    def test_zero_underflow_with_solids_flagged(self):
        unit = clarifier()
        feed = mlss_feed()
        state = unit.initial_state(feed.conc)
        with pytest.raises(ValueError, match="underflow"):
            clarifier_derivative(unit, feed, state, feed.flow, 0.0)

    def test_zero_underflow_without_solids_allowed(self):
        unit = clarifier()
        feed = stream_from({"S_I": 30.0}, flow=100.0)
        state = np.zeros(unit.n_states)
        d = clarifier_derivative(unit, feed, state, 100.0, 0.0)
        assert np.all(np.isfinite(d))

    def test_feed_layer_bounds_validated(self):
        with pytest.raises(ValueError, match="feed layer"):
            clarifier(feed_layer=11)

    def test_state_labels_layout(self):
        unit = clarifier()
        labels = unit.state_labels()
        assert labels[0] == "C1.TSS_1"
        assert labels[9] == "C1.TSS_10"
        assert len(labels) == unit.n_states
        assert labels[10].startswith("C1.S_")

    @given(st.lists(st.floats(0.0, 8000.0), min_size=10, max_size=10))
    @settings(max_examples=50, deadline=None)
    def test_derivative_finite_for_any_profile(self, layers):
        unit = clarifier()
        feed = mlss_feed()
        z = np.array(feed.conc)[unit.soluble_idx]
        state = np.concatenate([layers, z])
        d = clarifier_derivative(unit, feed, state, 18000.0, 18892.0)
        assert np.all(np.isfinite(d))


class TestStaticUnits:
    def test_splitter_bsm1_ratio(self):
        sp = Splitter("S1", (0.6, 0.4))
        s = influent(73784.0)
        a, b = static_convert(sp, [s])
        assert a.flow == pytest.approx(44270.4)
        assert b.flow == pytest.approx(29513.6)
        np.testing.assert_array_equal(a.conc, s.conc)
        np.testing.assert_array_equal(b.conc, s.conc)

    def test_splitter_fraction_sum_tolerance(self):
        Splitter("S", (0.6, 0.4 + 5e-10))
        with pytest.raises(ValueError, match="sum"):
            Splitter("S", (0.6, 0.401))

    def test_single_fraction_round_trip_identity(self):
        s = influent()
        (out,) = static_convert(Splitter("S", (1.0,)), [s])
        back = static_convert(Mixer("M"), [out])[0]
        assert back.flow == pytest.approx(s.flow)
        np.testing.assert_allclose(back.conc, s.conc, rtol=1e-15)

    def test_mixer_is_core_mix(self):
        a = influent(1000.0)
        b = stream_from({"S_S": 50.0}, flow=500.0)
        out = static_convert(Mixer("M"), [a, b])[0]
        ref = mix([a, b])
        assert out.flow == ref.flow
        np.testing.assert_array_equal(out.conc, ref.conc)

    def test_conversion_zero_is_identity(self):
        r = ConversionReactor("R", [Reaction("S_S", 0.0, {"S_I": 1.0})])
        s = influent()
        out = static_convert(r, [s])[0]
        np.testing.assert_array_equal(out.conc, s.conc)

    def test_full_conversion_cod_bookkeeping(self):
        r = ConversionReactor("R", [Reaction("S_S", 1.0, {"S_I": 1.0})])
        s = stream_from({"S_S": 69.5, "S_I": 30.0})
        out = static_convert(r, [s])[0]
        assert out.get("S_S") == 0.0
        assert out.get("S_I") == pytest.approx(99.5)

    def test_absent_reactant_is_noop(self):
        r = ConversionReactor("R", [Reaction("S_GLUCOSE", 1.0, {"S_I": 1.0})])
        s = influent()
        out = static_convert(r, [s])[0]
        np.testing.assert_array_equal(out.conc, s.conc)

    def test_conversion_bounds_validated(self):
        with pytest.raises(ValueError, match="conversion"):
            Reaction("S_S", 1.5, {})

    def test_is_static_classification(self):
        assert is_static(Mixer("M"))
        assert is_static(Splitter("S", (0.5, 0.5)))
        assert is_static(ConversionReactor("R", ()))
        assert not is_static(CSTR("C", 1.0, COMPS))

    def test_splitter_needs_single_inlet(self):
        with pytest.raises(ValueError, match="1 inlet"):
            static_convert(Splitter("S", (0.5, 0.5)), [influent(), influent()])
