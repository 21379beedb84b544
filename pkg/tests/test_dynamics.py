"""Dynamics engine: recursions, relay evaluation, stepping, traces."""

import math
import random

import numpy as np
import pytest

from frosim import (
    AttackSignal,
    EventKind,
    GridParams,
    HorizonTooShort,
    NO_ATTACK,
    SimOptions,
    SystemState,
    eval_ls_relays,
    eval_rocof_relays,
    frequency_step,
    governor_step,
    initial_state,
    rocof,
    simulate,
    simulate_step,
    write_trace_csv,
)
from frosim.dynamics import TRACE_CSV_HEADER
from conftest import (
    C1_GENERATORS,
    C1_LOADS,
    relays_disabled_config,
    study_config,
)

DT = 1.0 / 60.0
P = GridParams(h_inertia=2.0, droop_r=0.2, governor_t=0.2)


def mkstate(delta_f=0.0, dp_gov=0.0, n=0, history=None):
    return SystemState(
        n=n, delta_f=delta_f, dp_gov=dp_gov, dp_sh_cum=0.0, dp_tg_cum=0.0,
        freq_history=history if history is not None else (delta_f,),
        gen_latches=(False,) * 3, load_latches=(False,) * 4,
    )


class TestGovernorStep:
    def test_equilibrium_fixed_point(self):
        assert governor_step(mkstate(0.0, 0.0), P) == 0.0

    def test_droop_pull(self):
        # (dt/T) * (-df/R) with df = -0.001
        expected = (DT / 0.2) * (0.001 / 0.2)
        assert governor_step(mkstate(-0.001, 0.0), P) == pytest.approx(
            expected, rel=1e-15)
        assert expected == pytest.approx(4.1667e-4, rel=1e-4)

    def test_pure_decay(self):
        assert governor_step(mkstate(0.0, 0.1), P) == pytest.approx(
            0.1 * (1 - 1 / 12), rel=1e-15)


class TestFrequencyStep:
    def test_equilibrium(self):
        assert frequency_step(mkstate(), P, 0.0, 0.0, 0.0) == 0.0

    def test_first_step_of_attack(self):
        got = frequency_step(mkstate(), P, 0.322, 0.0, 0.0)
        expected = (DT / 8.0) * (-2.0 * 0.322)
        assert got == pytest.approx(expected, rel=1e-15)
        assert got * 60 == pytest.approx(-0.0805, rel=1e-12)

    def test_decay_coefficient(self):
        got = frequency_step(mkstate(-0.001), P, 0.0, 0.0, 0.0)
        expected = -0.001 * (1 - DT ** 2 / (4 * 2 * 0.2 * 0.2))
        assert got == pytest.approx(expected, rel=1e-15)
        assert got == pytest.approx(-9.99132e-4, rel=1e-6)

    def test_shed_load_raises_frequency(self):
        up = frequency_step(mkstate(), P, 0.0, 0.0, 1.0)
        assert up > 0.0

    def test_tripped_generation_lowers_frequency(self):
        down = frequency_step(mkstate(), P, 0.0, 1.0, 0.0)
        assert down < 0.0

    def test_literal_signs_flip_only_the_shed_term(self):
        shed_literal = frequency_step(mkstate(), P, 0.0, 0.0, 1.0,
                                      literal_signs=True)
        trip_literal = frequency_step(mkstate(), P, 0.0, 1.0, 0.0,
                                      literal_signs=True)
        assert shed_literal < 0.0
        assert trip_literal < 0.0


class TestRocof:
    # windowed slopes from the case-study tables, magnitudes in Hz/s
    C1_WINDOW_EARLY = [60.000, 59.991, 59.983, 59.976, 59.968, 59.960, 59.952]
    C1_WINDOW_LATE = [59.952, 59.944, 59.937, 59.930, 59.922, 59.915, 59.901]

    @staticmethod
    def hz_to_pu(values):
        return [v / 60.0 - 1.0 for v in values]

    def test_tabulated_early_window(self):
        got = rocof(self.hz_to_pu(self.C1_WINDOW_EARLY), P)
        assert got == pytest.approx(-0.480, abs=1e-9)

    def test_tabulated_late_window(self):
        got = rocof(self.hz_to_pu(self.C1_WINDOW_LATE), P)
        assert got == pytest.approx(-0.510, abs=1e-9)

    def test_constant_window_is_flat(self):
        assert rocof([0.01] * 7, P) == 0.0

    def test_short_history_marker(self):
        assert rocof([0.0] * 6, P) is None

    def test_uses_last_window_of_longer_history(self):
        padded = [0.5] * 5 + self.hz_to_pu(self.C1_WINDOW_EARLY)
        assert rocof(padded, P) == pytest.approx(-0.480, abs=1e-9)

    def test_telescoping_identity(self):
        # oracle: mean of per-step increments over the window
        rng = random.Random(3)
        for _ in range(100):
            window = [rng.uniform(-0.02, 0.02) for _ in range(7)]
            increments = [
                (window[k] - window[k - 1]) / DT for k in range(1, 7)
            ]
            oracle = sum(increments) / 6 * 60.0
            assert rocof(window, P) == pytest.approx(oracle, abs=1e-9)


class TestRelayEvaluation:
    def test_ls_above_threshold_no_op(self):
        res = eval_ls_relays(60.0, (False,) * 4, C1_LOADS)
        assert res.increment == 0.0 and not any(res.latches)

    def test_ls_sheds_all_reached_blocks(self):
        res = eval_ls_relays(59.4, (False,) * 4, C1_LOADS)
        assert res.increment == pytest.approx(2.0)
        assert all(res.latches) and len(res.fired) == 4

    def test_ls_threshold_boundary_inclusive(self):
        res = eval_ls_relays(59.5, (False,) * 4, C1_LOADS)
        assert res.increment == pytest.approx(2.0)

    def test_ls_latch_prevents_re_shedding(self):
        res = eval_ls_relays(59.4, (True,) * 4, C1_LOADS)
        assert res.increment == 0.0 and not res.fired

    def test_ls_literal_accumulation_readds(self):
        res = eval_ls_relays(59.4, (True,) * 4, C1_LOADS,
                             literal_accumulation=True)
        assert res.increment == pytest.approx(2.0)
        assert not res.fired  # already operated once

    def test_rocof_trips_only_lowest_threshold(self):
        res = eval_rocof_relays(-0.510, (False,) * 3, C1_GENERATORS)
        assert res.increment == pytest.approx(1.0)
        assert res.latches == (True, False, False)

    def test_rocof_below_threshold(self):
        res = eval_rocof_relays(-0.49, (False,) * 3, C1_GENERATORS)
        assert res.increment == 0.0

    def test_rocof_trips_all_when_steep(self):
        res = eval_rocof_relays(1.3, (False,) * 3, C1_GENERATORS)
        assert res.increment == pytest.approx(3.0)
        assert all(res.latches)

    def test_rocof_none_slope_is_noop(self):
        res = eval_rocof_relays(None, (False,) * 3, C1_GENERATORS)
        assert res.increment == 0.0


class TestSimulateStep:
    def test_equilibrium_is_fixed(self):
        cfg = study_config()
        state = initial_state(cfg)
        nxt, rec = simulate_step(state, cfg, NO_ATTACK)
        assert nxt.n == 1
        assert nxt.delta_f == 0.0 and nxt.dp_gov == 0.0
        assert rec.f_hz == 60.0 and not rec.events

    def test_attack_falls_monotonically_without_early_events(self):
        cfg = study_config()
        state = initial_state(cfg)
        attack = AttackSignal(0.322)
        freqs = []
        for _ in range(6):
            state, rec = simulate_step(state, cfg, attack)
            freqs.append(rec.f_hz)
            assert rec.n < 6 and not rec.events
        assert all(b < a for a, b in zip(freqs, freqs[1:]))

    def test_latches_are_absorbing(self):
        cfg = study_config()
        state = initial_state(cfg)
        attack = AttackSignal(0.322)
        for _ in range(10):
            state, _ = simulate_step(state, cfg, attack)
        assert all(state.gen_latches)
        tripped = state.dp_tg_cum
        for _ in range(10):
            state, rec = simulate_step(state, cfg, attack)
            assert not any(ev.kind is EventKind.ROCOF_TRIP for ev in rec.events)
        assert state.dp_tg_cum == tripped

    def test_accumulators_match_latched_blocks(self):
        cfg = study_config()
        state = initial_state(cfg)
        attack = AttackSignal(0.322)
        prev_sh = prev_tg = 0.0
        for _ in range(40):
            state, _ = simulate_step(state, cfg, attack)
            assert state.dp_sh_cum >= prev_sh and state.dp_tg_cum >= prev_tg
            want_sh = sum(l.p_sh for l, on in
                          zip(cfg.loads, state.load_latches) if on)
            want_tg = sum(g.p_tg for g, on in
                          zip(cfg.generators, state.gen_latches) if on)
            assert state.dp_sh_cum == pytest.approx(want_sh, abs=1e-12)
            assert state.dp_tg_cum == pytest.approx(want_tg, abs=1e-12)
            prev_sh, prev_tg = state.dp_sh_cum, state.dp_tg_cum

    def test_history_window_bounded(self):
        cfg = study_config()
        state = initial_state(cfg)
        for _ in range(20):
            state, _ = simulate_step(state, cfg, AttackSignal(0.01))
            assert len(state.freq_history) <= cfg.params.rocof_window_m + 1


class TestSimulate:
    def test_quiescence(self):
        cfg = study_config()
        trace = simulate(cfg, NO_ATTACK, 2000)
        assert np.all(trace.f_hz == 60.0)
        assert np.all(trace.dp_gov == 0.0)
        assert not trace.events

    def test_case_study_attack_trips_lowest_threshold_relay(self):
        cfg = study_config(kappa=60.0)
        trace = simulate(cfg, AttackSignal(0.322), 12)
        trips = [ev for ev in trace.events if ev.kind is EventKind.ROCOF_TRIP]
        assert any(ev.relay_id == "g4" for ev in trips)

    def test_composition_matches_manual_stepping(self):
        cfg = study_config()
        attack = AttackSignal(0.05)
        trace = simulate(cfg, attack, 30)
        state = initial_state(cfg)
        for i in range(31):
            state, rec = simulate_step(state, cfg, attack)
            assert trace.f_hz[i] == rec.f_hz
            assert trace.dp_gov[i] == rec.dp_gov

    def test_horizon_shorter_than_window_rejected(self):
        with pytest.raises(HorizonTooShort):
            simulate(study_config(), NO_ATTACK, 5)

    def test_droop_steady_state_with_relays_disabled(self):
        # settle time scales with the slow swing-droop pair (~2*H*R), not
        # just the governor lag; simulate long enough for full convergence
        for h, r, t, dp in [(2, 0.2, 0.2, 0.1), (6, 0.6, 0.4, -0.05),
                            (10, 1.0, 1.0, 0.2)]:
            cfg = relays_disabled_config(h=h, r=r, t=t)
            steps = math.ceil(40 * max(2 * h * r, t) / cfg.params.dt)
            trace = simulate(cfg, AttackSignal(dp), steps)
            df_final = trace.f_hz[-1] / 60.0 - 1.0
            assert abs(df_final + r * dp) <= 1e-6

    def test_determinism(self):
        cfg = study_config()
        a = simulate(cfg, AttackSignal(0.2), 200)
        b = simulate(cfg, AttackSignal(0.2), 200)
        assert np.array_equal(a.f_hz, b.f_hz)
        assert a.events == b.events

    def test_attack_step_delays_injection(self):
        cfg = relays_disabled_config()
        trace = simulate(cfg, AttackSignal(0.1, attack_step=10), 30)
        assert np.all(trace.f_hz[:11] == 60.0)
        assert trace.f_hz[11] < 60.0

    def test_rows_increase_and_events_are_ordered(self):
        cfg = study_config(kappa=60.0)
        trace = simulate(cfg, AttackSignal(0.2), 40)
        assert np.all(np.diff(trace.n) == 1)
        steps = [ev.step for ev in trace.events]
        assert steps == sorted(steps)


class TestModeledVariants:
    def test_literal_accumulation_grows_every_step(self):
        cfg = study_config()
        attack = AttackSignal(0.322)
        latched = simulate(cfg, attack, 20)
        literal = simulate(cfg, attack, 20,
                           SimOptions(literal_accumulation=True))
        assert latched.dp_sh_cum[-1] <= 2.0 + 1e-12
        assert latched.dp_tg_cum[-1] <= 3.0 + 1e-12
        assert literal.dp_sh_cum[-1] > latched.dp_sh_cum[-1]
        assert literal.dp_tg_cum[-1] > latched.dp_tg_cum[-1]
        # events still record first operation only
        assert len(literal.events) == len(latched.events)

    def test_literal_signs_make_shedding_depress_frequency(self):
        cfg = study_config()
        attack = AttackSignal(0.322)
        physical = simulate(cfg, attack, 40)
        literal = simulate(cfg, attack, 40, SimOptions(literal_signs=True))
        shed_step = next(ev.step for ev in physical.events
                         if ev.kind is EventKind.LS_SHED)
        assert literal.f_hz[shed_step + 2] < physical.f_hz[shed_step + 2]

    def test_rescaled_inertia_accelerates_the_fall(self):
        cfg = study_config()
        attack = AttackSignal(0.322)
        constant = simulate(cfg, attack, 40)
        rescaled = simulate(cfg, attack, 40, SimOptions(rescale_inertia=True))
        trip_step = next(ev.step for ev in constant.events
                         if ev.kind is EventKind.ROCOF_TRIP)
        assert np.array_equal(constant.f_hz[:trip_step + 1],
                              rescaled.f_hz[:trip_step + 1])
        assert rescaled.f_hz[-1] < constant.f_hz[-1]


class TestScalingProperties:
    def test_pre_event_linearity_and_odd_symmetry(self):
        rng = random.Random(11)
        for _ in range(10):
            cfg = relays_disabled_config(
                h=rng.uniform(2, 10), r=rng.uniform(0.2, 1.0),
                t=rng.uniform(0.2, 1.0))
            a = rng.uniform(0.01, 0.2)
            base = simulate(cfg, AttackSignal(a), 300)
            doubled = simulate(cfg, AttackSignal(2 * a), 300)
            negated = simulate(cfg, AttackSignal(-a), 300)
            # doubling and negating the input are exact float operations, so
            # the stepped deviation matches bitwise
            assert np.array_equal(doubled.delta_f, 2 * base.delta_f)
            assert np.array_equal(negated.delta_f, -base.delta_f)


class TestTraceCsv:
    def test_layout_and_events_column(self, tmp_path):
        cfg = study_config()
        trace = simulate(cfg, AttackSignal(0.322), 10)
        out = tmp_path / "trace.csv"
        write_trace_csv(trace, out)
        lines = out.read_text().splitlines()
        assert lines[0] == TRACE_CSV_HEADER
        assert len(lines) == 12  # header + rows 0..10
        first = lines[1].split(",")
        assert first[0] == "0" and first[3] == ""  # rocof empty before window
        trip_row = lines[7].split(",")
        assert "ROCOF_TRIP:g4" in trip_row[7]
        assert ";" in trip_row[7]  # simultaneous trips joined

    def test_significant_digits(self, tmp_path):
        cfg = study_config()
        trace = simulate(cfg, AttackSignal(0.01), 8)
        out = tmp_path / "trace.csv"
        write_trace_csv(trace, out)
        row = out.read_text().splitlines()[3].split(",")
        # reconstructing the float from the text must be lossless at 12 digits
        assert float(row[2]) == pytest.approx(trace.f_hz[2], rel=1e-11)
