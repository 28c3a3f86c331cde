import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magbumps import (
    IntegrationFailure,
    ParticleState,
    SectionSpec,
    critical_momentum,
    default_time_cap,
    energy,
    entry_state,
    flow,
    free_flight,
    integrate_in_disc,
    magnetic_momentum,
    rk4_passage,
    tangent_momentum,
    trajectory_to_csv,
)
from tests.conftest import I_PLUS, R_PLUS


def _entries(bump, n, seed, lo_frac=0.05, hi_margin=1e-2):
    rng = np.random.default_rng(seed)
    i_tan = tangent_momentum(bump, 0.5, +1)
    iplus, _, _ = critical_momentum(bump, 0.5)
    for _ in range(n):
        phi = rng.uniform(-math.pi, math.pi)
        I = rng.uniform(i_tan + lo_frac * (iplus - i_tan), iplus - hi_margin)
        yield entry_state(bump, 0.5, phi, I)


class TestDiscPassage:
    def test_exit_lands_on_boundary(self, bump):
        for state in _entries(bump, 5, seed=1):
            p = integrate_in_disc(bump, state, T_max=50.0)
            assert p.status == "exit"
            r = np.hypot(*p.final_state.q)
            assert abs(r - 1.0) < 1e-10

    def test_conservation_through_passage(self, bump):
        for state in _entries(bump, 10, seed=2):
            p = integrate_in_disc(bump, state, T_max=50.0)
            out = p.final_state
            assert abs(energy(out) - 0.5) < 1e-9 * 0.5
            drift = abs(magnetic_momentum(bump, out)
                        - magnetic_momentum(bump, state))
            assert drift < 1e-9

    def test_clockwise_winding_for_positive_field(self, bump):
        # a deep near-critical entry makes several revolutions; positive
        # field means clockwise, so the accumulated angle is negative
        state = entry_state(bump, 0.5, 0.0, I_PLUS - 1e-8)
        p = integrate_in_disc(bump, state, T_max=50.0)
        assert p.winding < -2.0 * math.pi

    def test_subcritical_orbit_stays_outside_r_plus(self, bump):
        state = entry_state(bump, 0.5, 1.0, I_PLUS - 1e-3)
        p = integrate_in_disc(bump, state, T_max=50.0, record=True)
        radii = [np.hypot(*s.q) for _, s in p.samples]
        assert min(radii) > R_PLUS

    def test_near_critical_capture_at_time_cap(self, bump):
        state = entry_state(bump, 0.5, 1.0, I_PLUS - 1e-13)
        p = integrate_in_disc(bump, state, T_max=5.0)
        assert p.status == "captured"

    def test_grazing_tangent_exits_immediately(self, bump):
        state = entry_state(bump, 0.5, 0.3, tangent_momentum(bump, 0.5, +1))
        p = integrate_in_disc(bump, state, T_max=50.0)
        assert p.status == "exit"
        assert p.duration < 1e-3

    def test_zero_speed_rejected(self, bump):
        state = ParticleState(q=np.array([0.5, 0.0]),
                              v=np.array([0.0, 0.0]))
        with pytest.raises(IntegrationFailure):
            integrate_in_disc(bump, state)


class TestSectionEvents:
    def test_crossings_recorded_with_lambda_in_range(self, bump):
        section = SectionSpec(u=np.array([-1.0, 0.0]))
        state = entry_state(bump, 0.5, -1.5, I_PLUS - 1e-6)
        p = integrate_in_disc(bump, state, section=section, T_max=50.0)
        hits = [e for e in p.events if e.kind == "cross_section"]
        assert p.section_hits == len(hits) > 0
        for e in hits:
            assert 1e-9 < e.lam < 1.0 - 1e-9
            assert e.direction in (-1, 1)

    def test_hit_cap_stops_passage(self, bump):
        section = SectionSpec(u=np.array([-1.0, 0.0]))
        state = entry_state(bump, 0.5, -1.5, I_PLUS - 1e-9)
        p = integrate_in_disc(bump, state, section=section, T_max=100.0,
                              max_section_hits=1)
        assert p.status == "section_stop"
        assert p.section_hits == 1

    def test_section_t_min_skips_departure_crossing(self, bump):
        # a state sitting on the section ray is not its own first return
        section = SectionSpec(u=np.array([1.0, 0.0]))
        q = np.array([0.95, 0.0])
        v = np.array([0.0, -1.0])
        state = ParticleState(q=q, v=v)
        p = integrate_in_disc(bump, state, section=section, T_max=30.0,
                              section_t_min=1e-6)
        for e in p.events:
            if e.kind == "cross_section":
                assert e.t > 1e-6


class TestFreeFlight:
    def test_entry_point_on_target_circle(self, pair_config):
        state = ParticleState(q=np.array([3.0, 0.5]),
                              v=np.array([1.0, -0.1]))
        ev = free_flight(pair_config, state)
        assert ev.kind == "enter_disc"
        assert ev.k == 1
        r = np.hypot(*(ev.state.q - pair_config.bumps[1].center))
        assert r == pytest.approx(1.0, abs=1e-12)

    def test_miss_escapes(self, pair_config):
        state = ParticleState(q=np.array([3.0, 2.0]),
                              v=np.array([0.0, 1.0]))
        ev = free_flight(pair_config, state)
        assert ev.kind == "escape"
        assert np.hypot(*ev.state.q) >= pair_config.escape_radius() - 1e-9

    def test_departing_boundary_not_reentered(self, pair_config):
        q = np.array([1.0, 0.0])
        state = ParticleState(q=q, v=np.array([1.0, 0.0]))
        ev = free_flight(pair_config, state)
        assert ev.kind == "enter_disc"
        assert ev.k == 1


class TestFlow:
    def test_alternates_and_escapes(self, pair_config, pair_analysis):
        state = entry_state(pair_config.bumps[0], 0.5, -math.pi / 2.0,
                            -0.9)
        traj = flow(pair_config, state, T_max=200.0, record=True)
        kinds = [e.kind for e in traj.events]
        assert "exit_disc" in kinds
        assert kinds[-1] in ("escape", "time_cap")

    def test_time_cap_reported(self, pair_config):
        state = entry_state(pair_config.bumps[0], 0.5, 1.0,
                            I_PLUS)  # supercritical for the scaled profile
        traj = flow(pair_config, state, T_max=3.0)
        assert traj.events[-1].kind in ("time_cap", "escape", "exit_disc")

    def test_default_time_cap_scale(self, pair_config):
        T = default_time_cap(pair_config, 0.5)
        assert T > 100.0


class TestOracle:
    def test_rk4_matches_adaptive(self, bump):
        for state in _entries(bump, 3, seed=3):
            p = integrate_in_disc(bump, state, T_max=50.0)
            status, t, out = rk4_passage(bump, state, h=1e-5, T_max=50.0)
            assert status == "exit"
            assert np.hypot(*(out.q - p.final_state.q)) < 1e-6


class TestCsv:
    def test_roundtrip_parse(self, pair_config, tmp_path):
        state = entry_state(pair_config.bumps[0], 0.5, -1.2, -0.9)
        traj = flow(pair_config, state, T_max=60.0, record=True)
        path = tmp_path / "traj.csv"
        trajectory_to_csv(traj, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,qx,qy,vx,vy,event"
        ts = [float(l.split(",")[0]) for l in lines[1:]]
        assert ts == sorted(ts)
        assert len(ts) == len(traj.samples) + len(traj.events)
