import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from magbumps import (
    Bump,
    DegenerateCorridorError,
    EnergyAnalysis,
    FieldConfig,
    ParticleState,
    check_general_position,
    corridor,
    free_flight,
    magnetic_momentum,
    reference_triangle,
    shift_profile,
    transit_distances,
)
from magbumps.geometry import line_with_signed_distances


class TestSignedDistanceLines:
    def test_parallel_equal_distances(self):
        ck, cl = np.array([0.0, 0.0]), np.array([6.0, 0.0])
        line = line_with_signed_distances(ck, cl, 1.0, 1.0)
        assert np.allclose(line.direction, [1.0, 0.0])
        assert line.signed_distance(ck) == pytest.approx(1.0, abs=1e-14)
        assert line.signed_distance(cl) == pytest.approx(1.0, abs=1e-14)

    def test_mixed_distances(self):
        ck, cl = np.array([0.0, 0.0]), np.array([6.0, 0.0])
        line = line_with_signed_distances(ck, cl, -1.0, -0.946)
        assert line.signed_distance(ck) == pytest.approx(-1.0, abs=1e-12)
        assert line.signed_distance(cl) == pytest.approx(-0.946, abs=1e-12)

    def test_too_close_centers_rejected(self):
        ck, cl = np.array([0.0, 0.0]), np.array([1.0, 0.0])
        with pytest.raises(Exception):
            line_with_signed_distances(ck, cl, 2.0, -2.0)

    @given(
        dx=st.floats(min_value=3.0, max_value=50.0),
        dy=st.floats(min_value=-20.0, max_value=20.0),
        dk=st.floats(min_value=-1.0, max_value=1.0),
        dl=st.floats(min_value=-1.0, max_value=1.0),
    )
    def test_requested_distances_realized(self, dx, dy, dk, dl):
        ck = np.array([0.0, 0.0])
        cl = np.array([dx, dy])
        assume(np.hypot(dx, dy) > abs(dk - dl) + 1e-6)
        line = line_with_signed_distances(ck, cl, dk, dl)
        assert line.signed_distance(ck) == pytest.approx(dk, abs=1e-9)
        assert line.signed_distance(cl) == pytest.approx(dl, abs=1e-9)
        assert np.hypot(*line.direction) == pytest.approx(1.0)


class TestCorridor:
    def test_transit_distances(self, pair_config, pair_analysis):
        d_tan, d_crit = transit_distances(pair_analysis, pair_config, 0)
        assert d_tan == pytest.approx(-1.0)
        assert d_crit == pytest.approx(pair_analysis.records[0].i_plus)

    def test_same_sign_lines(self, pair_config, pair_analysis):
        cor = corridor(pair_analysis, pair_config, 0, 1)
        iplus = pair_analysis.records[0].i_plus
        for c in (pair_config.bumps[0].center, pair_config.bumps[1].center):
            assert cor.line_tangent_side.signed_distance(c) == \
                pytest.approx(-1.0, abs=1e-12)
            assert cor.line_critical_side.signed_distance(c) == \
                pytest.approx(iplus, abs=1e-12)
        assert not cor.mirror_case

    def test_mixed_sign_lines(self):
        prof = shift_profile()
        cfg = FieldConfig((
            Bump(np.array([0.0, 0.0]), prof),
            Bump(np.array([6.0, 0.0]), prof.scaled(-1.0)),
        ))
        ana = EnergyAnalysis.of(cfg, 0.5)
        cor = corridor(ana, cfg, 0, 1)
        assert not cor.mirror_case  # only flagged when the first sign is -1
        assert corridor(ana, cfg, 1, 0).mirror_case
        dk = cor.line_tangent_side.signed_distance(cfg.bumps[0].center)
        dl = cor.line_tangent_side.signed_distance(cfg.bumps[1].center)
        # tangent for the positive-sign disc pairs with critical for the
        # negative-sign disc
        assert dk == pytest.approx(-1.0, abs=1e-12)
        assert dl == pytest.approx(ana.records[1].i_plus, abs=1e-12)

    def test_arcs_lie_on_their_discs(self, pair_config, pair_analysis):
        cor = corridor(pair_analysis, pair_config, 0, 1)
        assert 0.0 < cor.arc_exit.width < math.pi
        assert 0.0 < cor.arc_entry.width < math.pi

    def test_critical_line_carries_critical_momentum(self, pair_config,
                                                     pair_analysis):
        # dynamic check: a unit-speed trajectory riding the critical-side
        # line has the critical momentum at the target bump
        cor = corridor(pair_analysis, pair_config, 0, 1)
        line = cor.line_critical_side
        state = ParticleState(q=line.point.copy(),
                              v=line.direction * pair_analysis.speed)
        I = magnetic_momentum(pair_config.bumps[1], state)
        assert I == pytest.approx(pair_analysis.records[1].i_plus,
                                  abs=1e-12)

    def test_tangent_line_misses_disc(self, pair_config, pair_analysis):
        cor = corridor(pair_analysis, pair_config, 0, 1)
        line = cor.line_tangent_side
        # nudge the launch point off the target disc so the graze does not
        # register as an entry
        q0 = line.point - 10.0 * line.direction
        state = ParticleState(q=q0, v=line.direction)
        I = magnetic_momentum(pair_config.bumps[1], state)
        assert abs(I) == pytest.approx(1.0, abs=1e-12)  # |d| = R


class TestGeneralPosition:
    def test_reference_triangle_accepted(self, triangle_config,
                                         triangle_analysis):
        rep = check_general_position(triangle_analysis, triangle_config)
        assert rep.holds
        assert not rep.violations
        assert sorted(rep.anchor_angles) == [0, 1, 2]
        for k, arcs in rep.free_arcs.items():
            assert arcs and all(a.width > 0.0 for a in arcs)

    def test_shrunken_triangle_rejected(self):
        cfg = reference_triangle(side=2.2)
        ana = EnergyAnalysis.of(cfg, 0.5)
        rep = check_general_position(ana, cfg)
        assert not rep.holds
        cond1 = [v for v in rep.violations if v.condition == 1]
        assert cond1
        w = np.asarray(cond1[0].witness)
        # the witness point of a corridor-hull incursion lies inside the
        # offending third disc
        k3 = cond1[0].indices[2]
        assert np.hypot(*(w - cfg.bumps[k3].center)) < 1.0 + 1e-6

    def test_report_dict_shape(self, triangle_config, triangle_analysis):
        rep = check_general_position(triangle_analysis, triangle_config)
        d = rep.to_dict()
        assert d["holds"] is True
        assert set(d) >= {"holds", "violations", "anchors", "arcs"}
