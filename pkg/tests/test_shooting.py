import math

import numpy as np
import pytest

from magbumps import (
    Itinerary,
    entropy_lower_bound,
    magnetic_momentum,
    shoot_prefix,
    verify_full_shift,
    word_blocks,
)
from magbumps.shooting import ShootError


class TestWordBlocks:
    def test_runs(self):
        assert word_blocks((0, 0, 1, 1, 1, 0)) == [(0, 2), (1, 3), (0, 1)]
        assert word_blocks((2,)) == [(2, 1)]
        assert word_blocks(()) == []


class TestShootPrefix:
    def test_alternating_word(self, pair_config, pair_analysis,
                              pair_sections):
        report, sections = pair_sections
        res = shoot_prefix(pair_config, pair_analysis, sections, report,
                           Itinerary((1, 2)))
        assert res.verified
        assert res.word.word == (1, 2)
        assert 0.0 < res.bracket_width < 1e-3
        assert res.coding.word == (0, 1)

    def test_repeated_block(self, pair_config, pair_analysis,
                            pair_sections):
        report, sections = pair_sections
        res = shoot_prefix(pair_config, pair_analysis, sections, report,
                           Itinerary((1, 1, 2)))
        assert res.verified
        assert res.coding.word == (0, 0, 1)

    def test_constant_word(self, pair_config, pair_analysis, pair_sections):
        report, sections = pair_sections
        res = shoot_prefix(pair_config, pair_analysis, sections, report,
                           Itinerary((2,)))
        assert res.verified
        assert res.coding.word == (1,)

    def test_bracket_nesting(self, pair_config, pair_analysis,
                             pair_sections):
        report, sections = pair_sections
        res = shoot_prefix(pair_config, pair_analysis, sections, report,
                           Itinerary((1, 2, 1)))
        assert res.brackets
        widths = [b.width for b in res.brackets]
        assert all(w > 0.0 for w in widths)
        # each refinement stage shrinks or keeps the bracket
        for a, b in zip(widths, widths[1:]):
            assert b <= a * (1.0 + 1e-12)

    def test_entry_momentum_inside_window(self, pair_config, pair_analysis,
                                          pair_sections):
        report, sections = pair_sections
        res = shoot_prefix(pair_config, pair_analysis, sections, report,
                           Itinerary((2, 1)))
        k0 = 1
        i_tan = pair_analysis.tangent_momentum(k0, pair_config)
        i_plus = pair_analysis.records[k0].i_plus
        lo, hi = sorted((i_tan, i_plus))
        assert lo < res.entry_momentum < hi
        I = magnetic_momentum(pair_config.bumps[k0], res.entry_state)
        assert I == pytest.approx(res.entry_momentum, abs=1e-12)

    def test_invalid_symbol_rejected(self, pair_config, pair_analysis,
                                     pair_sections):
        report, sections = pair_sections
        with pytest.raises(ValueError):
            shoot_prefix(pair_config, pair_analysis, sections, report,
                         Itinerary((1, 3)))

    def test_return_times_positive(self, pair_config, pair_analysis,
                                   pair_sections):
        report, sections = pair_sections
        res = shoot_prefix(pair_config, pair_analysis, sections, report,
                           Itinerary((1, 2, 2)))
        assert res.verified
        assert len(res.return_times) == 2
        assert all(t > 0.0 for t in res.return_times)


class TestFullShift:
    def test_pair_length_two(self, pair_config, pair_analysis,
                             pair_sections):
        report, sections = pair_sections
        rep = verify_full_shift(pair_config, pair_analysis, sections,
                                report, 2)
        assert rep.complete
        assert rep.realized == rep.total == 4
        assert not rep.failures
        assert rep.max_return_time > 0.0

    def test_length_one(self, pair_config, pair_analysis, pair_sections):
        report, sections = pair_sections
        rep = verify_full_shift(pair_config, pair_analysis, sections,
                                report, 1)
        assert rep.realized == rep.total == 2


class TestEntropy:
    def test_formula(self, pair_config, pair_analysis):
        h, c = entropy_lower_bound(pair_config, pair_analysis, [2.0, 5.0])
        assert h == pytest.approx(math.log(2) / 5.0)
        assert c == pytest.approx(5.0 * math.sqrt(0.5))

    def test_single_bump_gives_zero(self, single_config):
        from magbumps import EnergyAnalysis

        ana = EnergyAnalysis.of(single_config, 0.5)
        h, _ = entropy_lower_bound(single_config, ana, [3.0])
        assert h == 0.0

    def test_empty_times_rejected(self, pair_config, pair_analysis):
        with pytest.raises(ValueError):
            entropy_lower_bound(pair_config, pair_analysis, [])
