import numpy as np
import pytest
from hypothesis import settings

from magbumps import (
    Bump,
    EnergyAnalysis,
    FieldConfig,
    build_sections,
    check_general_position,
    example_profile,
    reference_pair,
    reference_triangle,
)

settings.register_profile("ci", deadline=None, max_examples=25)
settings.load_profile("ci")

# closed-form values for B(r) = 10(1 - r), E = 1/2:
#   |B(r)| r = 1  =>  10 r (1 - r) = 1, roots (1 -+ sqrt(0.6)) / 2
R_PLUS = (1.0 + np.sqrt(0.6)) / 2.0
R_MINUS = (1.0 - np.sqrt(0.6)) / 2.0
# I+ = -R+ sqrt(2E) - F(R+), with F(r) = 10 (r^2/2 - r^3/3) evaluated
# between r and 1
F_RPLUS = 10.0 * ((0.5 - 1.0 / 3.0) - (R_PLUS ** 2 / 2.0 - R_PLUS ** 3 / 3.0))
I_PLUS = -R_PLUS - F_RPLUS


@pytest.fixture(scope="session")
def bump():
    return Bump(np.array([0.0, 0.0]), example_profile())


@pytest.fixture(scope="session")
def single_config(bump):
    return FieldConfig((bump,))


@pytest.fixture(scope="session")
def pair_config():
    return reference_pair()


@pytest.fixture(scope="session")
def pair_analysis(pair_config):
    return EnergyAnalysis.of(pair_config, 0.5)


@pytest.fixture(scope="session")
def pair_sections(pair_config, pair_analysis):
    report = check_general_position(pair_analysis, pair_config)
    assert report.holds
    return report, build_sections(pair_config, report)


@pytest.fixture(scope="session")
def pair_shoot_12(pair_config, pair_analysis, pair_sections):
    from magbumps import Itinerary, entry_to_section_u, shoot_prefix

    report, sections = pair_sections
    res = shoot_prefix(pair_config, pair_analysis, sections, report,
                       Itinerary((1, 2)))
    hit = entry_to_section_u(pair_config, pair_analysis, sections,
                             res.entry_state)
    assert hit.status == "section"
    return hit.point


@pytest.fixture(scope="session")
def pair_shoot_1212(pair_config, pair_analysis, pair_sections):
    from magbumps import Itinerary, entry_to_section_u, shoot_prefix

    report, sections = pair_sections
    res = shoot_prefix(pair_config, pair_analysis, sections, report,
                       Itinerary((1, 2, 1, 2)))
    hit = entry_to_section_u(pair_config, pair_analysis, sections,
                             res.entry_state)
    assert hit.status == "section"
    return hit.point


@pytest.fixture(scope="session")
def triangle_config():
    return reference_triangle()


@pytest.fixture(scope="session")
def triangle_analysis(triangle_config):
    return EnergyAnalysis.of(triangle_config, 0.5)
