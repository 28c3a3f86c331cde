"""Planar charged-particle motion in multi-bump magnetic fields:
single-bump critical data, transition corridors, Poincare return maps,
itinerary shooting, and entropy lower bounds.
"""

from .field import (
    Bump,
    FieldConfig,
    FieldConfigError,
    RadialProfile,
    config_from_dict,
    config_to_dict,
    constant_disc,
    example_profile,
    load_config,
    piecewise_linear,
    reference_pair,
    reference_triangle,
    shift_profile,
)
from .geometry import (
    Corridor,
    CorridorLine,
    DegenerateCorridorError,
    GeneralPositionReport,
    GeometryError,
    check_general_position,
    corridor,
    transit_distances,
)
from .integrator import (
    DiscPassage,
    Event,
    IntegrationFailure,
    SectionSpec,
    Trajectory,
    default_time_cap,
    flow,
    free_flight,
    integrate_in_disc,
    rk4_passage,
    trajectory_to_csv,
)
from .poincare import (
    CodingResult,
    Itinerary,
    MapResult,
    SectionPoint,
    build_sections,
    entry_to_section_u,
    itinerary_of,
    poincare_map,
    section_to_entry_v,
)
from .shooting import (
    ShiftReport,
    ShootBracket,
    ShootError,
    ShootResult,
    entropy_lower_bound,
    entry_ray_angle,
    shoot_prefix,
    verify_full_shift,
    word_blocks,
)
from .singlebump import (
    BumpAnalysis,
    EnergyAnalysis,
    EnergyDomainError,
    ParticleState,
    circular_radii,
    critical_momentum,
    energy,
    energy_threshold,
    entry_state,
    escape_delta,
    magnetic_momentum,
    tangent_momentum,
    theta_rate_bound,
)

__version__ = "0.1.0"
