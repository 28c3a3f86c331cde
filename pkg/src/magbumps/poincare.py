"""Poincare sections on radial segments at the free-arc anchors, the first
return map, the entry/section transfer maps, and finite itinerary coding.

Symbols in an Itinerary are 1-based (word over {1, ..., n}); bump indices
everywhere else are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .field import FieldConfig
from .geometry import GeneralPositionReport
from .integrator import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    SectionSpec,
    Trajectory,
    default_time_cap,
    flow,
)
from .singlebump import EnergyAnalysis, ParticleState, energy

LAM_EDGE = 1e-9


class SectionDomainError(ValueError):
    pass


@dataclass(frozen=True)
class SectionPoint:
    """A transversal crossing of the radial section segment of disc k.

    Position is q = c_k + lam * R_k * u_k with u_k the unit anchor
    direction; direction is the sign of cross(q - c_k, v).
    """

    k: int
    lam: float
    v: np.ndarray
    direction: int
    t: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "v", v)
        v.setflags(write=False)
        if not LAM_EDGE <= self.lam <= 1.0 - LAM_EDGE:
            raise SectionDomainError(f"lambda {self.lam} outside the open segment")
        if self.direction not in (-1, 1):
            raise SectionDomainError("crossing direction must be +-1")


@dataclass(frozen=True)
class Itinerary:
    word: tuple
    kind: str = "finite"  # finite | periodic

    def __post_init__(self):
        word = tuple(int(s) for s in self.word)
        object.__setattr__(self, "word", word)
        if not word:
            raise ValueError("empty itinerary")
        if any(s < 1 for s in word):
            raise ValueError("symbols are 1-based bump labels")
        if self.kind not in ("finite", "periodic"):
            raise ValueError(f"unknown itinerary kind {self.kind!r}")

    def __len__(self):
        return len(self.word)

    def validate_against(self, config: FieldConfig):
        n = len(config.bumps)
        if any(s > n for s in self.word):
            raise ValueError(f"symbol out of range for {n} bumps: {self.word}")

    def repeated_to(self, length: int) -> "Itinerary":
        if self.kind != "periodic":
            return self
        reps = -(-length // len(self.word))
        return Itinerary(self.word * reps, "finite")


def build_sections(config: FieldConfig,
                   report: GeneralPositionReport) -> dict:
    """One radial section per bump, aimed at the anchor on the free arc."""
    if not report.holds:
        raise SectionDomainError("general position fails; no section anchors")
    out = {}
    for k in range(len(config.bumps)):
        phi = report.anchor_angles[k]
        out[k] = SectionSpec(u=np.array([math.cos(phi), math.sin(phi)]))
    return out


def section_state(config: FieldConfig, sections: dict,
                  x: SectionPoint) -> ParticleState:
    b = config.bumps[x.k]
    q = b.center + x.lam * b.support_radius * sections[x.k].u
    return ParticleState(q=q, v=x.v, t=x.t)


def _point_from_event(ev) -> SectionPoint:
    return SectionPoint(k=ev.k, lam=ev.lam, v=ev.state.v,
                        direction=ev.direction, t=ev.t)


@dataclass
class MapResult:
    status: str  # 'section' | 'escape' | 'captured'
    point: SectionPoint | None = None
    return_time: float | None = None
    trajectory: Trajectory | None = None


def _first_section_stop(config, state, sections, T_max, *, t_min,
                        rtol, atol, record) -> MapResult:
    traj = flow(
        config, state, sections=sections, T_max=T_max,
        max_total_section_hits=1, first_section_t_min=t_min,
        rtol=rtol, atol=atol, record=record,
    )
    rec = traj if record else None
    for ev in traj.events:
        if ev.kind == "cross_section":
            return MapResult("section", _point_from_event(ev),
                             ev.t - state.t, rec)
        if ev.kind == "escape":
            return MapResult("escape", None, ev.t - state.t, rec)
    return MapResult("captured", None, T_max, rec)


def poincare_map(config: FieldConfig, analysis: EnergyAnalysis,
                 sections: dict, x: SectionPoint,
                 T_max: float | None = None, *,
                 rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                 record: bool = False) -> MapResult:
    """First transversal section crossing strictly after x, on any section."""
    state = section_state(config, sections, x)
    if T_max is None:
        T_max = default_time_cap(config, energy(state))
    # exclude the departure crossing itself, not any genuine return
    t_min = 1e-6 * config.bumps[x.k].support_radius / state.speed
    return _first_section_stop(config, state, sections, T_max,
                               t_min=t_min, rtol=rtol, atol=atol,
                               record=record)


def entry_to_section_u(config: FieldConfig, analysis: EnergyAnalysis,
                       sections: dict, state: ParticleState,
                       T_max: float | None = None, *,
                       rtol: float = DEFAULT_RTOL,
                       atol: float = DEFAULT_ATOL,
                       record: bool = False) -> MapResult:
    """First section crossing after an inward boundary state; escape -> none."""
    if T_max is None:
        T_max = default_time_cap(config, energy(state))
    return _first_section_stop(config, state, sections, T_max,
                               t_min=0.0, rtol=rtol, atol=atol,
                               record=record)


@dataclass
class TransferResult:
    status: str  # 'entry' | 'escape' | 'captured'
    k: int | None = None
    state: ParticleState | None = None
    transfer_time: float | None = None


def section_to_entry_v(config: FieldConfig, analysis: EnergyAnalysis,
                       sections: dict, x: SectionPoint,
                       T_max: float | None = None, *,
                       rtol: float = DEFAULT_RTOL,
                       atol: float = DEFAULT_ATOL) -> TransferResult:
    """Flow forward to the next inward boundary crossing of any support disc."""
    state = section_state(config, sections, x)
    if T_max is None:
        T_max = default_time_cap(config, energy(state))
    traj = flow(config, state, sections={}, T_max=T_max,
                stop_on_disc_entry=True, rtol=rtol, atol=atol)
    for ev in traj.events:
        if ev.kind == "enter_disc":
            return TransferResult("entry", ev.k, ev.state, ev.t - state.t)
        if ev.kind == "escape":
            return TransferResult("escape")
    return TransferResult("captured")


@dataclass
class CodingResult:
    word: tuple = ()
    terminal: str = "complete"  # complete | escape | captured
    return_times: list = field(default_factory=list)
    points: list = field(default_factory=list)

    @property
    def itinerary(self) -> Itinerary:
        return Itinerary(tuple(s + 1 for s in self.word))


def itinerary_of(config: FieldConfig, analysis: EnergyAnalysis,
                 sections: dict, x: SectionPoint, L: int,
                 T_max: float | None = None, *,
                 rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL) -> CodingResult:
    """Record the bump indices of x, p(x), ..., p^{L-1}(x); stop early on
    escape or capture.  Word entries are 0-based bump indices.
    """
    if L < 1:
        raise ValueError("need L >= 1")
    word = [x.k]
    points = [x]
    times = []
    cur = x
    for _ in range(L - 1):
        res = poincare_map(config, analysis, sections, cur, T_max,
                           rtol=rtol, atol=atol)
        if res.status != "section":
            return CodingResult(tuple(word), res.status, times, points)
        word.append(res.point.k)
        points.append(res.point)
        times.append(res.return_time)
        cur = res.point
    return CodingResult(tuple(word), "complete", times, points)
