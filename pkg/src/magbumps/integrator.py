"""Trajectory propagation: exact free flight outside all supports, adaptive
Runge-Kutta with event detection inside a disc, and the alternating flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rk
from .field import Bump, FieldConfig
from .singlebump import ParticleState, energy

DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-14
MIN_STEP = 1e-13
ENERGY_DRIFT_LIMIT = 1e-8
_EV_CAP = 1 << 17
_STEP_CAP = 1 << 17


class IntegrationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Event:
    kind: str  # enter_disc, exit_disc, cross_section, section_reject,
    #            turning_point, escape, time_cap
    t: float
    state: ParticleState
    k: int | None = None
    lam: float | None = None
    direction: int | None = None


@dataclass(frozen=True)
class SectionSpec:
    """Radial Poincare section of disc k: q = c_k + lam * R_k * u, lam in (0,1)."""

    u: np.ndarray  # unit vector from the center toward the anchor q_k*
    lam_lo: float = 1e-9
    lam_hi: float = 1.0 - 1e-9

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u / np.hypot(u[0], u[1]))
        self.u.setflags(write=False)


@dataclass(frozen=True)
class ExitRecord:
    entry_state: ParticleState
    exit_state: ParticleState
    exit_time: float
    winding: float
    section_hits: int


@dataclass
class DiscPassage:
    """Result of integrating one stay inside a support disc."""

    status: str  # 'exit' | 'captured' | 'section_stop'
    bump_index: int | None
    entry_state: ParticleState
    final_state: ParticleState
    duration: float
    winding: float
    section_hits: int
    events: list = field(default_factory=list)
    samples: list = field(default_factory=list)  # (t, ParticleState)

    @property
    def exit_record(self) -> ExitRecord:
        if self.status != "exit":
            raise IntegrationFailure("passage did not exit the disc")
        return ExitRecord(
            entry_state=self.entry_state,
            exit_state=self.final_state,
            exit_time=self.duration,
            winding=self.winding,
            section_hits=self.section_hits,
        )


@dataclass
class Trajectory:
    samples: list = field(default_factory=list)  # (t, ParticleState)
    events: list = field(default_factory=list)

    def append_sample(self, t, state):
        self.samples.append((t, state))


def default_time_cap(config: FieldConfig, E: float) -> float:
    rmax = max(b.support_radius for b in config.bumps)
    return 1e3 * 2.0 * math.pi * rmax / math.sqrt(2.0 * E)


def _state_from_y(y, t, q0=None) -> ParticleState:
    return ParticleState(q=np.array([y[0], y[1]]), v=np.array([y[2], y[3]]), t=t)


def integrate_in_disc(
    bump: Bump,
    state: ParticleState,
    section: SectionSpec | None = None,
    T_max: float = 1e4,
    *,
    bump_index: int | None = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    max_section_hits: int = 0,
    section_t_min: float = 0.0,
    record: bool = False,
    t0: float = 0.0,
) -> DiscPassage:
    """Propagate from a state on/inside the disc until exit, the section-hit
    cap, or T_max ('captured').  Events carry absolute times t0 + dt.
    """
    R = bump.support_radius
    speed = state.speed
    if speed <= 0.0:
        raise IntegrationFailure("zero-speed state")
    nodes = bump.profile.nodes
    y0 = np.array([state.q[0], state.q[1], state.v[0], state.v[1], 0.0])
    ev_kind = np.empty(_EV_CAP, dtype=np.int64)
    ev_t = np.empty(_EV_CAP)
    ev_y = np.empty((_EV_CAP, 5))
    st_cap = _STEP_CAP if record else 1
    st_t = np.empty(st_cap)
    st_y = np.empty((st_cap, 5))
    y_end = np.empty(5)
    if section is not None:
        sect_on, sux, suy = True, float(section.u[0]), float(section.u[1])
        lam_lo, lam_hi = section.lam_lo, section.lam_hi
    else:
        sect_on, sux, suy, lam_lo, lam_hi = False, 1.0, 0.0, 0.0, 1.0
    trans_tol = 1e-10 * R * speed
    hmax = 0.15 * R / speed

    status, nev, nst, t_end, n_hits = _rk.integrate_disc_core(
        y0, 0.0, T_max,
        float(bump.center[0]), float(bump.center[1]),
        np.ascontiguousarray(nodes[:, 0]), np.ascontiguousarray(nodes[:, 1]), R,
        rtol, atol, MIN_STEP, hmax,
        sect_on, sux, suy, lam_lo, lam_hi, trans_tol, max_section_hits,
        section_t_min,
        ev_kind, ev_t, ev_y, record, st_t, st_y, y_end,
    )
    if status == _rk.ST_STEPFAIL:
        raise IntegrationFailure("step size floor reached inside disc")
    if status == _rk.ST_OVERFLOW:
        raise IntegrationFailure("event buffer overflow inside disc")

    e_end = 0.5 * (y_end[2] ** 2 + y_end[3] ** 2)
    e0 = energy(state)
    if abs(e_end - e0) > ENERGY_DRIFT_LIMIT * max(e0, 1e-300):
        raise IntegrationFailure(
            f"energy drift {abs(e_end - e0) / e0:.3e} beyond tolerance"
        )

    kind_names = {
        _rk.EV_EXIT: "exit_disc",
        _rk.EV_SECTION: "cross_section",
        _rk.EV_TURN: "turning_point",
        _rk.EV_SECTION_REJECT: "section_reject",
    }
    events = []
    for j in range(nev):
        y = ev_y[j]
        st = _state_from_y(y, t0 + ev_t[j])
        lam = None
        direction = None
        if ev_kind[j] in (_rk.EV_SECTION, _rk.EV_SECTION_REJECT):
            d = st.q - bump.center
            lam = float((sux * d[0] + suy * d[1]) / R)
            cr = d[0] * st.v[1] - d[1] * st.v[0]
            direction = 1 if cr > 0 else -1
        events.append(
            Event(kind=kind_names[int(ev_kind[j])], t=t0 + ev_t[j], state=st,
                  k=bump_index, lam=lam, direction=direction)
        )
    samples = []
    if record:
        for j in range(nst):
            samples.append((t0 + st_t[j], _state_from_y(st_y[j], t0 + st_t[j])))

    status_name = {
        _rk.ST_EXIT: "exit",
        _rk.ST_TIMECAP: "captured",
        _rk.ST_SECT_STOP: "section_stop",
    }[status]
    return DiscPassage(
        status=status_name,
        bump_index=bump_index,
        entry_state=state,
        final_state=_state_from_y(y_end, t0 + t_end),
        duration=t_end,
        winding=float(y_end[4]),
        section_hits=n_hits,
        events=events,
        samples=samples,
    )


def free_flight(
    config: FieldConfig,
    state: ParticleState,
    escape_radius: float | None = None,
    t0: float = 0.0,
) -> Event:
    """Exact straight-line flight to the earliest disc entry or escape."""
    if escape_radius is None:
        escape_radius = config.escape_radius()
    q, v = state.q, state.v
    v2 = float(v @ v)
    if v2 <= 0.0:
        raise IntegrationFailure("zero-speed state")
    speed = math.sqrt(v2)
    best_t = math.inf
    best_k = None
    for k, b in enumerate(config.bumps):
        R = b.support_radius
        p = q - b.center
        pv = float(p @ v)
        c = float(p @ p) - R * R
        if abs(c) < 1e-9 * R * R and pv >= -1e-9 * R * speed:
            continue  # departing from this disc's boundary (incl. grazing)
        disc = pv * pv - v2 * c
        if disc <= 0.0:
            continue
        sq = math.sqrt(disc)
        t_in = (-pv - sq) / v2
        if t_in > 1e-12 * R / speed and t_in < best_t:
            best_t = t_in
            best_k = k
    if best_k is not None:
        qn = q + best_t * v
        return Event(kind="enter_disc", t=t0 + best_t,
                     state=ParticleState(q=qn, v=v, t=t0 + best_t), k=best_k)
    # escape circle about the origin
    pv = float(q @ v)
    c = float(q @ q) - escape_radius * escape_radius
    if c >= 0.0:
        return Event(kind="escape", t=t0, state=state)
    disc = pv * pv - v2 * c
    t_esc = (-pv + math.sqrt(disc)) / v2
    qn = q + t_esc * v
    return Event(kind="escape", t=t0 + t_esc,
                 state=ParticleState(q=qn, v=v, t=t0 + t_esc))


def flow(
    config: FieldConfig,
    state: ParticleState,
    *,
    sections: dict | None = None,
    T_max: float | None = None,
    escape_radius: float | None = None,
    max_total_section_hits: int = 0,
    stop_on_disc_entry: bool = False,
    first_section_t_min: float = 0.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    record: bool = False,
) -> Trajectory:
    """Alternate free flight and in-disc integration until a stop condition.

    sections maps bump index -> SectionSpec.  Stop conditions: escape,
    time cap, the n-th valid section crossing, or the first disc entry.
    """
    if T_max is None:
        T_max = default_time_cap(config, energy(state))
    if escape_radius is None:
        escape_radius = config.escape_radius()
    sections = sections or {}
    traj = Trajectory()
    t = float(state.t)
    t_start = t
    cur = state
    hits = 0
    first_disc = True
    stalls = 0
    traj.append_sample(t, cur)
    while t - t_start < T_max:
        k = config.disc_containing(cur.q, pad=1e-12)
        on_boundary_out = False
        if k is not None:
            b = config.bumps[k]
            d = cur.q - b.center
            spd = float(np.hypot(cur.v[0], cur.v[1]))
            # a grazing exit can leave d.v a rounding error below zero;
            # treat it as outward or the loop re-enters with a zero chord
            if (abs(np.hypot(d[0], d[1]) - b.support_radius)
                    < 1e-9 * b.support_radius
                    and float(d @ cur.v) >= -1e-9 * b.support_radius * spd):
                on_boundary_out = True
        if k is None or on_boundary_out:
            ev = free_flight(config, cur, escape_radius, t0=t)
            traj.events.append(ev)
            traj.append_sample(ev.t, ev.state)
            if ev.kind == "escape":
                return traj
            t = ev.t
            cur = ev.state
            if stop_on_disc_entry:
                return traj
            continue
        b = config.bumps[k]
        remaining = T_max - (t - t_start)
        cap = (max_total_section_hits - hits) if max_total_section_hits > 0 else 0
        passage = integrate_in_disc(
            b, cur, section=sections.get(k), T_max=remaining, bump_index=k,
            rtol=rtol, atol=atol, max_section_hits=cap, record=record, t0=t,
            section_t_min=first_section_t_min if first_disc else 0.0,
        )
        first_disc = False
        if passage.duration < 1e-12 * (1.0 + abs(t)):
            stalls += 1
            if stalls > 100:
                raise IntegrationFailure(
                    "no time progress across repeated disc passages")
        else:
            stalls = 0
        traj.events.extend(passage.events)
        traj.samples.extend(passage.samples)
        hits += passage.section_hits
        t = t + passage.duration
        cur = passage.final_state
        traj.append_sample(t, cur)
        if passage.status == "captured":
            traj.events.append(Event(kind="time_cap", t=t, state=cur, k=k))
            return traj
        if passage.status == "section_stop":
            return traj
        # the in-disc kernel already recorded the exit_disc event
    traj.events.append(Event(kind="time_cap", t=t, state=cur))
    return traj


def rk4_passage(bump: Bump, state: ParticleState, h: float = 1e-5,
                T_max: float = 1e3):
    """Fixed-step classical RK4 through one disc passage (independent oracle).

    Returns (status, t_exit, exit_state) with status in
    {'exit', 'captured', 'never_entered'}.
    """
    nodes = bump.profile.nodes
    y0 = np.array([state.q[0], state.q[1], state.v[0], state.v[1], 0.0])
    y_end = np.empty(5)
    status, t = _rk.rk4_passage_core(
        y0, float(bump.center[0]), float(bump.center[1]),
        np.ascontiguousarray(nodes[:, 0]), np.ascontiguousarray(nodes[:, 1]),
        bump.support_radius, h, T_max, y_end,
    )
    names = {0: "exit", 1: "captured", 3: "never_entered"}
    return names[status], t, _state_from_y(y_end, t)


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """CSV export: t,qx,qy,vx,vy,event with 17 significant digits."""
    rows = []
    for t, st in traj.samples:
        rows.append((t, st, ""))
    for ev in traj.events:
        label = ev.kind if ev.k is None else f"{ev.kind}({ev.k})"
        rows.append((ev.t, ev.state, label))
    rows.sort(key=lambda r: (r[0], r[2] == ""))
    with open(path, "w") as fh:
        fh.write("t,qx,qy,vx,vy,event\n")
        for t, st, label in rows:
            fh.write(
                f"{t:.17g},{st.q[0]:.17g},{st.q[1]:.17g},"
                f"{st.v[0]:.17g},{st.v[1]:.17g},{label}\n"
            )
