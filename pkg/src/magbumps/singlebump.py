"""Integrable quantities of a single rotationally symmetric bump at fixed energy.

Everything here is closed form: circular radii and the energy threshold come
from exact quadratic solves on each linear profile segment, the critical
momentum from the exact flux antiderivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import Bump, FieldConfig, cross2

_DEDUP_REL = 1e-12


class EnergyDomainError(ValueError):
    pass


@dataclass(frozen=True)
class ParticleState:
    """Position and velocity in the plane at a time instant."""

    q: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).copy())
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).copy())
        self.q.setflags(write=False)
        self.v.setflags(write=False)

    @property
    def speed(self) -> float:
        return float(np.hypot(self.v[0], self.v[1]))


def energy(state: ParticleState) -> float:
    """Kinetic energy |v|^2 / 2 (the Hamiltonian on trajectories)."""
    return 0.5 * float(state.v @ state.v)


def magnetic_momentum(bump: Bump, state: ParticleState) -> float:
    """Conserved momentum I = (q - c) x v - F(|q - c|) about the bump center.

    Equals r^2 theta_dot - int_r^R B s ds in polar coordinates; constant along
    trajectories while they stay outside the other supports.
    """
    d = state.q - bump.center
    r = float(np.hypot(d[0], d[1]))
    return cross2(d, state.v) - bump.flux(r)


def _segments(profile):
    nodes = profile.nodes
    for i in range(nodes.shape[0] - 1):
        r0, b0 = nodes[i]
        r1, b1 = nodes[i + 1]
        m = (b1 - b0) / (r1 - r0)
        a = b0 - m * r0  # B(s) = a + m s on [r0, r1]
        yield r0, r1, a, m


def energy_threshold(bump: Bump) -> float:
    """E0 = max_r (B(r) r)^2 / 2, exact per segment."""
    best = 0.0
    for r0, r1, a, m in _segments(bump.profile):
        candidates = [r0, r1]
        if m != 0.0:
            vertex = -a / (2.0 * m)  # critical point of g(r) = a r + m r^2
            if r0 < vertex < r1:
                candidates.append(vertex)
        for r in candidates:
            g = a * r + m * r * r
            best = max(best, g * g / 2.0)
    return best


def circular_radii(bump: Bump, E: float) -> tuple[list[float], float]:
    """All radii with |B(r)| r = sqrt(2E), sorted, plus the outermost R+."""
    if E <= 0.0:
        raise EnergyDomainError("energy must be positive")
    e0 = energy_threshold(bump)
    s = math.sqrt(2.0 * E)
    if E > e0 * (1.0 + 1e-14):
        raise EnergyDomainError(
            f"no circular orbit at this energy (E = {E:g} > E0 = {e0:g})"
        )
    R = bump.support_radius
    roots: list[float] = []
    for r0, r1, a, m in _segments(bump.profile):
        for target in (s, -s):
            # a r + m r^2 = target
            if m == 0.0:
                if a != 0.0:
                    cand = [target / a]
                else:
                    cand = []
            else:
                disc = a * a + 4.0 * m * target
                if disc < 0.0:
                    # tangency tolerance at E = E0
                    if disc > -1e-13 * max(a * a, 1.0):
                        disc = 0.0
                    else:
                        continue
                sq = math.sqrt(disc)
                cand = [(-a + sq) / (2.0 * m), (-a - sq) / (2.0 * m)]
            tol = 1e-12 * max(R, 1.0)
            for r in cand:
                if r0 - tol <= r <= r1 + tol:
                    roots.append(min(max(r, r0), r1))
    roots.sort()
    dedup: list[float] = []
    for r in roots:
        if not dedup or r - dedup[-1] > _DEDUP_REL * max(R, 1.0):
            dedup.append(r)
    if not dedup:
        raise EnergyDomainError("no circular orbit found (inconsistent profile)")
    return dedup, dedup[-1]


def outer_radius(bump: Bump, E: float) -> float:
    return circular_radii(bump, E)[1]


def critical_momentum(bump: Bump, E: float) -> tuple[float, float, int]:
    """(I+, alpha+, sign) of the outermost circular orbit at energy E.

    sign = sgn B(R+).  I+ = -sign * R+ sqrt(2E) - F(R+); alpha+ is the
    order-preserving angle parametrization arcsin(I+ / (R sqrt(2E))).
    """
    rplus = outer_radius(bump, E)
    s = math.sqrt(2.0 * E)
    b = bump.profile.eval(rplus)
    if b == 0.0:
        raise EnergyDomainError("degenerate outermost orbit: B(R+) = 0")
    sign = 1 if b > 0.0 else -1
    iplus = -sign * rplus * s - bump.flux(rplus)
    x = iplus / (bump.support_radius * s)
    x = min(1.0, max(-1.0, x))
    return iplus, math.asin(x), sign


def tangent_momentum(bump: Bump, E: float, sign: int) -> float:
    """Entry momentum of the grazing orbit on the transit side: -sign * R sqrt(2E)."""
    return -sign * bump.support_radius * math.sqrt(2.0 * E)


def entry_state(bump: Bump, E: float, phi: float, I: float) -> ParticleState:
    """The unique inward state on the support circle at angle phi with momentum I."""
    s = math.sqrt(2.0 * E)
    R = bump.support_radius
    if abs(I) > R * s * (1.0 + 1e-14):
        raise EnergyDomainError(f"momentum {I:g} outside the entry band [-Rv, Rv]")
    u = np.array([math.cos(phi), math.sin(phi)])
    tang = np.array([-u[1], u[0]])  # counterclockwise tangent
    b = I / R
    rad2 = 2.0 * E - b * b
    a = -math.sqrt(max(rad2, 0.0))
    return ParticleState(q=bump.center + R * u, v=a * u + b * tang)


def escape_delta(bump: Bump, E: float, r0: float) -> float:
    """delta with |q(t)|^2 >= |q0|^2 + delta t^2 for outward states beyond R+."""
    rplus = outer_radius(bump, E)
    if r0 <= rplus:
        raise EnergyDomainError("escape estimate needs r0 > R+")
    s = math.sqrt(2.0 * E)
    R = bump.support_radius
    if r0 >= R:
        return 2.0 * E
    gmax = 0.0
    for a0, a1, a, m in _segments(bump.profile):
        lo, hi = max(a0, r0), a1
        if lo >= hi:
            continue
        candidates = [lo, hi]
        if m != 0.0:
            vertex = -a / (2.0 * m)
            if lo < vertex < hi:
                candidates.append(vertex)
        for r in candidates:
            gmax = max(gmax, abs(a * r + m * r * r))
    return 2.0 * E - s * gmax


def theta_rate_bound(bump: Bump, E: float, rho: float) -> float:
    """Angular-rate bound c_rho = -sign * R+ sqrt(2E) / rho^2 on the critical side."""
    rplus = outer_radius(bump, E)
    if rho < rplus * (1.0 - 1e-14):
        raise EnergyDomainError("bound applies only for rho >= R+")
    _, _, sign = critical_momentum(bump, E)
    return -sign * rplus * math.sqrt(2.0 * E) / (rho * rho)


@dataclass(frozen=True)
class BumpAnalysis:
    """Per-bump derived quantities at fixed energy."""

    r_plus: float
    sign: int
    i_plus: float
    alpha_plus: float
    e_circ: float
    all_circular_radii: tuple


@dataclass(frozen=True)
class EnergyAnalysis:
    """All per-bump critical data of a configuration at one energy."""

    E: float
    records: tuple

    @classmethod
    def of(cls, config: FieldConfig, E: float) -> "EnergyAnalysis":
        if E <= 0.0:
            raise EnergyDomainError("energy must be positive")
        records = []
        for k, bump in enumerate(config.bumps):
            e0 = energy_threshold(bump)
            if E > e0 * (1.0 + 1e-14):
                raise EnergyDomainError(
                    f"E = {E:g} exceeds the threshold E0 = {e0:g} of bump {k}"
                )
            radii, rplus = circular_radii(bump, E)
            iplus, aplus, sign = critical_momentum(bump, E)
            records.append(
                BumpAnalysis(
                    r_plus=rplus,
                    sign=sign,
                    i_plus=iplus,
                    alpha_plus=aplus,
                    e_circ=e0,
                    all_circular_radii=tuple(radii),
                )
            )
        return cls(E=E, records=tuple(records))

    @property
    def speed(self) -> float:
        return math.sqrt(2.0 * self.E)

    def tangent_momentum(self, k: int, config: FieldConfig) -> float:
        rec = self.records[k]
        return -rec.sign * config.bumps[k].support_radius * self.speed
