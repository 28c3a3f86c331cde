"""Transition corridors, the general-position check, and section anchors.

A straight trajectory segment with unit direction w has momentum
I_c = sqrt(2E) * d about a center c, where d is the signed perpendicular
distance of c from the directed line (left of the direction positive).
Corridors between two discs are therefore bounded by two lines of prescribed
signed distances: the grazing distance -sign*R and the critical distance
I+ / sqrt(2E).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Point, Polygon

from .field import FieldConfig, cross2
from .singlebump import EnergyAnalysis

_HULL_SAMPLES = 4096


class GeometryError(ValueError):
    pass


class DegenerateCorridorError(GeometryError):
    pass


@dataclass(frozen=True)
class CorridorLine:
    """Directed line with prescribed signed distances from two centers."""

    point: np.ndarray  # a point on the line
    direction: np.ndarray  # unit direction, from the k side to the l side
    d_k: float
    d_l: float

    def signed_distance(self, c) -> float:
        c = np.asarray(c, dtype=float)
        return cross2(self.direction, c - self.point)

    def left_normal(self) -> np.ndarray:
        w = self.direction
        return np.array([-w[1], w[0]])


def line_with_signed_distances(c_k, c_l, d_k: float, d_l: float) -> CorridorLine:
    """The directed k-to-l line whose signed distances from c_k, c_l are d_k, d_l."""
    c_k = np.asarray(c_k, dtype=float)
    c_l = np.asarray(c_l, dtype=float)
    delta = c_l - c_k
    L = float(np.hypot(delta[0], delta[1]))
    if L <= abs(d_k - d_l):
        raise GeometryError(
            f"no line with clearances {d_k:g}/{d_l:g} at center distance {L:g}"
        )
    e = delta / L
    n = np.array([-e[1], e[0]])
    sinb = (d_k - d_l) / L
    cosb = math.sqrt(1.0 - sinb * sinb)
    w = cosb * e + sinb * n
    nw = np.array([-w[1], w[0]])
    p0 = c_k - d_k * nw
    return CorridorLine(point=p0, direction=w, d_k=d_k, d_l=d_l)


def _circle_intersections(line: CorridorLine, c, R: float, d: float):
    """(upstream, downstream) intersection points of the line with the circle."""
    c = np.asarray(c, dtype=float)
    nw = line.left_normal()
    foot = c - d * nw
    h2 = R * R - d * d
    half = math.sqrt(max(h2, 0.0))
    return foot - half * line.direction, foot + half * line.direction


@dataclass(frozen=True)
class Arc:
    """Angular interval [phi0, phi0 + width] (width in (0, 2 pi)) on a circle."""

    phi0: float
    width: float

    def contains(self, phi: float) -> bool:
        d = (phi - self.phi0) % (2.0 * math.pi)
        return d <= self.width

    @property
    def midpoint(self) -> float:
        return _norm_angle(self.phi0 + 0.5 * self.width)

    @staticmethod
    def between(phi_a: float, phi_b: float, phi_inside: float) -> "Arc":
        """The arc with endpoints phi_a, phi_b that contains phi_inside."""
        w_ab = (phi_b - phi_a) % (2.0 * math.pi)
        d_in = (phi_inside - phi_a) % (2.0 * math.pi)
        if d_in <= w_ab:
            return Arc(phi0=_norm_angle(phi_a), width=w_ab)
        return Arc(phi0=_norm_angle(phi_b), width=2.0 * math.pi - w_ab)


def _norm_angle(phi: float) -> float:
    return math.atan2(math.sin(phi), math.cos(phi))


@dataclass(frozen=True)
class Corridor:
    """Transit corridor from disc k to disc l at fixed energy."""

    k: int
    l: int
    line_tangent_side: CorridorLine
    line_critical_side: CorridorLine
    arc_exit: Arc  # A_{k,l} on the boundary of D_k
    arc_entry: Arc  # B_{l,k} on the boundary of D_l
    mirror_case: bool = False  # mixed-sign case obtained by reflection symmetry


def _arc_points(center, R, arc: Arc, n: int) -> np.ndarray:
    phis = arc.phi0 + np.linspace(0.0, arc.width, n)
    return np.stack(
        [center[0] + R * np.cos(phis), center[1] + R * np.sin(phis)], axis=1
    )


def corridor_hull_points(config: FieldConfig, cor: Corridor,
                         n: int = _HULL_SAMPLES) -> np.ndarray:
    bk = config.bumps[cor.k]
    bl = config.bumps[cor.l]
    return np.vstack(
        [
            _arc_points(bk.center, bk.support_radius, cor.arc_exit, n),
            _arc_points(bl.center, bl.support_radius, cor.arc_entry, n),
        ]
    )


def transit_distances(analysis: EnergyAnalysis, config: FieldConfig, k: int):
    """(grazing, critical) signed line distances for transit past disc k."""
    rec = analysis.records[k]
    R = config.bumps[k].support_radius
    return -rec.sign * R, rec.i_plus / analysis.speed


def corridor(analysis: EnergyAnalysis, config: FieldConfig, k: int, l: int) -> Corridor:
    """Bounding lines and boundary arcs of the k -> l transition corridor."""
    if k == l:
        raise GeometryError("corridor needs two distinct bumps")
    bk, bl = config.bumps[k], config.bumps[l]
    sk = analysis.records[k].sign
    sl = analysis.records[l].sign
    tan_k, crit_k = transit_distances(analysis, config, k)
    tan_l, crit_l = transit_distances(analysis, config, l)
    for name, d, R in (
        ("k", crit_k, bk.support_radius),
        ("l", crit_l, bl.support_radius),
    ):
        if abs(d) >= R:
            raise DegenerateCorridorError(
                f"critical line of disc {name} lies outside the support circle"
            )
    if sk == sl:
        pair1 = (tan_k, tan_l)
        pair2 = (crit_k, crit_l)
    else:
        pair1 = (tan_k, crit_l)
        pair2 = (crit_k, tan_l)
    line1 = line_with_signed_distances(bk.center, bl.center, *pair1)
    line2 = line_with_signed_distances(bk.center, bl.center, *pair2)
    if abs(pair1[0] - pair2[0]) < 1e-14 * bk.support_radius:
        raise DegenerateCorridorError("bounding lines coincide (E at threshold?)")

    def exit_angle(line):
        _, p = _circle_intersections(line, bk.center, bk.support_radius, line.d_k)
        d = p - bk.center
        return math.atan2(d[1], d[0])

    def entry_angle(line):
        p, _ = _circle_intersections(line, bl.center, bl.support_radius, line.d_l)
        d = p - bl.center
        return math.atan2(d[1], d[0])

    mid = line_with_signed_distances(
        bk.center, bl.center,
        0.5 * (pair1[0] + pair2[0]), 0.5 * (pair1[1] + pair2[1]),
    )
    arc_exit = Arc.between(exit_angle(line1), exit_angle(line2), exit_angle(mid))
    arc_entry = Arc.between(entry_angle(line1), entry_angle(line2), entry_angle(mid))
    return Corridor(
        k=k, l=l,
        line_tangent_side=line1,
        line_critical_side=line2,
        arc_exit=arc_exit,
        arc_entry=arc_entry,
        mirror_case=(sk != sl and sk < 0),
    )


@dataclass(frozen=True)
class Violation:
    condition: int
    indices: tuple
    witness: tuple  # a point in the offending intersection / the empty-arc bump


@dataclass
class GeneralPositionReport:
    holds: bool
    violations: list
    anchors: dict  # bump index -> anchor point q_k* on the boundary
    anchor_angles: dict
    free_arcs: dict  # bump index -> list of free Arc
    corridors: dict  # (k, l) -> Corridor

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "violations": [
                {"condition": v.condition, "indices": list(v.indices),
                 "witness": list(v.witness)}
                for v in self.violations
            ],
            "anchors": {
                str(k): [float(p[0]), float(p[1])] for k, p in self.anchors.items()
            },
            "arcs": {
                f"{k},{l}": {
                    "exit": [c.arc_exit.phi0, c.arc_exit.width],
                    "entry": [c.arc_entry.phi0, c.arc_entry.width],
                }
                for (k, l), c in self.corridors.items()
            },
        }


def _free_gaps(occupied: list) -> list:
    """Complement of a union of arcs on the circle, as a list of arcs."""
    if not occupied:
        return [Arc(phi0=-math.pi, width=2.0 * math.pi)]
    # merge on the universal cover starting from the first arc start
    ivs = []
    for a in occupied:
        start = a.phi0 % (2.0 * math.pi)
        ivs.append((start, start + a.width))
    ivs.sort()
    merged = [list(ivs[0])]
    for s, e in ivs[1:]:
        if s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    # wraparound merge
    if len(merged) > 1 and merged[-1][1] >= merged[0][0] + 2.0 * math.pi:
        merged[0][0] = merged[-1][0] - 2.0 * math.pi
        merged[0][1] = max(merged[0][1], merged[-1][1] - 2.0 * math.pi)
        merged.pop()
    if merged[0][1] - merged[0][0] >= 2.0 * math.pi:
        return []
    gaps = []
    for i, (s, e) in enumerate(merged):
        nxt = merged[(i + 1) % len(merged)][0] + (2.0 * math.pi if i + 1 == len(merged) else 0.0)
        if nxt - e > 1e-12:
            gaps.append(Arc(phi0=_norm_angle(e), width=nxt - e))
    return gaps


def check_general_position(analysis: EnergyAnalysis, config: FieldConfig,
                           hull_samples: int = _HULL_SAMPLES) -> GeneralPositionReport:
    """Both general-position conditions plus anchor selection.

    Condition 1: corridor hulls avoid every third support disc.
    Condition 2: every disc boundary keeps a corridor-free arc; the anchor
    q_k* is the midpoint of the largest free arc.
    """
    n = config.n
    violations = []
    corridors = {}
    occupied = {k: [] for k in range(n)}
    for k in range(n):
        for l in range(n):
            if k == l:
                continue
            cor = corridor(analysis, config, k, l)
            corridors[(k, l)] = cor
            occupied[k].append(cor.arc_exit)
            occupied[l].append(cor.arc_entry)
            pts = corridor_hull_points(config, cor, hull_samples)
            hull = Polygon(pts).convex_hull
            # sampled hull is inscribed in the true hull: correct the sagitta
            max_w = max(cor.arc_exit.width, cor.arc_entry.width)
            rmax = max(config.bumps[k].support_radius,
                       config.bumps[l].support_radius)
            sag = rmax * (1.0 - math.cos(0.5 * max_w / (hull_samples - 1)))
            for m in range(n):
                if m in (k, l):
                    continue
                bm = config.bumps[m]
                dist = hull.distance(Point(bm.center[0], bm.center[1]))
                if dist - sag < bm.support_radius:
                    seg = hull.exterior.interpolate(
                        hull.exterior.project(Point(bm.center[0], bm.center[1]))
                    )
                    violations.append(
                        Violation(condition=1, indices=(k, l, m),
                                  witness=(seg.x, seg.y))
                    )
    anchors = {}
    anchor_angles = {}
    free_arcs = {}
    for k in range(n):
        gaps = _free_gaps(occupied[k])
        free_arcs[k] = gaps
        if not gaps:
            violations.append(
                Violation(condition=2, indices=(k,),
                          witness=tuple(config.bumps[k].center))
            )
            continue
        best = max(gaps, key=lambda a: (a.width, -a.phi0))
        phi = best.midpoint
        b = config.bumps[k]
        anchors[k] = b.center + b.support_radius * np.array(
            [math.cos(phi), math.sin(phi)]
        )
        anchor_angles[k] = phi
    return GeneralPositionReport(
        holds=not violations,
        violations=violations,
        anchors=anchors,
        anchor_angles=anchor_angles,
        free_arcs=free_arcs,
        corridors=corridors,
    )
