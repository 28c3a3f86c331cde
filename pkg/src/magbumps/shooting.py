"""Realize prescribed itineraries by nested bisection over entry momentum,
verify the finite full shift, and compute the entropy lower bound.

A word is processed as maximal blocks of repeated symbols; each block (k, j)
demands exactly j section hits inside disc k followed by an exit chord whose
entry momentum at the next disc lies strictly inside the admissible
(tangent, critical) window.  The bracket is an ordered pair
(s_under, s_over) of initial entry momenta: s_under is the tangent-side
endpoint (too little winding), s_over the critical-side endpoint.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .field import FieldConfig
from .geometry import transit_distances
from .integrator import IntegrationFailure, free_flight, integrate_in_disc
from .poincare import (
    CodingResult,
    Itinerary,
    entry_to_section_u,
    itinerary_of,
)
from .singlebump import EnergyAnalysis, entry_state

_BISECT_CAP = 200
_BAND_SAMPLES = 65
_INSET_FRAC = 1e-3


class ShootError(RuntimeError):
    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


@dataclass(frozen=True)
class ShootBracket:
    stage: int
    s_under: float
    s_over: float
    prefix: tuple  # 0-based block list realized so far: ((k, j), ...)
    under_kind: str = "tangent-side"
    over_kind: str = "critical-side"

    @property
    def width(self) -> float:
        return abs(self.s_over - self.s_under)


@dataclass
class ShootResult:
    word: Itinerary
    entry_state: object
    entry_phi: float
    entry_momentum: float
    bracket_width: float
    return_times: list = field(default_factory=list)
    verified: bool = False
    brackets: list = field(default_factory=list)
    coding: CodingResult | None = None


def word_blocks(word) -> list:
    """Maximal runs of a 0-based symbol sequence as (symbol, count) pairs."""
    blocks = []
    for s in word:
        if blocks and blocks[-1][0] == s:
            blocks[-1][1] += 1
        else:
            blocks.append([s, 1])
    return [(k, j) for k, j in blocks]


def entry_ray_angle(config: FieldConfig, analysis: EnergyAnalysis,
                    report, word0) -> float:
    """Deterministic inward entry ray into the first disc of a 0-based word:
    the entry-arc midpoint for the first transition, or the point opposite
    the anchor for constant words.
    """
    from .geometry import corridor

    k0 = word0[0]
    nxt = next((s for s in word0 if s != k0), None)
    if nxt is None:
        return report.anchor_angles[k0] + math.pi
    cor = corridor(analysis, config, nxt, k0)
    return cor.arc_entry.midpoint


@dataclass
class _Passage:
    k: int
    hits: int
    status: str  # exit | section_stop | captured
    exit_state: object = None
    next_k: int | None = None
    next_entry: object = None
    duration: float = 0.0
    winding: float = 0.0


class _Tracer:
    """Re-integrates a candidate entry momentum through the word blocks."""

    def __init__(self, config, analysis, sections, k0, phi, blocks,
                 rtol, atol):
        self.config = config
        self.analysis = analysis
        self.sections = sections
        self.k0 = k0
        self.phi = phi
        self.blocks = blocks
        self.rtol = rtol
        self.atol = atol
        self.E = analysis.E
        self.evaluations = 0

    def _t_pass(self, k, j):
        R = self.config.bumps[k].support_radius
        return (j + 3) * 2.0 * math.pi * R / math.sqrt(2.0 * self.E)

    def entry(self, s):
        return entry_state(self.config.bumps[self.k0], self.E, self.phi, s)

    def trace(self, s, upto) -> list:
        """Passages for blocks [0, upto]; stops early on deviation."""
        self.evaluations += 1
        state = self.entry(s)
        cur_k = self.k0
        out = []
        for i, (k, j) in enumerate(self.blocks[: upto + 1]):
            if cur_k != k:
                break
            b = self.config.bumps[k]
            try:
                p = integrate_in_disc(
                    b, state, section=self.sections[k],
                    T_max=self._t_pass(k, j), bump_index=k,
                    rtol=self.rtol, atol=self.atol,
                    max_section_hits=j + 1,
                )
            except IntegrationFailure:
                out.append(_Passage(k=k, hits=j + 1, status="captured"))
                break
            rec = _Passage(k=k, hits=p.section_hits, status=p.status,
                           duration=p.duration, winding=p.winding)
            out.append(rec)
            if p.status != "exit":
                break
            rec.exit_state = p.final_state
            ev = free_flight(self.config, p.final_state,
                             t0=p.final_state.t)
            if ev.kind == "escape":
                break
            rec.next_k = ev.k
            rec.next_entry = ev.state
            state = ev.state
            cur_k = ev.k
        return out


def _chord_distance(exit_state, center):
    """Left-positive signed distance of the forward exit ray from a center,
    and whether the ray approaches it.
    """
    q, v = exit_state.q, exit_state.v
    speed = math.hypot(v[0], v[1])
    w = center - q
    d = (v[0] * w[1] - v[1] * w[0]) / speed
    approach = float(w @ v) > 0.0
    return d, approach


def _score(trace, blocks, m):
    """'under' | 'over' | exact hit count of block m.

    Deviations before block m are classified by side: too few hits or an
    escape is tangent-side; too many hits or capture is critical-side; a
    missed corridor is classified by which window edge the exit chord is
    nearer to.
    """
    for i, (k, j) in enumerate(blocks[:m]):
        if i >= len(trace):
            return "under"  # escaped before reaching this block
        p = trace[i]
        if p.k != k:
            return "under"
        if p.hits > j or p.status in ("section_stop", "captured"):
            return "over"
        if p.hits < j:
            return "under"
        if p.status != "exit" or p.next_k is None:
            return "under"  # exited but escaped: grazing side
        if p.next_k != blocks[i + 1][0]:
            return "under"
    if m >= len(trace):
        return "under"
    p = trace[m]
    if p.k != blocks[m][0]:
        return "under"
    if p.status in ("section_stop", "captured"):
        return blocks[m][1] + 1
    return p.hits


class _Stage:
    """Bisection machinery for one block, over the oriented bracket."""

    def __init__(self, tracer, blocks, m, s_under, s_over):
        self.tracer = tracer
        self.blocks = blocks
        self.m = m
        self.s_under = s_under
        self.s_over = s_over
        self._cache = {}

    def s(self, tau):
        return self.s_under + tau * (self.s_over - self.s_under)

    def score(self, tau):
        if tau not in self._cache:
            t = self.tracer.trace(self.s(tau), self.m)
            self._cache[tau] = (_score(t, self.blocks, self.m), t)
        return self._cache[tau]

    def hits_ge(self, tau, j):
        sc, _ = self.score(tau)
        if sc == "under":
            return False
        if sc == "over":
            return True
        return sc >= j

    def first_tau_with(self, j, lo=0.0, hi=1.0):
        """Smallest tau in [lo, hi] with hit count >= j (boolean bisection)."""
        if self.hits_ge(lo, j):
            return lo, lo
        if not self.hits_ge(hi, j):
            raise ShootError(
                f"hit count {j} unreachable at stage {self.m}", self.m)
        a, b = lo, hi
        for _ in range(_BISECT_CAP):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if self.hits_ge(mid, j):
                b = mid
            else:
                a = mid
        return a, b

    def chord(self, tau, l):
        sc, t = self.score(tau)
        if sc in ("under", "over") or self.m >= len(t):
            return None
        p = t[self.m]
        if p.status != "exit" or p.exit_state is None:
            return None
        c_l = self.tracer.config.bumps[l].center
        d, approach = _chord_distance(p.exit_state, c_l)
        return (d, approach, sc)

    def winding(self, tau):
        _, t = self.score(tau)
        if self.m < len(t):
            return abs(t[self.m].winding)
        return None


def _bisect_chord(stage, l, j, tau_a, tau_b, target):
    """Root of d(tau) = target between two samples with valid chords."""
    fa = stage.chord(tau_a, l)
    fb = stage.chord(tau_b, l)
    a, b = tau_a, tau_b
    ga = fa[0] - target
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (a + b)
        if mid <= min(a, b) or mid >= max(a, b):
            break
        fm = stage.chord(mid, l)
        if fm is None:
            # invalid sample inside the band: shrink toward the valid end
            b = mid
            continue
        gm = fm[0] - target
        if (gm > 0) == (ga > 0):
            a, ga = mid, gm
        else:
            b = mid
    return 0.5 * (a + b)


def _refine_corridor(stage, l, j, tau1, tau2, *, dpsi_max=0.25,
                     eval_cap=400):
    """Within the exact-hit band [tau1, tau2], locate the parameters whose
    exit chords graze disc l and hit it critically.

    The exit angle sweeps one revolution across the band but is violently
    nonuniform in the parameter, so the band is subdivided until adjacent
    samples differ by at most dpsi_max radians of in-disc winding; the two
    window-edge roots are then bisected between straddling samples taken
    from the approach phase of the sweep.
    """
    d_tan, d_crit = transit_distances(stage.tracer.analysis,
                                      stage.tracer.config, l)
    taus = [tau1, 0.5 * (tau1 + tau2), tau2]
    n_eval = 3
    while n_eval < eval_cap:
        worst, gap = None, dpsi_max
        for a, b in zip(taus, taus[1:]):
            pa, pb = stage.winding(a), stage.winding(b)
            if pa is None or pb is None:
                g = math.inf if b - a > 1e-15 * (tau2 - tau1) else 0.0
            else:
                g = abs(pb - pa)
            if g > gap and 0.5 * (a + b) not in (a, b):
                worst, gap = (a, b), g
        if worst is None:
            break
        taus.append(0.5 * (worst[0] + worst[1]))
        taus.sort()
        n_eval += 1

    vals = [stage.chord(t, l) for t in taus]

    def root_between(target):
        for (ta, va), (tb, vb) in zip(zip(taus, vals), zip(taus[1:],
                                                           vals[1:])):
            if va is None or vb is None:
                continue
            if not (va[1] and vb[1] and va[2] == j and vb[2] == j):
                continue
            if (va[0] - target) * (vb[0] - target) <= 0:
                return _bisect_chord(stage, l, j, ta, tb, target)
        return None

    tau_tan = root_between(d_tan)
    tau_crit = root_between(d_crit)
    if tau_tan is None or tau_crit is None:
        raise ShootError(
            f"exit chord never sweeps the corridor window at stage "
            f"{stage.m} (disc {l})", stage.m)
    return tau_tan, tau_crit


def shoot_prefix(config: FieldConfig, analysis: EnergyAnalysis,
                 sections: dict, report, word: Itinerary,
                 tol: float = 1e-12, *, rtol=None, atol=None,
                 verify: bool = True, verify_T_max: float | None = None
                 ) -> ShootResult:
    """Nested bisection realizing a finite word (1-based symbols)."""
    from .integrator import DEFAULT_ATOL, DEFAULT_RTOL

    rtol = DEFAULT_RTOL if rtol is None else rtol
    atol = DEFAULT_ATOL if atol is None else atol
    word.validate_against(config)
    word0 = [s - 1 for s in word.word]
    blocks = word_blocks(word0)
    k0 = word0[0]
    phi = entry_ray_angle(config, analysis, report, word0)

    b0 = config.bumps[k0]
    bump_ana = analysis.records[k0]
    s_under = analysis.tangent_momentum(k0, config)
    s_over = bump_ana.i_plus
    # start strictly inside the sweep: the exact endpoints graze or capture
    w = s_over - s_under
    s_under += 1e-9 * w
    s_over -= 1e-12 * w

    tracer = _Tracer(config, analysis, sections, k0, phi, blocks, rtol, atol)
    brackets = []
    for m, (k, j) in enumerate(blocks):
        stage = _Stage(tracer, blocks, m, s_under, s_over)
        lo1, hi1 = stage.first_tau_with(j)        # h >= j transition
        try:
            lo2, hi2 = stage.first_tau_with(j + 1, lo=hi1)
        except ShootError:
            if m < len(blocks) - 1:
                raise
            # the word ends here, so the h >= j+1 transition is not needed;
            # at low winding rates it can lie beyond double precision
            lo2 = 1.0
        tau_band = (hi1, lo2)
        if m < len(blocks) - 1:
            l = blocks[m + 1][0]
            tau_tan, tau_crit = _refine_corridor(stage, l, j,
                                                 tau_band[0], tau_band[1])
            span = tau_crit - tau_tan
            inset = _INSET_FRAC * span
            tau_u, tau_o = tau_tan + inset, tau_crit - inset
            # adaptively shrink the critical-side inset until the endpoint
            # actually reaches the next disc with winding to spare
            for _ in range(12):
                sc, _t = _Stage(tracer, blocks, m + 1,
                                stage.s(tau_u), stage.s(tau_o)).score(1.0)
                if sc == "over" or (isinstance(sc, int)
                                    and sc >= blocks[m + 1][1] + 1):
                    break
                tau_o = tau_crit - (tau_crit - tau_o) * 1e-2
                if tau_o >= tau_crit:
                    break
            s_under, s_over = stage.s(tau_u), stage.s(tau_o)
        else:
            s_under, s_over = stage.s(tau_band[0]), stage.s(tau_band[1])
        if s_under == s_over:
            raise ShootError(f"bracket collapsed at stage {m}", m)
        brackets.append(ShootBracket(
            stage=m, s_under=s_under, s_over=s_over,
            prefix=tuple(blocks[: m + 1]),
        ))
        if abs(s_over - s_under) < tol and m == len(blocks) - 1:
            break

    s_star = 0.5 * (s_under + s_over)
    state0 = tracer.entry(s_star)
    result = ShootResult(
        word=word, entry_state=state0, entry_phi=phi,
        entry_momentum=s_star,
        bracket_width=abs(s_over - s_under), brackets=brackets,
    )
    if verify:
        res = entry_to_section_u(config, analysis, sections, state0,
                                 T_max=verify_T_max, rtol=rtol, atol=atol)
        if res.status == "section":
            cod = itinerary_of(config, analysis, sections, res.point,
                               len(word), T_max=verify_T_max,
                               rtol=rtol, atol=atol)
            result.coding = cod
            result.return_times = list(cod.return_times)
            result.verified = (
                cod.terminal == "complete"
                and tuple(s + 1 for s in cod.word) == word.word
            )
    return result


@dataclass
class ShiftReport:
    n: int
    L: int
    realized: int
    total: int
    max_bracket_width: float = 0.0
    max_return_time: float = 0.0
    failures: list = field(default_factory=list)
    results: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.realized == self.total


def verify_full_shift(config: FieldConfig, analysis: EnergyAnalysis,
                      sections: dict, report, L: int,
                      tol: float = 1e-12, *, keep_results: bool = False
                      ) -> ShiftReport:
    """Shoot every word of length L and re-verify via the coding map."""
    from itertools import product

    n = len(config.bumps)
    rep = ShiftReport(n=n, L=L, realized=0, total=n ** L)
    for tup in product(range(1, n + 1), repeat=L):
        word = Itinerary(tup)
        try:
            res = shoot_prefix(config, analysis, sections, report, word, tol)
        except (ShootError, IntegrationFailure) as exc:
            rep.failures.append((tup, str(exc)))
            continue
        if res.verified:
            rep.realized += 1
            rep.max_bracket_width = max(rep.max_bracket_width,
                                        res.bracket_width)
            if res.return_times:
                rep.max_return_time = max(rep.max_return_time,
                                          max(res.return_times))
            if keep_results:
                rep.results.append(res)
        else:
            got = (tuple(s + 1 for s in res.coding.word)
                   if res.coding else None)
            rep.failures.append((tup, f"re-integration gave {got}"))
    return rep


def entropy_lower_bound(config: FieldConfig, analysis: EnergyAnalysis,
                        samples) -> tuple:
    """(h_lower, c_prime) from observed return times.

    samples: a ShiftReport or an iterable of return times.
    """
    n = len(config.bumps)
    if isinstance(samples, ShiftReport):
        times = [samples.max_return_time] if samples.realized else []
    else:
        times = [float(t) for t in samples]
    if not times or max(times) <= 0.0:
        raise ValueError("no recorded return times")
    t_sup = max(times)
    h_lower = math.log(n) / t_sup
    c_prime = t_sup * math.sqrt(analysis.E)
    return h_lower, c_prime
