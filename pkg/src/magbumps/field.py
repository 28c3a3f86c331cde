"""Multi-bump planar magnetic fields with rotationally symmetric components.

A field is a finite sum of bumps.  Each bump has a center and a radial
profile B(r) that is piecewise linear, Lipschitz, and compactly supported,
so the flux integral F(r) = int_r^R B(s) s ds has an exact per-segment
polynomial antiderivative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# J = [[0, 1], [-1, 0]]: Jv rotates v by -90 degrees.  Positive B gives
# clockwise motion (curvature -B/sqrt(2E)).
J = np.array([[0.0, 1.0], [-1.0, 0.0]])


class FieldConfigError(ValueError):
    """Raised when a profile or configuration violates its invariants."""


def apply_J(v):
    v = np.asarray(v, dtype=float)
    return np.array([v[1], -v[0]])


def cross2(a, b) -> float:
    """Planar cross product a1*b2 - a2*b1."""
    return float(a[0] * b[1] - a[1] * b[0])


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-linear radial field profile, vanishing for r >= support_radius.

    nodes: (m, 2) array of (r, B) pairs, r strictly increasing, first r = 0,
    last node (R, 0).
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or nodes.shape[0] < 2:
            raise FieldConfigError("profile needs at least two (r, B) nodes")
        r = nodes[:, 0]
        if r[0] != 0.0:
            raise FieldConfigError("first profile node must be at r = 0")
        if np.any(np.diff(r) <= 0.0):
            raise FieldConfigError("profile radii must be strictly increasing")
        if nodes[-1, 1] != 0.0:
            raise FieldConfigError("profile must vanish at its support radius")
        if nodes[-1, 0] <= 0.0:
            raise FieldConfigError("support radius must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "_flux0", _segment_fluxes(nodes))
        self.nodes.setflags(write=False)

    @property
    def support_radius(self) -> float:
        return float(self.nodes[-1, 0])

    def __call__(self, r: float) -> float:
        return self.eval(r)

    def eval(self, r: float) -> float:
        """B(r); 0 for r >= support_radius."""
        if r < 0.0:
            raise FieldConfigError("radius must be nonnegative")
        nodes = self.nodes
        if r >= nodes[-1, 0]:
            return 0.0
        i = int(np.searchsorted(nodes[:, 0], r, side="right")) - 1
        r0, b0 = nodes[i]
        r1, b1 = nodes[i + 1]
        return float(b0 + (b1 - b0) * (r - r0) / (r1 - r0))

    def flux(self, r: float) -> float:
        """F(r) = int_r^R B(s) s ds, exact per-segment polynomial."""
        if r < 0.0:
            raise FieldConfigError("radius must be nonnegative")
        nodes = self.nodes
        if r >= nodes[-1, 0]:
            return 0.0
        i = int(np.searchsorted(nodes[:, 0], r, side="right")) - 1
        # flux from node i+1 outward plus the partial segment [r, r_{i+1}]
        return float(self._flux0[i + 1] + _partial_flux(nodes[i], nodes[i + 1], r))

    def scaled(self, lam: float) -> "RadialProfile":
        nodes = self.nodes.copy()
        nodes[:, 1] *= lam
        return RadialProfile(nodes)


def _partial_flux(n0, n1, r) -> float:
    # int_r^{r1} (b0 + m (s - r0)) s ds with exact cubic antiderivative
    r0, b0 = n0
    r1, b1 = n1
    m = (b1 - b0) / (r1 - r0)
    a = b0 - m * r0  # B(s) = a + m s

    def anti(s):
        return a * s * s / 2.0 + m * s * s * s / 3.0

    return anti(r1) - anti(r)


def _segment_fluxes(nodes) -> np.ndarray:
    """flux0[i] = exact flux from nodes[i, 0] out to the support radius."""
    m = nodes.shape[0]
    out = np.zeros(m)
    for i in range(m - 2, -1, -1):
        out[i] = out[i + 1] + _partial_flux(nodes[i], nodes[i + 1], nodes[i, 0])
    return out


def piecewise_linear(nodes) -> RadialProfile:
    return RadialProfile(np.asarray(nodes, dtype=float))


def constant_disc(B: float, R: float, ramp: float) -> RadialProfile:
    """Constant field B out to R - ramp, then a linear ramp down to 0 at R.

    The ramp keeps the profile Lipschitz.
    """
    if not (0.0 < ramp < R):
        raise FieldConfigError("ramp width must lie in (0, R)")
    return RadialProfile(np.array([[0.0, B], [R - ramp, B], [R, 0.0]]))


def example_profile() -> RadialProfile:
    """The reference profile B(r) = 10(1 - r) on [0, 1]."""
    return piecewise_linear([[0.0, 10.0], [1.0, 0.0]])


def shift_profile(E: float = 0.5, ratio: float = 0.96) -> RadialProfile:
    """The reference profile rescaled so its energy threshold is E / ratio.

    Near-threshold bumps wind several radians per decade of momentum gap,
    which keeps deeply repeated symbols realizable in double precision.
    """
    e_max = 3.125  # threshold of example_profile
    return example_profile().scaled(math.sqrt((E / ratio) / e_max))


def reference_pair(separation: float = 6.0, E: float = 0.5) -> "FieldConfig":
    """Two near-threshold bumps on the x-axis (the n = 2 shift config)."""
    prof = shift_profile(E)
    return FieldConfig((
        Bump(np.array([0.0, 0.0]), prof),
        Bump(np.array([separation, 0.0]), prof),
    ))


def reference_triangle(side: float = 40.0, E: float = 0.5) -> "FieldConfig":
    """Three near-threshold bumps on an equilateral triangle (n = 3)."""
    prof = shift_profile(E)
    h = side * math.sqrt(3.0) / 2.0
    return FieldConfig((
        Bump(np.array([0.0, 0.0]), prof),
        Bump(np.array([side, 0.0]), prof),
        Bump(np.array([side / 2.0, h]), prof),
    ))


@dataclass(frozen=True)
class Bump:
    """One rotationally symmetric field component."""

    center: np.ndarray
    profile: RadialProfile

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (2,):
            raise FieldConfigError("bump center must be a plane point")
        object.__setattr__(self, "center", c)
        self.center.setflags(write=False)

    @property
    def support_radius(self) -> float:
        return self.profile.support_radius

    def radius_of(self, q) -> float:
        q = np.asarray(q, dtype=float)
        return float(np.hypot(q[0] - self.center[0], q[1] - self.center[1]))

    def eval(self, q) -> float:
        return self.profile.eval(self.radius_of(q))

    def flux(self, r: float) -> float:
        return self.profile.flux(r)

    def vector_potential(self, q) -> np.ndarray:
        """A(q) = (F(r)/r^2) J (q - c); rejects the singular point q = c."""
        q = np.asarray(q, dtype=float)
        d = q - self.center
        r = float(np.hypot(d[0], d[1]))
        if r == 0.0:
            raise FieldConfigError("vector potential is singular at the bump center")
        if r >= self.support_radius:
            return np.zeros(2)
        return (self.profile.flux(r) / (r * r)) * apply_J(d)


@dataclass(frozen=True)
class FieldConfig:
    """The full multi-bump field B = sum_k B_k with pairwise disjoint supports."""

    bumps: tuple

    def __post_init__(self):
        bumps = tuple(self.bumps)
        if len(bumps) < 1:
            raise FieldConfigError("configuration needs at least one bump")
        for i in range(len(bumps)):
            for j in range(i + 1, len(bumps)):
                bi, bj = bumps[i], bumps[j]
                gap = float(np.hypot(*(bi.center - bj.center)))
                if gap <= bi.support_radius + bj.support_radius:
                    raise FieldConfigError(
                        f"support discs of bumps {i} and {j} are not disjoint "
                        f"(distance {gap:g} <= {bi.support_radius + bj.support_radius:g})"
                    )
        object.__setattr__(self, "bumps", bumps)

    @property
    def n(self) -> int:
        return len(self.bumps)

    def eval(self, q) -> float:
        """B(q): the unique bump covering q, or 0 outside every support."""
        q = np.asarray(q, dtype=float)
        for b in self.bumps:
            if b.radius_of(q) < b.support_radius:
                return b.eval(q)
        return 0.0

    def disc_containing(self, q, pad: float = 0.0):
        q = np.asarray(q, dtype=float)
        for k, b in enumerate(self.bumps):
            if b.radius_of(q) < b.support_radius + pad:
                return k
        return None

    def bounding_radius(self) -> float:
        """Radius of a circle about the centroid covering every disc."""
        centers = np.array([b.center for b in self.bumps])
        mid = centers.mean(axis=0)
        return max(
            float(np.hypot(*(b.center - mid))) + b.support_radius for b in self.bumps
        ) + float(np.hypot(*mid) * 0.0)

    def escape_radius(self) -> float:
        # past all corridors a free-flight ray cannot return
        return 4.0 * self.bounding_radius() + max(
            float(np.hypot(*b.center)) for b in self.bumps
        )


def eval_field(config: FieldConfig, q) -> float:
    return config.eval(q)


def flux(bump: Bump, r: float) -> float:
    return bump.flux(r)


def vector_potential(bump: Bump, q) -> np.ndarray:
    return bump.vector_potential(q)


# ---------------------------------------------------------------------------
# JSON configuration files


def config_from_dict(data: dict) -> FieldConfig:
    if not isinstance(data, dict) or "bumps" not in data:
        raise FieldConfigError("config must be an object with a 'bumps' list")
    raw = data["bumps"]
    if not isinstance(raw, list) or len(raw) == 0:
        raise FieldConfigError("'bumps' must be a nonempty list")
    bumps = []
    for i, entry in enumerate(raw):
        where = f"bumps[{i}]"
        try:
            center = entry["center"]
            prof = entry["profile"]
            kind = prof["type"]
            if kind == "piecewise_linear":
                profile = piecewise_linear(prof["nodes"])
            elif kind == "constant_disc":
                profile = constant_disc(
                    float(prof["B"]), float(prof["R"]), float(prof.get("ramp", 0.1 * float(prof["R"])))
                )
            else:
                raise FieldConfigError(f"unknown profile type {kind!r}")
        except KeyError as e:
            raise FieldConfigError(f"{where}: missing field {e.args[0]!r}") from None
        except FieldConfigError as e:
            raise FieldConfigError(f"{where}: {e}") from None
        bumps.append(Bump(np.asarray(center, dtype=float), profile))
    return FieldConfig(tuple(bumps))


def load_config(path) -> FieldConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise FieldConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    try:
        return config_from_dict(data)
    except FieldConfigError as e:
        raise FieldConfigError(f"{path}: {e}") from None


def config_to_dict(config: FieldConfig) -> dict:
    return {
        "bumps": [
            {
                "center": [float(b.center[0]), float(b.center[1])],
                "profile": {
                    "type": "piecewise_linear",
                    "nodes": [[float(r), float(v)] for r, v in b.profile.nodes],
                },
            }
            for b in config.bumps
        ]
    }
