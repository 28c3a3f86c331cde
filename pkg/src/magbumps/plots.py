"""SVG emitters: trajectories over disc outlines, momentum level sets in
the (r, rdot) plane, and Poincare-section scatters.

Output is deterministic for fixed inputs: Agg backend, fixed hash salt,
no date metadata.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "magbumps"

import matplotlib.pyplot as plt
import numpy as np

from .field import Bump, FieldConfig
from .geometry import corridor_hull_points
from .singlebump import EnergyAnalysis

_SAVE_KW = dict(format="svg", metadata={"Date": None})


def _disc_outlines(ax, config: FieldConfig,
                   analysis: EnergyAnalysis | None = None):
    th = np.linspace(0.0, 2.0 * math.pi, 256)
    for k, b in enumerate(config.bumps):
        cx, cy = b.center
        R = b.support_radius
        ax.plot(cx + R * np.cos(th), cy + R * np.sin(th),
                color="0.3", lw=0.8)
        if analysis is not None:
            rp = analysis.records[k].r_plus
            ax.plot(cx + rp * np.cos(th), cy + rp * np.sin(th),
                    color="0.6", lw=0.6, ls="--")
        ax.annotate(str(k + 1), (cx, cy), ha="center", va="center",
                    fontsize=8, color="0.4")


def plot_trajectory(config: FieldConfig, samples, path, *,
                    analysis: EnergyAnalysis | None = None,
                    corridors=(), title: str = "") -> None:
    """samples: iterable of (t, ParticleState); corridors: Corridor objects."""
    fig, ax = plt.subplots(figsize=(6, 6))
    _disc_outlines(ax, config, analysis)
    for cor in corridors:
        pts = corridor_hull_points(config, cor, 64)
        ax.fill(pts[:, 0], pts[:, 1], color="tab:orange", alpha=0.15, lw=0)
    pts = np.array([[s.q[0], s.q[1]] for _, s in samples])
    if len(pts):
        ax.plot(pts[:, 0], pts[:, 1], color="tab:blue", lw=0.7)
        ax.plot(pts[0, 0], pts[0, 1], marker="o", ms=3, color="tab:green")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_levelsets(bump: Bump, E: float, path, *, grid: int = 400,
                   levels: int = 25) -> None:
    """Level sets of the magnetic momentum in the (r, rdot) plane at fixed
    energy, on the clockwise branch; the circular-orbit radii are marked.
    """
    from .singlebump import circular_radii

    R = bump.support_radius
    speed = math.sqrt(2.0 * E)
    r = np.linspace(1e-3 * R, R, grid)
    rdot = np.linspace(-speed, speed, grid)
    rg, dg = np.meshgrid(r, rdot)
    tang = np.sqrt(np.clip(2.0 * E - dg ** 2, 0.0, None))
    flux = np.array([bump.flux(ri) for ri in r])
    Z = -rg * tang - flux[None, :]

    fig, ax = plt.subplots(figsize=(6, 4.5))
    cs = ax.contour(rg, dg, Z, levels=levels, linewidths=0.6,
                    cmap="viridis")
    ax.clabel(cs, inline=True, fontsize=6, fmt="%.2f")
    radii, rplus = circular_radii(bump, E)
    for ri in radii:
        ax.plot([ri], [0.0], marker="o", ms=4,
                color="tab:red" if ri == rplus else "tab:orange")
    ax.set_xlabel("r")
    ax.set_ylabel("radial velocity")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_section_scatter(points, path) -> None:
    """points: SectionPoint iterable; ordinate is the direction-signed
    tangential speed at the crossing.
    """
    fig, ax = plt.subplots(figsize=(6, 4.5))
    lam = [p.lam for p in points]
    tv = [p.direction * math.hypot(p.v[0], p.v[1]) for p in points]
    ks = [p.k for p in points]
    if lam:
        sc = ax.scatter(lam, tv, c=ks, s=8, cmap="tab10", vmin=0, vmax=9)
        fig.colorbar(sc, ax=ax, label="disc")
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("lambda")
    ax.set_ylabel("signed tangential speed")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
