"""Deterministic polar grids and sampled sup norms."""

import numpy as np

from .decompose import unit_roots


def polar_grid(r_inner, r_outer, n_radii=32, n_angles=1024, center=0j, include_center=True):
    """Points on ``n_radii`` circles evenly spaced in [r_inner, r_outer]."""
    radii = np.linspace(r_inner, r_outer, n_radii) if n_radii > 1 else np.array([r_outer])
    radii = radii[radii > 0]
    w = unit_roots(n_angles)
    pts = (radii[:, None] * w[None, :]).ravel()
    if include_center and r_inner == 0:
        pts = np.concatenate([[0j], pts])
    return center + pts


def sup_on_disk(f, radius, n_radii=32, n_angles=1024, center=0j):
    """Sampled sup of |f| on the closed disk of the given radius."""
    return float(np.abs(f(polar_grid(0.0, radius, n_radii, n_angles, center))).max())


def sup_on_annulus(f, r_inner, r_outer, n_radii=32, n_angles=1024, center=0j):
    return float(np.abs(f(polar_grid(r_inner, r_outer, n_radii, n_angles, center, False))).max())


def sup_on_circle(f, radius, n_angles=1024, center=0j):
    return float(np.abs(f(center + radius * unit_roots(n_angles))).max())


def sup_boundary_plus_interior(f, radius, n_angles=1024, n_interior=8):
    """Sup of |f| over the boundary circle and ``n_interior`` interior circles.

    An N-analytic polynomial may peak inside the disk, so the boundary alone
    is not enough.
    """
    radii = radius * np.arange(1, n_interior + 2) / (n_interior + 1)
    w = unit_roots(n_angles)
    vals = np.abs(f((radii[:, None] * w[None, :]).ravel()))
    return float(max(vals.max(), abs(f(np.zeros(1))[0])))
