"""Geometry of the spherical world

Agents live inside the solid ball of radius 1.0. Locations are polar
coordinates (r, phi, theta) with phi in [0, 2pi) and theta in [0, pi];
distances are straight line distances between the cartesian images.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import math
from typing import FrozenSet, Iterable, List, NamedTuple, Sequence

import numpy as np

WORLD_RADIUS = 1.0
TWO_PI = 2.0 * math.pi


class PolarCoord(NamedTuple):
    """Location of an agent

        r(float): radial distance, 0 <= r <= 1
        phi(float): azimuthal angle in [0, 2pi)
        theta(float): polar angle in [0, pi]
    """
    r: float
    phi: float
    theta: float

    def cartesian(self) -> tuple:
        """Standard polar to cartesian conversion."""
        sin_theta = math.sin(self.theta)
        return (
            self.r * sin_theta * math.cos(self.phi),
            self.r * sin_theta * math.sin(self.phi),
            self.r * math.cos(self.theta))

    def __str__(self):
        return f"(r={self.r:.4f}, phi={self.phi:.4f}, theta={self.theta:.4f})"


class Neighborhood(NamedTuple):
    """Agents within the radius of operation of a center agent"""
    center: int
    radius: float
    members: FrozenSet[int]


def normalize(r: float, phi: float, theta: float) -> PolarCoord:
    """Bring angles into canonical ranges.

    theta reflects at the poles (and phi turns by pi when it does),
    phi wraps modulo 2pi.
    """

    while theta < 0.0 or theta > math.pi:
        if theta < 0.0:
            theta = -theta
        else:
            theta = TWO_PI - theta
        phi += math.pi

    phi = math.fmod(phi, TWO_PI)
    if phi < 0.0:
        phi += TWO_PI
    if phi >= TWO_PI:   # fmod rounding on tiny negatives
        phi = 0.0

    return PolarCoord(r, phi, theta)


def place_uniform(rng: np.random.Generator) -> PolarCoord:
    """Draw a volume-uniform point of the world ball."""

    r = WORLD_RADIUS * rng.random() ** (1.0 / 3.0)
    phi = TWO_PI * rng.random()
    theta = math.acos(1.0 - 2.0 * rng.random())

    return normalize(r, phi, theta)


def distance(a: PolarCoord, b: PolarCoord) -> float:
    """Straight line distance of two locations."""

    return math.dist(a.cartesian(), b.cartesian())


def perturb_location(c: PolarCoord, delta_phi_max: float, rng: np.random.Generator) -> PolarCoord:
    """Move a location by random angular offsets in [-delta_phi_max, +delta_phi_max].

    The radial distance is never changed.
    """

    if delta_phi_max < 0.0:
        raise ValueError(f"negative angular change limit {delta_phi_max}")

    d_phi = rng.uniform(-delta_phi_max, delta_phi_max)
    d_theta = rng.uniform(-delta_phi_max, delta_phi_max)

    return normalize(c.r, c.phi + d_phi, c.theta + d_theta)


def neighborhood(center, all_agents: Iterable, r_o: float) -> Neighborhood:
    """Agents (other than center) within distance r_o of the center agent.

    Agents are any objects with an ``ident`` and a ``coord`` attribute.
    """

    if r_o <= 0.0:
        raise ValueError(f"radius of operation must be positive, got {r_o}")

    members = frozenset(
        agent.ident for agent in all_agents
        if agent.ident != center.ident and distance(center.coord, agent.coord) <= r_o
    )
    return Neighborhood(center.ident, r_o, members)


def cartesian_array(coords: Sequence[PolarCoord]) -> np.ndarray:
    """Cartesian images of a list of locations as (n, 3) array."""

    if len(coords) == 0:
        return np.zeros((0, 3))

    polar = np.asarray(coords, dtype=float)
    r, phi, theta = polar[:, 0], polar[:, 1], polar[:, 2]
    sin_theta = np.sin(theta)

    return np.column_stack((r * sin_theta * np.cos(phi), r * sin_theta * np.sin(phi), r * np.cos(theta)))


def within_radius(origins: np.ndarray, targets: np.ndarray, radii: np.ndarray) -> List[np.ndarray]:
    """Indices of targets within radii[i] of origins[i], for every origin.

    Vectorized counterpart of neighborhood() used by the round loop.
    """

    if len(origins) == 0:
        return []
    if len(targets) == 0:
        return [np.zeros(0, dtype=int) for _ in range(len(origins))]

    diff = origins[:, np.newaxis, :] - targets[np.newaxis, :, :]
    dist = np.sqrt(np.einsum('ijk,ijk->ij', diff, diff))
    inside = dist <= np.asarray(radii)[:, np.newaxis]

    return [np.flatnonzero(row) for row in inside]
