"""Strictly convex billiard tables parameterized by the tangent angle.

Every table is described by its radius of curvature ``R(phi)``, where ``phi``
is the angle between the counterclockwise tangent and the horizontal axis.
Positions follow from integrating ``(x', y') = R(phi) (cos phi, sin phi)``,
with the integration constant chosen so that ``Gamma(0)`` is the origin and
the table rests on the x-axis there.

All queries accept floats or numpy arrays and broadcast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ZeroChordError

TWO_PI = 2.0 * math.pi


def wrap_angle(phi):
    """Reduce a tangent angle into [0, 2 pi)."""
    out = np.mod(phi, TWO_PI)
    # np.mod can return exactly 2 pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


def circular_distance(a, b, period=TWO_PI):
    """Shortest distance between angles ``a`` and ``b`` on a circle."""
    d = np.mod(np.asarray(a) - np.asarray(b), period)
    return np.minimum(d, period - d)


def signed_angle_diff(a, b):
    """``a - b`` reduced into [-pi, pi)."""
    return np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi


class PlanePoint(NamedTuple):
    x: float | np.ndarray
    y: float | np.ndarray


class OvalTable:
    """Base class for the three table families.

    Subclasses provide ``point_at`` and ``radius_of_curvature``; the bounds
    ``(r_min, r_max, diameter)`` are cached on first access.
    """

    def point_at(self, phi) -> PlanePoint:
        raise NotImplementedError

    def radius_of_curvature(self, phi):
        raise NotImplementedError

    @cached_property
    def bounds(self) -> tuple[float, float, float]:
        return self._bounds()

    @property
    def r_min(self) -> float:
        return self.bounds[0]

    @property
    def r_max(self) -> float:
        return self.bounds[1]

    @property
    def diameter(self) -> float:
        return self.bounds[2]

    def _bounds(self):
        raise NotImplementedError

    def outline(self, n: int = 512) -> np.ndarray:
        """Closed polyline of ``n + 1`` boundary points, shape (n + 1, 2)."""
        phi = np.linspace(0.0, TWO_PI, n + 1)
        x, y = self.point_at(phi)
        return np.column_stack([x, y])


@dataclass(frozen=True)
class Circle(OvalTable):
    radius: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"circle radius must be positive, got {self.radius}")

    def point_at(self, phi):
        return PlanePoint(self.radius * np.sin(phi), self.radius * (1.0 - np.cos(phi)))

    def radius_of_curvature(self, phi):
        return self.radius * np.ones_like(np.asarray(phi, dtype=float))[()]

    def _bounds(self):
        return (self.radius, self.radius, 2.0 * self.radius)


@dataclass(frozen=True)
class Ellipse(OvalTable):
    """Ellipse with eccentricity ``e`` and semi-minor axis 1.

    The major axis is horizontal, so ``phi = 0`` sits at the bottom vertex of
    the minor axis.  Internally the point is ``(A sin s, 1 - cos s)`` with
    ``A = 1/sqrt(1 - e^2)``; the tangent angle satisfies ``tan phi = tan s / A``,
    which inverts in closed form.
    """

    e: float

    def __post_init__(self):
        if not (0.0 <= self.e < 1.0):
            raise ValueError(f"ellipse eccentricity must lie in [0, 1), got {self.e}")

    @property
    def semi_major(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.e * self.e)

    def _norm(self, phi):
        A = self.semi_major
        return np.sqrt(np.cos(phi) ** 2 + (A * np.sin(phi)) ** 2)

    def point_at(self, phi):
        A = self.semi_major
        n = self._norm(phi)
        sin_s = A * np.sin(phi) / n
        cos_s = np.cos(phi) / n
        return PlanePoint(A * sin_s, 1.0 - cos_s)

    def standard_point(self, t):
        """Point for the standard parameter ``(A cos t, sin t)``, shifted like ``point_at``."""
        A = self.semi_major
        return PlanePoint(A * np.cos(t), np.sin(t) + 1.0)

    def radius_of_curvature(self, phi):
        A = self.semi_major
        return A * A / self._norm(phi) ** 3

    def _bounds(self):
        return (math.sqrt(1.0 - self.e**2), 1.0 / (1.0 - self.e**2), 2.0 * self.semi_major)


@dataclass(frozen=True)
class CosineRadius(OvalTable):
    """Perturbed circle with ``R(phi) = 1 + a cos(n phi)``."""

    a: float
    n: int

    def __post_init__(self):
        if not abs(self.a) < 1.0:
            raise ValueError(f"cosine table needs |a| < 1, got a={self.a}")
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"cosine table needs an integer n >= 4, got n={self.n}")

    def point_at(self, phi):
        a, n = self.a, self.n
        p, m = n + 1, n - 1
        x = np.sin(phi) + a * (np.sin(p * phi) / (2 * p) + np.sin(m * phi) / (2 * m))
        y = (1.0 - np.cos(phi)) + 0.5 * a * (
            (1.0 - np.cos(p * phi)) / p - (1.0 - np.cos(m * phi)) / m
        )
        return PlanePoint(x, y)

    def radius_of_curvature(self, phi):
        return 1.0 + self.a * np.cos(self.n * phi)

    def _bounds(self):
        # the diameter is realised by a pair of points with parallel tangents
        def width(phi):
            x0, y0 = self.point_at(phi)
            x1, y1 = self.point_at(phi + math.pi)
            return np.hypot(x1 - x0, y1 - y0)

        grid = np.linspace(0.0, math.pi, 2049)
        w = width(grid)
        k = int(np.argmax(w))
        h = grid[1] - grid[0]
        res = minimize_scalar(
            lambda t: -width(t),
            bounds=(grid[k] - h, grid[k] + h),
            method="bounded",
            options={"xatol": 1e-13},
        )
        d = max(float(w[k]), float(-res.fun))
        return (1.0 - abs(self.a), 1.0 + abs(self.a), d)


def point_at(table: OvalTable, phi) -> PlanePoint:
    return table.point_at(phi)


def radius_of_curvature(table: OvalTable, phi):
    return table.radius_of_curvature(phi)


def chord_length(table: OvalTable, phi0, phi1):
    """Distance between ``Gamma(phi0)`` and ``Gamma(phi1)``.

    Raises ZeroChordError when the two angles coincide mod 2 pi.
    """
    if np.any(circular_distance(phi0, phi1) == 0.0):
        raise ZeroChordError("chord endpoints coincide")
    x0, y0 = table.point_at(phi0)
    x1, y1 = table.point_at(phi1)
    return np.hypot(x1 - x0, y1 - y0)
