"""Disc geometry: Carleson squares, dyadic polar rectangles, pseudohyperbolic
discs and delta-lattices.

Conventions pinned for the whole package:

* arcs are measured in radians, so the arc attached to a point ``a`` has
  width ``1 - |a|`` and the Carleson square ``S(a)`` spans radii
  ``[|a|, 1)``;
* the level-0 dyadic cell is the full disc of radius 1/2 and carries the
  center 1/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    pass


def pseudo_distance(a, z):
    """Mobius-invariant distance |a - z| / |1 - conj(a) z|, in [0, 1)."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    out = np.abs(a - z) / np.abs(1.0 - np.conj(a) * z)
    return float(out) if out.ndim == 0 else out


def mobius(a, z):
    """The involution phi_a(z) = (a - z) / (1 - conj(a) z)."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    out = (a - z) / (1.0 - np.conj(a) * z)
    return complex(out) if out.ndim == 0 else out


def _wrap_angle(theta):
    """Reduce to (-pi, pi]."""
    return np.mod(np.asarray(theta) + math.pi, TWO_PI) - math.pi


@dataclass(frozen=True)
class Arc:
    center_angle: float
    width: float

    def __post_init__(self):
        if not 0.0 < self.width <= TWO_PI:
            raise GeometryError(f"arc width {self.width} outside (0, 2*pi]")

    def contains_angle(self, theta):
        if self.width >= TWO_PI:
            return np.ones(np.shape(theta), dtype=bool) if np.ndim(theta) else True
        d = np.abs(_wrap_angle(np.asarray(theta) - self.center_angle))
        out = d <= self.width / 2.0 + 1e-15
        return bool(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CarlesonSquare:
    arc: Arc
    inner_radius: float

    def __post_init__(self):
        if not 0.0 <= self.inner_radius < 1.0:
            raise GeometryError("inner radius must lie in [0, 1)")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        out = (r >= self.inner_radius) & (r < 1.0) & self.arc.contains_angle(np.angle(z))
        return bool(out) if out.ndim == 0 else out


def interval_of(a) -> Arc:
    """Boundary arc I_a of width 1 - |a| centered at arg a; a != 0."""
    a = complex(a)
    if a == 0:
        raise GeometryError("I_a is undefined at the origin")
    if abs(a) >= 1.0:
        raise GeometryError("point must lie inside the disc")
    return Arc(cmath.phase(a), 1.0 - abs(a))


def carleson_square(a) -> CarlesonSquare:
    a = complex(a)
    return CarlesonSquare(interval_of(a), abs(a))


def boundary_point(a, delta):
    """a_delta = (1 - delta (1 - |a|)) e^{i arg a}; a_1 = a."""
    a = complex(a)
    if a == 0:
        raise GeometryError("a_delta is undefined at the origin")
    if not 0.0 < delta <= 1.0:
        raise GeometryError("delta must lie in (0, 1]")
    return (1.0 - delta * (1.0 - abs(a))) * cmath.exp(1j * cmath.phase(a))


@dataclass(frozen=True)
class PseudoDisc:
    center: complex
    pseudo_radius: float

    def __post_init__(self):
        if abs(self.center) >= 1.0:
            raise GeometryError("center must lie inside the disc")
        if not 0.0 < self.pseudo_radius < 1.0:
            raise GeometryError("pseudohyperbolic radius must lie in (0, 1)")

    @property
    def euclid_center(self) -> complex:
        a, r = self.center, self.pseudo_radius
        return a * (1.0 - r * r) / (1.0 - r * r * abs(a) ** 2)

    @property
    def euclid_radius(self) -> float:
        a, r = self.center, self.pseudo_radius
        return r * (1.0 - abs(a) ** 2) / (1.0 - r * r * abs(a) ** 2)

    def contains(self, z):
        out = pseudo_distance(self.center, z) < self.pseudo_radius
        return bool(out) if np.ndim(out) == 0 else out

    def boundary_points(self, n=64):
        theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return self.euclid_center + self.euclid_radius * np.exp(1j * theta)


def pseudo_disc(a, r) -> PseudoDisc:
    return PseudoDisc(complex(a), float(r))


@dataclass(frozen=True)
class Annulus:
    r_inner: float
    r_outer: float
    arc: Arc | None = None  # None means the full circle

    def __post_init__(self):
        if not 0.0 <= self.r_inner < self.r_outer <= 1.0:
            raise GeometryError("need 0 <= r_inner < r_outer <= 1")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        ok = (r >= self.r_inner) & (r < self.r_outer)
        if self.arc is not None:
            ok = ok & self.arc.contains_angle(np.angle(z))
        return bool(ok) if ok.ndim == 0 else ok


FULL_DISC = Annulus(0.0, 1.0)


@dataclass(frozen=True)
class DyadicRectangle:
    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.index < 2 ** self.level:
            raise GeometryError("bad dyadic level/index")

    @property
    def arc(self) -> Arc:
        width = TWO_PI / 2 ** self.level
        return Arc((self.index + 0.5) * width, width)

    @property
    def r_inner(self) -> float:
        return 1.0 - 2.0 ** (-self.level)

    @property
    def r_outer(self) -> float:
        return 1.0 - 2.0 ** (-self.level - 1)

    @property
    def center(self) -> complex:
        # level 0 is associated with the point 1/2
        if self.level == 0:
            return 0.5 + 0.0j
        return self.r_inner * cmath.exp(1j * self.arc.center_angle)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        if self.level == 0:
            # level-0 cell covers every angle, including the origin
            ok = r < self.r_outer
            return bool(ok) if ok.ndim == 0 else ok
        ok = (r >= self.r_inner) & (r < self.r_outer)
        # half-open angular bins so the cells partition the annulus exactly
        width = TWO_PI / 2 ** self.level
        k = np.floor(np.mod(np.angle(z), TWO_PI) / width).astype(int)
        ok = ok & (k == self.index)
        return bool(ok) if ok.ndim == 0 else ok


def dyadic_rectangles(n_max: int) -> list[DyadicRectangle]:
    """All polar rectangles of levels 0..n_max (2^(n_max+1) - 1 cells)."""
    if n_max < 0:
        raise GeometryError("n_max must be >= 0")
    return [
        DyadicRectangle(n, k) for n in range(n_max + 1) for k in range(2 ** n)
    ]


@dataclass(frozen=True)
class Lattice:
    points: np.ndarray
    delta: float
    depth: int = field(default=0)

    @property
    def separation_bound(self) -> float:
        return self.delta / 5.0

    @property
    def covering_bound(self) -> float:
        return 5.0 * self.delta


def delta_lattice(delta, depth=8, max_points=200_000) -> Lattice:
    """Constructive delta-lattice: rings at fixed pseudohyperbolic spacing.

    Rings advance by the Mobius step rho -> (rho + g)/(1 + g rho) with
    g = 2*delta, and carry equispaced angles at matching pseudo-gaps.  The
    construction covers |z| <= 1 - 2^(-depth); separation and covering are
    validated by the test suite, not assumed.
    """
    if not 0.0 < delta < 0.5:
        raise GeometryError("delta must lie in (0, 0.5)")
    g = 2.0 * delta
    pts = [0.0 + 0.0j]
    rho = 0.0
    target = 1.0 - 2.0 ** (-depth)
    while rho < target:
        rho = (rho + g) / (1.0 + g * rho)
        count = max(4, int(math.ceil(TWO_PI * rho / ((1.0 - rho * rho) * g))))
        if len(pts) + count > max_points:
            raise GeometryError(
                f"lattice for delta={delta} to depth {depth} exceeds the "
                f"{max_points}-point budget"
            )
        offset = TWO_PI * (len(pts) % 7) / 7.0 / count  # stagger rings
        theta = offset + TWO_PI * np.arange(count) / count
        pts.extend(rho * np.exp(1j * theta))
    return Lattice(np.asarray(pts, dtype=complex), float(delta), int(depth))
