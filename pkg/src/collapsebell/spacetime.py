"""Minkowski causal geometry in a single fixed Earth-centered inertial frame.

All positions are Cartesian 3-vectors in meters, all times coordinate seconds.
Earth rotation over sub-second windows is ignored (surface speed ~460 m/s moves
a station by <1 m per ms, negligible against the 1e4..1e7 m scales checked here),
so every causal statement below is frame-consistent by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

Vec3 = tuple[float, float, float]

# |s^2| <= LIGHTLIKE_EPS * (c^2 dt^2 + |dx|^2) classifies as lightlike. Lightlike
# counts as causally ordered, never spacelike: the conservative side for verdicts.
LIGHTLIKE_EPS = 1e-12


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants plus the spherical-Earth diameter used for chord geometry."""

    c: float = 2.99792458e8            # speed of light, m/s
    hbar: float = 1.054572e-34         # reduced Planck constant, J s
    G: float = 6.674e-11               # gravitational constant, m^3 kg^-1 s^-2
    nucleon_mass: float = 1.66054e-27  # kg
    earth_diameter: float = 1.24e7     # m; configurable sphere model

    def __post_init__(self) -> None:
        for name in ("c", "hbar", "G", "nucleon_mass", "earth_diameter"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be strictly positive")

    @property
    def earth_radius(self) -> float:
        return self.earth_diameter / 2.0


class CausalKind(Enum):
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"
    SPACELIKE = "spacelike"


class CausalOrder(Enum):
    FIRST_EARLIER = "first-earlier"
    SECOND_EARLIER = "second-earlier"
    SIMULTANEOUS = "simultaneous"


@dataclass(frozen=True)
class CausalClass:
    """Causal relation of an event pair; ordering is meaningless for spacelike pairs."""

    kind: CausalKind
    order: CausalOrder | None

    def __post_init__(self) -> None:
        if self.kind is CausalKind.SPACELIKE and self.order is not None:
            raise ValueError("spacelike pairs carry no ordering tag")
        if self.kind is not CausalKind.SPACELIKE and self.order is None:
            raise ValueError("causally ordered pairs require an ordering tag")

    @property
    def is_spacelike(self) -> bool:
        return self.kind is CausalKind.SPACELIKE

    @property
    def is_ordered(self) -> bool:
        """Timelike or lightlike: one event can influence the other."""
        return self.kind is not CausalKind.SPACELIKE


def _as_vec3(pos) -> Vec3:
    x, y, z = (float(v) for v in pos)
    return (x, y, z)


@dataclass(frozen=True)
class SpacetimeEvent:
    t: float       # coordinate time, s
    pos: Vec3      # meters

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", _as_vec3(self.pos))
        object.__setattr__(self, "t", float(self.t))
        if not math.isfinite(self.t) or not all(math.isfinite(v) for v in self.pos):
            raise ValueError("event components must be finite")


@dataclass(frozen=True)
class StationWindow:
    """A time interval at a fixed spatial location."""

    pos: Vec3
    t_start: float
    t_end: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", _as_vec3(self.pos))
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(self.t_end))
        if not self.t_start <= self.t_end:
            raise ValueError("window requires t_start <= t_end")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class GeoPoint:
    latitude: float   # radians
    longitude: float  # radians
    altitude: float = 0.0  # meters above the sphere surface

    def __post_init__(self) -> None:
        if abs(self.latitude) > math.pi / 2:
            raise ValueError("|latitude| must be <= pi/2")
        if self.altitude < 0:
            raise ValueError("altitude must be >= 0")


def squared_interval(e1: SpacetimeEvent, e2: SpacetimeEvent,
                     k: PhysicalConstants = PhysicalConstants()) -> float:
    """Signed interval s^2 = c^2 dt^2 - |dx|^2 in m^2 (timelike positive)."""
    dt = e2.t - e1.t
    dx = [a - b for a, b in zip(e2.pos, e1.pos)]
    return (k.c * dt) ** 2 - sum(v * v for v in dx)


def causal_class(e1: SpacetimeEvent, e2: SpacetimeEvent,
                 k: PhysicalConstants = PhysicalConstants()) -> CausalClass:
    """Classify an event pair as timelike/lightlike/spacelike with time ordering."""
    dt = e2.t - e1.t
    dx2 = sum((a - b) ** 2 for a, b in zip(e2.pos, e1.pos))
    ct2 = (k.c * dt) ** 2
    s2 = ct2 - dx2
    scale = ct2 + dx2
    if abs(s2) <= LIGHTLIKE_EPS * scale:
        kind = CausalKind.LIGHTLIKE
    elif s2 > 0:
        kind = CausalKind.TIMELIKE
    else:
        return CausalClass(CausalKind.SPACELIKE, None)
    if dt > 0:
        order = CausalOrder.FIRST_EARLIER
    elif dt < 0:
        order = CausalOrder.SECOND_EARLIER
    else:
        order = CausalOrder.SIMULTANEOUS
    return CausalClass(kind, order)


class WindowSeparation(NamedTuple):
    spacelike: bool
    margin: float  # seconds; positive iff every cross-window event pair is spacelike


def windows_spacelike(w1: StationWindow, w2: StationWindow,
                      k: PhysicalConstants = PhysicalConstants()) -> WindowSeparation:
    """Whether every event in w1 is spacelike from every event in w2.

    The extremal pair is endpoint-to-endpoint, so the test reduces to
    max(|w1.t_end - w2.t_start|, |w2.t_end - w1.t_start|) < D/c with
    D the station separation. Margin is D/c minus that worst-case lag;
    co-located stations (D = 0) always fail with margin -max|dt|.
    """
    d = math.dist(w1.pos, w2.pos)
    worst = max(abs(w1.t_end - w2.t_start), abs(w2.t_end - w1.t_start))
    margin = d / k.c - worst
    return WindowSeparation(margin > 0, margin)


def geo_to_event(g: GeoPoint, t: float,
                 k: PhysicalConstants = PhysicalConstants()) -> SpacetimeEvent:
    """Spherical surface point (plus altitude) to a Cartesian event at time t."""
    r = k.earth_radius + g.altitude
    cl = math.cos(g.latitude)
    return SpacetimeEvent(t, (r * cl * math.cos(g.longitude),
                              r * cl * math.sin(g.longitude),
                              r * math.sin(g.latitude)))


def chord_distance(g1: GeoPoint, g2: GeoPoint,
                   k: PhysicalConstants = PhysicalConstants()) -> float:
    """Straight-line (through-Earth) distance; the distance light cones care about."""
    return math.dist(geo_to_event(g1, 0.0, k).pos, geo_to_event(g2, 0.0, k).pos)


def light_time(distance: float, k: PhysicalConstants = PhysicalConstants()) -> float:
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return distance / k.c
