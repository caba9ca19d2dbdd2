"""Collapse-time estimators: CSL and GRW rate formulas plus gravitationally
induced (Diosi/Penrose style) collapse from the self-energy of the difference
between two superposed uniform-box mass distributions.

The CSL/GRW estimators are closed-form rate expressions. The gravitational
estimator needs the double Newtonian integral between axis-aligned boxes; it is
evaluated without cancellation by decomposing the difference distribution into
signed disjoint boxes and reducing each box-pair Coulomb integral per axis to
overlap (correlation) functions, leaving a single numerical quadrature over the
polar angle with closed-form radial integrals. This stays accurate for the
extreme sliver aspect ratios (~1e5:1) that nm-scale displacements produce.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spacetime import PhysicalConstants, Vec3

DpVariant = Literal["diosi", "penrose"]


@dataclass(frozen=True)
class CollapseParams:
    """Free parameters of spontaneous-localization models."""

    rate_lambda: float  # collapse rate, 1/s
    length_a: float     # localization length, m

    def __post_init__(self) -> None:
        if not (self.rate_lambda > 0 and self.length_a > 0):
            raise ValueError("rate_lambda and length_a must be strictly positive")


@dataclass(frozen=True)
class ApparatusSpec:
    """Mass-displacing amplifier: a mirror (plus optional attached mass such as a
    piezocrystal) pushed through displacement_d along one of its dimensions."""

    mirror_mass: float                  # kg
    mirror_dims: tuple[float, float, float]  # m
    displacement_d: float               # m
    displacement_axis: int = 2          # index into mirror_dims
    attached_mass: float = 0.0          # kg, co-moving with the mirror
    density: float | None = None        # kg/m^3, derived from mirror if omitted

    def __post_init__(self) -> None:
        object.__setattr__(self, "mirror_dims", tuple(float(v) for v in self.mirror_dims))
        if self.mirror_mass < 0 or self.attached_mass < 0:
            raise ValueError("masses must be >= 0")
        if len(self.mirror_dims) != 3 or any(d <= 0 for d in self.mirror_dims):
            raise ValueError("mirror_dims must be three positive lengths")
        if self.displacement_d < 0:
            raise ValueError("displacement_d must be >= 0")
        if self.displacement_axis not in (0, 1, 2):
            raise ValueError("displacement_axis must be 0, 1 or 2")
        if self.density is not None and self.density <= 0:
            raise ValueError("density must be positive when given")

    @property
    def mirror_volume(self) -> float:
        a, b, c = self.mirror_dims
        return a * b * c

    @property
    def mirror_density(self) -> float:
        return self.density if self.density is not None else self.mirror_mass / self.mirror_volume

    @property
    def mirror_area(self) -> float:
        """Face area perpendicular to the displacement axis."""
        return self.mirror_volume / self.mirror_dims[self.displacement_axis]


@dataclass(frozen=True)
class MassDistribution:
    """Uniform box of mass; spans [offset, offset + dims] per axis."""

    dims: tuple[float, float, float]
    total_mass: float
    offset: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(float(v) for v in self.dims))
        object.__setattr__(self, "offset", tuple(float(v) for v in self.offset))
        if self.total_mass <= 0:
            raise ValueError("total_mass must be > 0")
        if any(d <= 0 for d in self.dims):
            raise ValueError("dims must be positive")

    @property
    def density(self) -> float:
        a, b, c = self.dims
        return self.total_mass / (a * b * c)

    @property
    def bounds(self) -> tuple[Vec3, Vec3]:
        lo = self.offset
        return lo, tuple(lo[i] + self.dims[i] for i in range(3))


@dataclass(frozen=True)
class CollapseEstimate:
    tau: float   # expected collapse time, s; math.inf when no collapse occurs
    model: str   # "csl" | "grw" | "dp-diosi" | "dp-penrose"

    def __post_init__(self) -> None:
        if not (self.tau > 0):
            raise ValueError("collapse time must be positive (or infinite)")


def nucleon_count(mass: float, k: PhysicalConstants = PhysicalConstants()) -> float:
    """Nucleons in a mass, as a real number."""
    if mass < 0:
        raise ValueError("mass must be >= 0")
    return mass / k.nucleon_mass


def sliver_nucleons(spec: ApparatusSpec, k: PhysicalConstants = PhysicalConstants()) -> float:
    """Nucleons in the mirror sliver swept out by the displacement.

    The sliver is the slab of thickness displacement_d that stops overlapping
    the undisplaced mirror; displacements beyond the axis dimension leave no
    overlap, so the whole mirror counts.
    """
    frac = min(spec.displacement_d / spec.mirror_dims[spec.displacement_axis], 1.0)
    return nucleon_count(spec.mirror_mass, k) * frac


def csl_tau(p: CollapseParams, n_sliver: float, area_a: float) -> CollapseEstimate:
    """CSL collapse time A / (4 pi lambda a^2 N^2) for N sliver nucleons and
    mirror face area A."""
    if area_a <= 0:
        raise ValueError("area_a must be > 0")
    if n_sliver < 0:
        raise ValueError("n_sliver must be >= 0")
    if n_sliver == 0:
        return CollapseEstimate(math.inf, "csl")
    tau = area_a / (4.0 * math.pi * p.rate_lambda * p.length_a**2 * n_sliver**2)
    return CollapseEstimate(tau, "csl")


def grw_tau(p: CollapseParams, n_total: float, displacement_d: float) -> CollapseEstimate:
    """GRW collapse time 16 a^2 / (lambda N d^2) for N nucleons displaced by d."""
    if n_total < 0 or displacement_d < 0:
        raise ValueError("n_total and displacement_d must be >= 0")
    if n_total == 0 or displacement_d == 0:
        return CollapseEstimate(math.inf, "grw")
    tau = 16.0 * p.length_a**2 / (p.rate_lambda * n_total * displacement_d**2)
    return CollapseEstimate(tau, "grw")


def grw_effective_displacement(spec: ApparatusSpec) -> tuple[float, float]:
    """Both displacement conventions (d, d/2).

    Treating the superposed states as rigid displacements of the whole system,
    the per-nucleon displacement ranges from 0 to d and averages about d/2;
    rate evaluations in circulation use the full d. Callers pick explicitly.
    """
    return spec.displacement_d, spec.displacement_d / 2.0


def superposition_pair(spec: ApparatusSpec) -> tuple[MassDistribution, MassDistribution]:
    """Undisplaced vs displaced mirror mass distributions (mirror only: the
    attached actuator mass is deliberately excluded, giving the conservative,
    slower gravitational collapse estimate)."""
    shift = [0.0, 0.0, 0.0]
    shift[spec.displacement_axis] = spec.displacement_d
    base = MassDistribution(spec.mirror_dims, spec.mirror_mass)
    moved = MassDistribution(spec.mirror_dims, spec.mirror_mass, tuple(shift))
    return base, moved


# --------------------------------------------------------------------------
# Newtonian double integrals over axis-aligned uniform boxes.
# --------------------------------------------------------------------------

_Interval = tuple[float, float]
_Box = tuple[Vec3, Vec3]


def _overlap_segments(i1: _Interval, i2: _Interval) -> tuple[list[float], list[tuple[float, float]]]:
    """Piecewise-linear correlation lam(u) = |i1 intersect (i2 + u)|.

    Returns the 4 sorted knots and per-segment (alpha, beta) with
    lam(u) = alpha + beta*u on [knot_i, knot_i+1].
    """
    lo1, hi1 = i1
    lo2, hi2 = i2
    k0 = lo1 - hi2
    k3 = hi1 - lo2
    kmid = sorted((lo1 - lo2, hi1 - hi2))
    knots = [k0, kmid[0], kmid[1], k3]
    plateau = min(hi1 - lo1, hi2 - lo2)
    coeffs = [(-k0, 1.0), (plateau, 0.0), (k3, -1.0)]
    return knots, coeffs


def _seg_coeff(u: float, knots: list[float], coeffs: list[tuple[float, float]]) -> tuple[float, float]:
    idx = min(max(bisect_right(knots, u) - 1, 0), 2)
    return coeffs[idx]


def _asinh_prim(m: int, rho: float, w: float) -> float:
    """Antiderivative in rho of rho^m * asinh(w/rho), m in {1,2,3}."""
    if w == 0.0:
        return 0.0
    s = math.sqrt(rho * rho + w * w)
    if rho == 0.0:
        if m == 1:
            return w * abs(w) / 2.0
        if m == 2:
            return 0.0
        return -w * abs(w) ** 3 / 6.0
    q = math.asinh(w / rho)
    if m == 1:
        return rho * rho / 2.0 * q + w * s / 2.0
    if m == 2:
        return rho**3 / 3.0 * q + w / 6.0 * (rho * s - w * w * math.asinh(rho / abs(w)))
    return rho**4 / 4.0 * q + w / 4.0 * (s**3 / 3.0 - w * w * s)


def _sqrt_prim(m: int, rho: float, w: float) -> float:
    """Antiderivative in rho of rho^m * sqrt(rho^2 + w^2), m in {1,2,3}."""
    s = math.sqrt(rho * rho + w * w)
    if m == 1:
        return s**3 / 3.0
    if m == 2:
        if w == 0.0:
            return rho**4 / 4.0
        return rho * s**3 / 4.0 - w * w * rho * s / 8.0 - w**4 / 8.0 * math.asinh(rho / abs(w))
    return s**5 / 5.0 - w * w * s**3 / 3.0


def _ray_box_range(c: float, s: float, rect: tuple[float, float, float, float]) -> tuple[float, float] | None:
    """Radial range of {t*(c,s): t >= 0} inside rect = (u0, u1, v0, v1)."""
    tmin, tmax = 0.0, math.inf
    for d, lo, hi in ((c, rect[0], rect[1]), (s, rect[2], rect[3])):
        if abs(d) < 1e-300:
            if lo > 0.0 or hi < 0.0:
                return None
            continue
        ta, tb = lo / d, hi / d
        if ta > tb:
            ta, tb = tb, ta
        tmin = max(tmin, ta)
        tmax = min(tmax, tb)
    if not tmax > tmin:
        return None
    return tmin, tmax


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def box_coulomb_integral(b1: _Box, b2: _Box, angular_order: int = 48) -> float:
    """Integral of 1/|r - r'| over the box pair (r in b1, r' in b2), in m^5.

    Per-axis reduction replaces the 6D integral by the 3D integral of
    lamx*lamy*lamz / |u| over the correlation support. One axis (the one with
    the narrowest support, for numerical comfort with extreme aspect ratios)
    is integrated in closed form; the remaining plane is done in polar
    coordinates with closed-form radial integrals and Gauss-Legendre nodes
    over the angle, subdivided at every knot corner so each angular segment
    has an analytic integrand.
    """
    lo1, hi1 = b1
    lo2, hi2 = b2
    per_axis = [_overlap_segments((lo1[i], hi1[i]), (lo2[i], hi2[i])) for i in range(3)]
    widths = [knots[3] - knots[0] for knots, _ in per_axis]
    if any(w <= 0 for w in widths):
        raise ValueError("boxes must have positive extent")
    zax = widths.index(min(widths))
    xax, yax = [i for i in range(3) if i != zax]

    kx, cx = per_axis[xax]
    ky, cy = per_axis[yax]
    kz, cz = per_axis[zax]
    zsegs = [(kz[i], kz[i + 1], cz[i][0], cz[i][1])
             for i in range(3) if kz[i + 1] > kz[i]]
    rect = (kx[0], kx[3], ky[0], ky[3])

    # Angular breakpoints: every knot-corner direction plus the axis directions.
    angles = {0.0, math.pi / 2, math.pi, -math.pi / 2, -math.pi}
    for u in kx:
        for v in ky:
            if u != 0.0 or v != 0.0:
                angles.add(math.atan2(v, u))
    bps = sorted(angles)
    segments = [(bps[i], bps[i + 1]) for i in range(len(bps) - 1)]
    segments.append((bps[-1], bps[0] + 2.0 * math.pi))

    nodes, weights = _gauss_legendre(angular_order)
    total = 0.0
    for th_a, th_b in segments:
        half = (th_b - th_a) / 2.0
        if half < 1e-15:
            continue
        mid = (th_b + th_a) / 2.0
        seg_sum = 0.0
        for node, wgt in zip(nodes, weights):
            phi = mid + half * node
            c, s = math.cos(phi), math.sin(phi)
            rng = _ray_box_range(c, s, rect)
            if rng is None:
                continue
            tmin, tmax = rng
            radii = {tmin, tmax}
            for kn in kx[1:3]:
                if abs(c) > 1e-300:
                    r = kn / c
                    if tmin < r < tmax:
                        radii.add(r)
            for kn in ky[1:3]:
                if abs(s) > 1e-300:
                    r = kn / s
                    if tmin < r < tmax:
                        radii.add(r)
            rs = sorted(radii)
            val = 0.0
            for ra, rb in zip(rs, rs[1:]):
                rm = (ra + rb) / 2.0
                ax, bx = _seg_coeff(rm * c, kx, cx)
                ay, by = _seg_coeff(rm * s, ky, cy)
                bx, by = bx * c, by * s
                poly = (ax * ay, ax * by + ay * bx, bx * by)
                for wlo, whi, az, bz in zsegs:
                    for m in (1, 2, 3):
                        cm = poly[m - 1]
                        if cm == 0.0:
                            continue
                        if az != 0.0:
                            df = (_asinh_prim(m, rb, whi) - _asinh_prim(m, rb, wlo)
                                  - _asinh_prim(m, ra, whi) + _asinh_prim(m, ra, wlo))
                            val += cm * az * df
                        if bz != 0.0:
                            dg = (_sqrt_prim(m, rb, whi) - _sqrt_prim(m, rb, wlo)
                                  - _sqrt_prim(m, ra, whi) + _sqrt_prim(m, ra, wlo))
                            val += cm * bz * dg
            seg_sum += wgt * val
        total += half * seg_sum
    return total


def _box_difference(b1: _Box, b2: _Box) -> list[_Box]:
    """Decompose b1 \\ b2 into disjoint axis-aligned boxes (slab peeling)."""
    lo1, hi1 = [list(v) for v in b1]
    lo2, hi2 = b2
    if any(hi1[i] <= lo2[i] or lo1[i] >= hi2[i] for i in range(3)):
        return [(tuple(lo1), tuple(hi1))]
    pieces: list[_Box] = []
    lo, hi = list(lo1), list(hi1)
    for ax in range(3):
        if lo[ax] < lo2[ax]:
            plo, phi = list(lo), list(hi)
            phi[ax] = lo2[ax]
            pieces.append((tuple(plo), tuple(phi)))
            lo[ax] = lo2[ax]
        if hi[ax] > hi2[ax]:
            plo, phi = list(lo), list(hi)
            plo[ax] = hi2[ax]
            pieces.append((tuple(plo), tuple(phi)))
            hi[ax] = hi2[ax]
    return [p for p in pieces if all(p[1][i] > p[0][i] for i in range(3))]


def dp_self_energy(m1: MassDistribution, m2: MassDistribution,
                   k: PhysicalConstants = PhysicalConstants(),
                   angular_order: int = 48) -> float:
    """Gravitational self-energy of the difference of two equal uniform boxes:
    E = U(1,1) + U(2,2) - 2 U(1,2) with U(i,j) = G int int rho_i rho_j / |r-r'|.

    Computed as G rho^2 times the signed pair sum over the disjoint pieces of
    the symmetric difference, which avoids the catastrophic cancellation that
    a direct evaluation of the three U terms suffers for small displacements.
    """
    if not math.isclose(m1.total_mass, m2.total_mass, rel_tol=1e-9):
        raise ValueError("superposed distributions must have equal total mass")
    if m1.dims != m2.dims:
        raise ValueError("superposed distributions must be a rigid displaced pair (equal dims)")
    b1, b2 = m1.bounds, m2.bounds
    plus = _box_difference(b1, b2)
    minus = _box_difference(b2, b1)
    pieces = [(1.0, b) for b in plus] + [(-1.0, b) for b in minus]
    if not pieces:
        return 0.0
    total = 0.0
    for i, (si, bi) in enumerate(pieces):
        for j, (sj, bj) in enumerate(pieces):
            if j < i:
                continue
            val = box_coulomb_integral(bi, bj, angular_order)
            total += (1.0 if i == j else 2.0) * si * sj * val
    return max(k.G * m1.density * m2.density * total, 0.0)


def dp_tau(m1: MassDistribution, m2: MassDistribution, variant: DpVariant = "diosi",
           k: PhysicalConstants = PhysicalConstants(),
           angular_order: int = 48) -> CollapseEstimate:
    """Gravitational collapse time hbar / E_delta (Diosi convention); the
    Penrose variant is a factor of two smaller."""
    if variant not in ("diosi", "penrose"):
        raise ValueError("variant must be 'diosi' or 'penrose'")
    energy = dp_self_energy(m1, m2, k, angular_order)
    if energy == 0.0:
        return CollapseEstimate(math.inf, f"dp-{variant}")
    tau = k.hbar / energy
    if variant == "penrose":
        tau /= 2.0
    return CollapseEstimate(tau, f"dp-{variant}")


# --------------------------------------------------------------------------
# Named model presets addressable from configs and the CLI.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelPreset:
    name: str
    kind: str                      # "csl" | "grw" | "dp"
    params: CollapseParams | None = None
    dp_variant: DpVariant | None = None


MODEL_PRESETS: dict[str, ModelPreset] = {
    "csl-standard": ModelPreset("csl-standard", "csl", CollapseParams(1e-16, 1e-7)),
    "csl-low": ModelPreset("csl-low", "csl", CollapseParams(1e-19, 1e-7)),
    "grw-standard": ModelPreset("grw-standard", "grw", CollapseParams(1e-16, 1e-7)),
    "dp-diosi": ModelPreset("dp-diosi", "dp", dp_variant="diosi"),
    "dp-penrose": ModelPreset("dp-penrose", "dp", dp_variant="penrose"),
}


def model_preset(name: str) -> ModelPreset:
    try:
        return MODEL_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(MODEL_PRESETS))
        raise ValueError(f"unknown collapse model {name!r} (known: {known})") from None


def apparatus_tau(spec: ApparatusSpec, preset: ModelPreset,
                  k: PhysicalConstants = PhysicalConstants()) -> CollapseEstimate:
    """Collapse-time estimate of a named model applied to an amplifier.

    CSL uses the mirror sliver and face area; GRW treats mirror plus attached
    mass as one rigidly displaced system; the gravitational models compare the
    displaced and undisplaced mirror distributions.
    """
    if preset.kind == "csl":
        return csl_tau(preset.params, sliver_nucleons(spec, k), spec.mirror_area)
    if preset.kind == "grw":
        n_total = nucleon_count(spec.mirror_mass + spec.attached_mass, k)
        return grw_tau(preset.params, n_total, spec.displacement_d)
    if preset.kind == "dp":
        base, moved = superposition_pair(spec)
        return dp_tau(base, moved, preset.dp_variant, k)
    raise ValueError(f"unknown model kind {preset.kind!r}")
