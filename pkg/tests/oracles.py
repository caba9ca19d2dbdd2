"""Independent oracles used by the tests.

These deliberately take different routes from the library code they check:
grid quadrature with exact per-cell kernel integrals for the Newtonian box
integrals, and exhaustive enumeration for the deterministic-strategy CHSH
bound.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from collapsebell.collapse import _box_difference, _overlap_segments


def corner_potential(a: float, b: float, c: float) -> float:
    """Integral of 1/|r| over the box [0,a] x [0,b] x [0,c]."""
    if a == 0.0 or b == 0.0 or c == 0.0:
        return 0.0
    r = math.sqrt(a * a + b * b + c * c)
    return (b * c * math.asinh(a / math.sqrt(b * b + c * c))
            + c * a * math.asinh(b / math.sqrt(c * c + a * a))
            + a * b * math.asinh(c / math.sqrt(a * a + b * b))
            - a * a / 2 * math.atan(b * c / (a * r))
            - b * b / 2 * math.atan(c * a / (b * r))
            - c * c / 2 * math.atan(a * b / (c * r)))


def _corner_potential_grid(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Odd-extended corner potential F with d^3F/dxdydz = 1/|r|."""
    sgn = np.sign(x) * np.sign(y) * np.sign(z)
    a, b, c = np.abs(x), np.abs(y), np.abs(z)
    zero = (a == 0) | (b == 0) | (c == 0)
    a = np.where(zero, 1.0, a)
    b = np.where(zero, 1.0, b)
    c = np.where(zero, 1.0, c)
    r = np.sqrt(a * a + b * b + c * c)
    val = (b * c * np.arcsinh(a / np.sqrt(b * b + c * c))
           + c * a * np.arcsinh(b / np.sqrt(c * c + a * a))
           + a * b * np.arcsinh(c / np.sqrt(a * a + b * b))
           - a * a / 2 * np.arctan(b * c / (a * r))
           - b * b / 2 * np.arctan(c * a / (b * r))
           - c * c / 2 * np.arctan(a * b / (c * r)))
    return np.where(zero, 0.0, sgn * val)


def box_coulomb_oracle(b1, b2, n: int) -> float:
    """Grid quadrature for the box-pair Coulomb integral.

    Reduces to the 3D correlation integral, evaluates the overlap product at
    cell centers (midpoint rule) and the singular kernel exactly per cell via
    corner-potential finite differences, so it stays meaningful for extreme
    aspect ratios.
    """
    edges = []
    lams = []
    for i in range(3):
        knots, _ = _overlap_segments((b1[0][i], b1[1][i]), (b2[0][i], b2[1][i]))
        e = np.linspace(knots[0], knots[3], n + 1)
        centers = (e[:-1] + e[1:]) / 2
        lam = np.maximum(0.0, np.minimum(b1[1][i], b2[1][i] + centers)
                         - np.maximum(b1[0][i], b2[0][i] + centers))
        edges.append(e)
        lams.append(lam)
    ex, ey, ez = np.meshgrid(*edges, indexing="ij")
    f = _corner_potential_grid(ex, ey, ez)
    kernel = (f[1:, 1:, 1:] - f[:-1, 1:, 1:] - f[1:, :-1, 1:] - f[1:, 1:, :-1]
              + f[:-1, :-1, 1:] + f[:-1, 1:, :-1] + f[1:, :-1, :-1] - f[:-1, :-1, :-1])
    lx, ly, lz = np.meshgrid(*lams, indexing="ij")
    return float(np.sum(lx * ly * lz * kernel))


def dp_energy_oracle(m1, m2, constants, n: int) -> float:
    """Difference self-energy via the same signed-piece decomposition but the
    independent grid integrator above."""
    pieces = ([(1.0, b) for b in _box_difference(m1.bounds, m2.bounds)]
              + [(-1.0, b) for b in _box_difference(m2.bounds, m1.bounds)])
    if not pieces:
        return 0.0
    total = 0.0
    for i, (si, bi) in enumerate(pieces):
        for j, (sj, bj) in enumerate(pieces):
            if j < i:
                continue
            factor = 1.0 if i == j else 2.0
            total += factor * si * sj * box_coulomb_oracle(bi, bj, n)
    return constants.G * m1.density * m2.density * total


def max_deterministic_chsh() -> float:
    """Exhaustive |S| maximum over all 16 deterministic two-setting strategies."""
    best = 0.0
    for a1, a2, b1, b2 in product((-1, 1), repeat=4):
        s = a1 * b1 - a1 * b2 + a2 * b1 + a2 * b2
        best = max(best, abs(s))
    return float(best)


def singlet_counts_expected(delta: float, n: int) -> dict[tuple[int, int], float]:
    """Expected joint outcome counts for n singlet trials at angle gap delta."""
    return {(a, b): n * (1.0 - a * b * math.cos(delta)) / 4.0
            for a in (1, -1) for b in (1, -1)}
