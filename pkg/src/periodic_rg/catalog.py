"""Worked example systems used by the tests, the CLI configs and the README."""

import numpy as np

from .model import PeriodicSystem, PlantWithInput

A_EXAMPLE = (
    [[1.0, 0.0], [0.0, 2.0]],
    [[0.8, -0.5], [0.2, 0.5]],
    [[0.0, -0.8], [0.8, 0.0]],
)
# printed as a column in the source example; p = 1 and n = 2 force a row
C_EXAMPLE = ([[1.0, 1.0]],) * 3
S_EXAMPLE = (
    [[1.0], [-1.0]],
    [[1.0], [-1.0]],
    [[10.0 / 7.0], [-10.0 / 7.0]],
)
B_EXAMPLE = ([-2.0, 1.0], [1.0, 0.0], [8.0, -1.0])
EPSILON_EXAMPLE = 0.05


def three_slot_system():
    """Asymptotically stable 2-state, period-3 system (|multipliers| = 0.8)."""
    return PeriodicSystem(A_EXAMPLE, C_EXAMPLE, S_EXAMPLE, d=0)


def three_slot_plant():
    """The same dynamics driven by a scalar reference through B_k, with D_k = 0."""
    return PlantWithInput(A_EXAMPLE, B_EXAMPLE, C_EXAMPLE, [[0.0]] * 3, S_EXAMPLE)


def scalar_plant(a=0.5, b=1.0, c=1.0, d=0.0):
    """First-order LTI plant viewed as a period-1 system, |y| <= 1."""
    return PlantWithInput([[[a]]], [[b]], [[[c]]], [[d]], [[[1.0], [-1.0]]])


def random_plant(rng, period, n, radius=0.8):
    """Random stable single-input periodic plant with symmetric box output bounds."""
    a = []
    for _ in range(period):
        M = rng.normal(size=(n, n))
        a.append(M)
    phi = np.eye(n)
    for M in a:
        phi = M @ phi
    rho = max(abs(np.linalg.eigvals(phi)))
    scale = (radius / rho) ** (1.0 / period) if rho > 0 else 1.0
    a = [scale * M for M in a]
    b = [rng.normal(size=n) for _ in range(period)]
    c = [rng.normal(size=(1, n)) for _ in range(period)]
    d = [[0.0] for _ in range(period)]
    s = []
    for _ in range(period):
        w = rng.uniform(0.5, 2.0)
        s.append([[w], [-w]])
    return PlantWithInput(a, b, c, d, s)
