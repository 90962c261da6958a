"""Closed-form helpers behind the 1-Guess Greedy+ guarantee.

z(y) is the unique root in [y, 1/2] of  y/z - 1 = ln(z / (1 - y)),
p(x) = x + (1 - x)(1 - z(x / (1 - x))) on [0, 1/3] and
q(y) = 1 - z(y) / (1 + y), which is p under the substitution y = x/(1-x).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .core import DomainError

__all__ = [
    "solve_z",
    "z_prime",
    "p_of",
    "q_of",
    "min_p",
    "P_MIN_CLOSED",
    "Y0_CLOSED",
    "AnalyticReport",
    "analytic_report",
]

P_MIN_CLOSED = (3 - math.log(4)) / (4 - math.log(4))
Y0_CLOSED = (1 - math.log(2)) / (3 - math.log(2))

_Z_FLOOR = 1e-12


def _residual(z, y):
    return y / z - 1 - math.log(z / (1 - y))


def solve_z(y: float) -> float:
    if not 0 <= y <= 0.5:
        raise DomainError(f"z(y) needs y in [0, 1/2], got {y}")
    lo, hi = max(y, _Z_FLOOR), 0.5
    # residual is decreasing in z, >= 0 at z = y and <= 0 at z = 1/2
    if _residual(hi, y) >= 0:
        return hi
    if _residual(lo, y) <= 0:
        return lo
    return bisect(_residual, lo, hi, args=(y,), xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)


def z_prime(y: float) -> float:
    z = solve_z(y)
    return z * (1 - y - z) / ((1 - y) * (z + y))


def q_of(y: float) -> float:
    return 1 - solve_z(y) / (1 + y)


def p_of(x: float) -> float:
    if not 0 <= x <= 1 / 3:
        raise DomainError(f"p(x) needs x in [0, 1/3], got {x}")
    # clamp guards x = 1/3 mapping a hair above 1/2 in floating point
    y = min(x / (1 - x), 0.5)
    return x + (1 - x) * (1 - solve_z(y))


def min_p(points: int = 1001) -> tuple[float, float]:
    """(argmin x, min p) over [0, 1/3]: grid scan refined by bounded Brent."""
    xs = np.linspace(0, 1 / 3, points)
    ps = np.array([p_of(x) for x in xs])
    k = int(np.argmin(ps))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, points - 1)]
    res = minimize_scalar(p_of, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if res.fun < ps[k]:
        return float(res.x), float(res.fun)
    return float(xs[k]), float(ps[k])


@dataclass
class AnalyticReport:
    z0: float
    z_half: float
    z_monotone: bool
    zprime_max_residual: float
    p_at_zero: float
    p_min: float
    p_min_closed: float
    argmin_x: float
    argmin_y: float
    y0_closed: float
    sign_change_y: float
    q_min_y: float
    grid_points: int
    z_grid: list
    p_grid: list

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyticReport":
        return cls(**d)

    def format_text(self, show_grid: int = 11) -> str:
        lines = [
            f"z(0)               {self.z0:.12f}  (1/e = {1 / math.e:.12f})",
            f"z(1/2)             {self.z_half:.12f}",
            f"z non-decreasing   {str(self.z_monotone).lower()}",
            f"z' max residual    {self.zprime_max_residual:.3e}",
            f"p(0)               {self.p_at_zero:.12f}",
            f"min p              {self.p_min:.12f}  (closed form {self.p_min_closed:.12f})",
            f"argmin x           {self.argmin_x:.9f}",
            f"argmin y           {self.argmin_y:.9f}  (closed form {self.y0_closed:.9f})",
            f"2z+y-1 sign change {self.sign_change_y:.9f}",
            f"q grid argmin y    {self.q_min_y:.9f}",
        ]
        n = len(self.z_grid)
        idx = np.linspace(0, n - 1, min(show_grid, n)).astype(int)
        lines.append("y          z(y)          x          p(x)")
        for i in idx:
            y = 0.5 * i / (n - 1)
            x = (1 / 3) * i / (n - 1)
            lines.append(f"{y:.4f}  {self.z_grid[i]:.10f}  {x:.4f}  {self.p_grid[i]:.10f}")
        return "\n".join(lines)


def analytic_report(points: int = 1000, h: float = 1e-5) -> AnalyticReport:
    ys = np.linspace(0, 0.5, points)
    zs = np.array([solve_z(y) for y in ys])

    # centered differences on interior nodes, so y +- h stays in range
    interior = ys[(ys - h >= 0) & (ys + h <= 0.5)]
    res = 0.0
    for y in interior:
        fd = (solve_z(y + h) - solve_z(y - h)) / (2 * h)
        res = max(res, abs(fd - z_prime(y)))

    xs = np.linspace(0, 1 / 3, points)
    ps = np.array([p_of(x) for x in xs])
    ax, pm = min_p()

    s = 2 * zs + ys - 1
    flip = int(np.argmax(s > 0))  # first positive entry
    sign_y = float(0.5 * (ys[flip - 1] + ys[flip])) if flip > 0 else float("nan")
    qs = np.array([1 - z / (1 + y) for y, z in zip(ys, zs)])

    return AnalyticReport(
        z0=float(zs[0]),
        z_half=float(zs[-1]),
        z_monotone=bool(np.all(np.diff(zs) >= 0)),
        zprime_max_residual=float(res),
        p_at_zero=float(ps[0]),
        p_min=pm,
        p_min_closed=P_MIN_CLOSED,
        argmin_x=ax,
        argmin_y=ax / (1 - ax),
        y0_closed=Y0_CLOSED,
        sign_change_y=sign_y,
        q_min_y=float(ys[int(np.argmin(qs))]),
        grid_points=points,
        z_grid=[float(z) for z in zs],
        p_grid=[float(p) for p in ps],
    )
