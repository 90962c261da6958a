"""Certified lower bound on the approximation ratio of Greedy.

The recurrence m(i) lower-bounds the greedy value curve at budget i*delta
for one pair of cost estimates (c~(r), c~(r')).  Certifying a ratio rho means
showing m(1/delta) >= rho for every estimate pair on the delta grid.  All
divisions round down to multiples of 1/D, so a positive answer is a proof
and not a floating point accident.

Two evaluation paths exist:

* ``m_series``: scalar reference using :class:`NonNegRational`, with an exact
  mode (``grid=None``) that never rounds.
* ``certify``: integer-numerator kernels over all pairs at once (numba,
  numpy, or python-int object arrays when int64 could overflow).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import kernels
from .rational import NonNegRational, lb_div, parse_rational

__all__ = [
    "BoundParameterError",
    "SeriesParams",
    "m_series",
    "m_sequence",
    "enumerate_pairs",
    "pair_count",
    "pair_arrays",
    "CertificateReport",
    "certify",
    "sweep_rho",
]

DEFAULT_GRID = 10**9


class BoundParameterError(ValueError):
    pass


def _inverse_int(delta) -> int:
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise BoundParameterError(f"delta must lie in (0, 1), got {delta}")
    if delta.numerator != 1:
        raise BoundParameterError(f"1/delta must be an integer, got delta={delta}")
    return delta.denominator


def _check_rho(rho) -> NonNegRational:
    rho = parse_rational(rho)
    if not 0 < rho < Fraction(1, 2):
        raise BoundParameterError(f"rho must lie in (0, 1/2), got {rho}")
    return rho


@dataclass(frozen=True)
class SeriesParams:
    rho: NonNegRational
    delta: NonNegRational
    ctr: NonNegRational
    ctr2: NonNegRational

    def __post_init__(self):
        try:
            for name in ("rho", "delta", "ctr", "ctr2"):
                object.__setattr__(self, name, parse_rational(getattr(self, name)))
        except ValueError as e:
            raise BoundParameterError(str(e)) from None
        _check_rho(self.rho)
        _inverse_int(self.delta)
        if not self.ctr + self.ctr2 < 1:
            raise BoundParameterError(f"need ctr + ctr2 < 1, got {self.ctr} + {self.ctr2}")

    @property
    def steps(self) -> int:
        return self.delta.denominator


def m_sequence(params: SeriesParams, grid: int | None = DEFAULT_GRID) -> list[NonNegRational]:
    """[m(0), ..., m(1/delta)].  ``grid=None`` evaluates exactly."""
    if grid is not None and (not isinstance(grid, int) or grid < 1):
        raise BoundParameterError(f"grid must be a positive integer or None, got {grid!r}")
    rho, d, cr, cr2 = params.rho, params.delta, params.ctr, params.ctr2
    N = params.steps
    one = NonNegRational(1)

    def div(a, b):
        return NonNegRational(a / b) if grid is None else lb_div(a, b, grid)

    lim1 = N * (one - cr) - 1
    lim2 = N * (one - cr2) - 1
    lim3 = N * (cr + cr2)
    rest1 = one - cr
    rest3 = one - cr - cr2
    m = NonNegRational(0)
    out = [m]
    for i in range(1, N + 1):
        best = m
        if i <= lim1:
            best = max(best, div(m + d, one + d))
        if i <= lim2:
            best = max(best, div(rest1 * m + d * (one - rho), rest1 + d))
        if i <= lim3:
            best = max(best, div(rest3 * m + d * (one - 2 * rho), rest3 + d))
        m = best
        out.append(m)
    return out


def m_series(params: SeriesParams, grid: int | None = DEFAULT_GRID) -> NonNegRational:
    """m(1/delta) for one estimate pair."""
    return m_sequence(params, grid)[-1]


def pair_count(delta) -> int:
    N = _inverse_int(delta)
    # j ranges over 0..ceil(N/2)-1, j' over j..N-1-j
    return sum(N - 2 * j for j in range((N + 1) // 2))


def pair_arrays(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid numerators (j_r, j_r2) of every pair, oriented as (max, min)."""
    js, jps = [], []
    for j in range((N + 1) // 2):
        jp = np.arange(j, N - j, dtype=np.int64)
        js.append(np.full(len(jp), j, dtype=np.int64))
        jps.append(jp)
    if not js:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(jps), np.concatenate(js)


def enumerate_pairs(delta) -> Iterator[tuple[NonNegRational, NonNegRational]]:
    """Yield (c~(r), c~(r')) for every grid pair j <= j', j + j' < 1/delta.

    The larger estimate is always returned first.
    """
    N = _inverse_int(delta)
    for j in range((N + 1) // 2):
        for jp in range(j, N - j):
            yield NonNegRational(jp, N), NonNegRational(j, N)


@dataclass(frozen=True)
class CertificateReport:
    rho: str
    delta: str
    grid: int | None
    pair_count: int
    min_final_m: str
    argmin: tuple[str, str]
    bound: str
    certified: bool
    backend: str
    wall_time: float

    def deterministic_dict(self) -> dict:
        d = self.to_dict()
        d.pop("wall_time")
        return d

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmin"] = list(self.argmin)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CertificateReport":
        d = dict(d)
        d["argmin"] = tuple(d["argmin"])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def format_text(self) -> str:
        mode = "exact" if self.grid is None else f"1/{self.grid}"
        return "\n".join(
            [
                f"rho            {self.rho}",
                f"delta          {self.delta}",
                f"grid           {mode}",
                f"pairs          {self.pair_count}",
                f"min m(1/delta) {self.min_final_m} (~{float(Fraction(self.min_final_m)):.9f})",
                f"argmin pair    c~(r)={self.argmin[0]} c~(r')={self.argmin[1]}",
                f"bound          {self.bound}",
                f"certified      {str(self.certified).lower()}",
                f"backend        {self.backend}",
                f"wall time      {self.wall_time:.3f}s",
            ]
        )


def _exact_finals(rho, N, jr, jr2):
    delta = NonNegRational(1, N)
    return [
        m_series(SeriesParams(rho, delta, NonNegRational(int(a), N), NonNegRational(int(b), N)), None)
        for a, b in zip(jr, jr2)
    ]


def certify(rho, delta, grid: int | None = DEFAULT_GRID, workers: int = 1, force=None) -> CertificateReport:
    """Check that m(1/delta) >= rho for every pair in C(delta).

    ``grid=None`` runs the exact (unrounded) mode, which is only practical
    for coarse delta.  ``force`` selects the kernel (None: use numba when
    available, "numba" or "numpy").
    """
    rho = _check_rho(rho)
    N = _inverse_int(delta)
    if workers < 1:
        raise BoundParameterError(f"workers must be >= 1, got {workers}")
    if grid is not None and (not isinstance(grid, int) or grid < 1):
        raise BoundParameterError(f"grid must be a positive integer or None, got {grid!r}")
    t0 = time.perf_counter()
    jr, jr2 = pair_arrays(N)
    P = len(jr)
    bounds = np.linspace(0, P, min(workers, max(P, 1)) + 1).astype(int)
    chunks = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]

    if grid is None:
        def run(lo_hi):
            lo, hi = lo_hi
            return _exact_finals(rho, N, jr[lo:hi], jr2[lo:hi]), "exact"
    else:
        a, b = rho.numerator, rho.denominator

        def run(lo_hi):
            lo, hi = lo_hi
            return kernels.m_grid_final(jr[lo:hi], jr2[lo:hi], N, grid, a, b, force=force)

    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    backend = parts[0][1] if parts else "none"

    if grid is None:
        finals = [m for part, _ in parts for m in part]
        # first minimum in enumeration order
        best_i = min(range(P), key=lambda i: (finals[i], i))
        min_m = finals[best_i]
    else:
        ks = np.concatenate([part for part, _ in parts])
        best_i = int(np.argmin(ks))
        min_m = NonNegRational(int(ks[best_i]), grid)
    bound = min(rho, min_m)
    return CertificateReport(
        rho=str(rho),
        delta=str(NonNegRational(1, N)),
        grid=grid,
        pair_count=P,
        min_final_m=str(min_m),
        argmin=(str(NonNegRational(int(jr[best_i]), N)), str(NonNegRational(int(jr2[best_i]), N))),
        bound=str(bound),
        certified=bound >= rho,
        backend=backend,
        wall_time=time.perf_counter() - t0,
    )


def sweep_rho(delta, grid: int = DEFAULT_GRID, step=Fraction(1, 1000), force=None):
    """Largest rho on the ``step`` grid certified at this delta, plus every verdict.

    Returns ``(rho_star, verdicts)`` where verdicts maps each tried rho to its
    certified flag.  rho_star is None if nothing certifies.
    """
    step = Fraction(step)
    verdicts = {}
    k = 1
    while step * k < Fraction(1, 2):
        rho = NonNegRational(step * k)
        verdicts[rho] = certify(rho, delta, grid, force=force).certified
        k += 1
    ok = [r for r, c in verdicts.items() if c]
    return (max(ok) if ok else None), verdicts
