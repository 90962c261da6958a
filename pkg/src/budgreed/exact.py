"""Brute-force optima, empirical approximation ratios and random instances."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .core import CoverageOracle, DomainError, Instance, ModularOracle, ResidualOracle, fits
from .greedy import run_algorithm

__all__ = [
    "SizeError",
    "brute_force_opt",
    "RatioReport",
    "measure_ratio",
    "random_instance",
    "FAMILIES",
    "PROFILES",
    "ratio_batch",
    "summarize",
    "write_csv",
    "query_count_instance",
    "query_count_table",
]

DEFAULT_CAP = 22
FAMILIES = ("coverage", "modular")
PROFILES = ("uniform", "harmonic", "heavy-one")
CSV_COLUMNS = ("seed", "family", "n", "profile", "algorithm", "value", "opt", "ratio")


class SizeError(ValueError):
    pass


def _base_view(instance: Instance):
    """(base oracle, kept ids) when the oracle is a plain restriction of a shipped kind."""
    o = instance.oracle
    keep = list(range(instance.n))
    if isinstance(o, ResidualOracle):
        if o.guess:
            return None, None
        keep = list(o.keep)
        o = o.base
    if isinstance(o, (ModularOracle, CoverageOracle)):
        return o, keep
    return None, None


def _dfs_opt(instance: Instance):
    # subsets in lexicographic order of their sorted tuples; strict > keeps the smallest on ties
    costs, B, ev = instance.costs, instance.budget, instance.oracle.eval
    best_set, best_val = (), ev(())
    stack = [((), 0.0, 0)]
    while stack:
        S, c, start = stack.pop()
        for v in range(instance.n - 1, start - 1, -1):
            if fits(c + costs[v], B):
                stack.append((S + (v,), c + costs[v], v + 1))
        if S:
            val = ev(S)
            if val > best_val:
                best_set, best_val = S, val
    return best_set


def brute_force_opt(instance: Instance, cap: int = DEFAULT_CAP, force=None) -> tuple[frozenset, float]:
    """Maximum-value feasible set, ties to the lexicographically smallest set.

    Modular and coverage oracles (universe <= 64) go through the compiled
    subset kernels; anything else is enumerated depth-first with cost pruning.
    The returned value is always a fresh oracle evaluation of the set.
    """
    n = instance.n
    if n > cap:
        raise SizeError(f"brute force refused: n={n} exceeds cap {cap}")
    base, keep = _base_view(instance)
    mask = None
    if isinstance(base, ModularOracle):
        w = np.array([base.weights[v] for v in keep])
        mask, _ = kernels.brute_force_modular(instance.costs, w, instance.budget, force)
    elif isinstance(base, CoverageOracle) and len(base.weights) <= 64:
        cover = np.array([base.masks[v] for v in keep], dtype=np.uint64)
        tables = np.array(base._chunks if base._chunks else [[0.0] * 256])
        mask, _ = kernels.brute_force_coverage(instance.costs, cover, tables, instance.budget, force)
    if mask is None:
        S = frozenset(_dfs_opt(instance))
    else:
        S = frozenset(v for v in range(n) if mask >> v & 1)
    return S, instance.oracle.eval(S)


@dataclass
class RatioReport:
    instance_id: str
    opt_value: float
    opt_set: frozenset
    values: dict = field(default_factory=dict)
    ratios: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "instance_id": self.instance_id,
            "opt_value": self.opt_value,
            "opt_set": sorted(self.opt_set),
            "values": dict(self.values),
            "ratios": dict(self.ratios),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["instance_id"], d["opt_value"], frozenset(d["opt_set"]), dict(d["values"]), dict(d["ratios"]))


def measure_ratio(instance: Instance, algorithms: Sequence[str], instance_id: str = "", cap: int = DEFAULT_CAP,
                  opt: tuple[frozenset, float] | None = None) -> RatioReport:
    S, fopt = opt if opt is not None else brute_force_opt(instance, cap)
    rep = RatioReport(instance_id, fopt, S)
    for name in algorithms:
        val = run_algorithm(name, instance).value
        rep.values[name] = val
        # an all-zero objective makes every algorithm optimal
        rep.ratios[name] = 1.0 if fopt == 0 else val / fopt
    return rep


_FAMILY_CODE = {"coverage": 1, "modular": 2}
_PROFILE_CODE = {"uniform": 1, "harmonic": 2, "heavy-one": 3}


def random_instance(family: str, n: int, seed: int, profile: str = "uniform") -> Instance:
    """Deterministic random instance.

    Values are small integers so every oracle sum is exact in floating point.
    Profiles: ``uniform`` (unit costs, integer budget), ``harmonic`` (costs
    1/(1+rank) for a random rank permutation, budget 1) and ``heavy-one``
    (one element of cost close to the budget and large value, the rest cheap).
    """
    if family not in _FAMILY_CODE:
        raise DomainError(f"unknown family {family!r}")
    if profile not in _PROFILE_CODE:
        raise DomainError(f"unknown cost profile {profile!r}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng([seed, _FAMILY_CODE[family], _PROFILE_CODE[profile], n])

    if profile == "uniform":
        costs = np.ones(n)
        budget = float(rng.integers(1, max(2, n // 3) + 1))
    elif profile == "harmonic":
        costs = 1.0 / (1.0 + rng.permutation(n))
        budget = 1.0
    else:
        costs = rng.uniform(0.05, 0.35, n)
        budget = 1.0
    heavy = int(rng.integers(n)) if profile == "heavy-one" else -1
    if heavy >= 0:
        costs[heavy] = rng.uniform(0.9, 1.0)

    if family == "modular":
        w = rng.integers(1, 101, n).astype(float)
        if heavy >= 0:
            w[heavy] = float(np.floor(0.6 * (w.sum() - w[heavy]))) + 1
        oracle = ModularOracle(w)
    else:
        U = min(64, 3 * n)
        uw = rng.integers(1, 11, U).astype(float)
        covers = []
        for _ in range(n):
            k = int(rng.integers(1, max(2, U // 4) + 1))
            covers.append(sorted(rng.choice(U, size=k, replace=False).tolist()))
        if heavy >= 0:
            covers[heavy] = sorted(rng.choice(U, size=max(1, U // 2), replace=False).tolist())
        oracle = CoverageOracle(uw, covers)
    return Instance(oracle, costs.tolist(), budget)


def _batch_job(args):
    family, n, seed, profile, algorithms, cap = args
    inst = random_instance(family, n, seed, profile)
    rep = measure_ratio(inst, algorithms, f"{family}-{profile}-n{n}-s{seed}", cap)
    return [
        {"seed": seed, "family": family, "n": n, "profile": profile, "algorithm": a,
         "value": rep.values[a], "opt": rep.opt_value, "ratio": rep.ratios[a]}
        for a in algorithms
    ]


def ratio_batch(family: str, n: int, seeds: Iterable[int], profile: str, algorithms: Sequence[str],
                workers: int = 1, cap: int = DEFAULT_CAP) -> list[dict]:
    """One row per (seed, algorithm), in seed order whatever the worker count."""
    jobs = [(family, n, s, profile, tuple(algorithms), cap) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_batch_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        parts = [_batch_job(j) for j in jobs]
    return [row for part in parts for row in part]


def summarize(rows: Sequence[dict]) -> list[dict]:
    """min and mean ratio per (family, n, profile, algorithm), first-seen order."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["family"], r["n"], r["profile"], r["algorithm"]), []).append(r["ratio"])
    out = []
    for (fam, n, prof, alg), ratios in groups.items():
        for stat, v in (("min", min(ratios)), ("mean", math.fsum(ratios) / len(ratios))):
            out.append({"seed": stat, "family": fam, "n": n, "profile": prof, "algorithm": alg,
                        "value": "", "opt": "", "ratio": v})
    return out


def write_csv(rows: Sequence[dict], fh=None) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue() if fh is None else ""


def query_count_instance(n: int, seed: int = 0, budget: int = 4) -> Instance:
    """Modular instance with unit costs and integer weights used by the query-count table."""
    rng = np.random.default_rng([seed, 7, n])
    w = rng.integers(1, 1001, n).astype(float)
    return Instance(ModularOracle(w), [1.0] * n, float(budget))


def query_count_table(ns: Sequence[int] = (50, 100, 200, 400), ks: Sequence[int] = (0, 2, 3),
                      seed: int = 0, budget: int = 4, force=None) -> list[dict]:
    """Oracle queries made by plain greedy (k=0) and k-guess plain greedy, per n.

    Counts come from the compiled counting kernel, which replays the generic
    engine's query accounting on modular instances.
    """
    rows = []
    for n in ns:
        inst = query_count_instance(n, seed, budget)
        w = np.array(inst.oracle.weights)
        for k in ks:
            val, q = kernels.kguess_query_count(w, np.array(inst.costs), inst.budget, k, force)
            rows.append({"n": n, "driver": "plain-greedy" if k == 0 else f"k-guess:{k}:plain-greedy",
                         "queries": q, "value": val})
    return rows
