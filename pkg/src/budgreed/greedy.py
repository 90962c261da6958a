"""Density-greedy algorithms for budgeted monotone submodular maximization.

Three return rules share one greedy loop:

* ``plain_greedy`` returns the final greedy set S_l,
* ``greedy`` returns the best of S_l and every feasible singleton,
* ``greedy_plus`` returns the best of S_l and every feasible one-element
  augmentation S_i + v of a proper prefix (i < l).

``k_guess`` enumerates size-k seed sets, runs an inner algorithm on each
residual instance, and also considers every feasible set with fewer than k
elements.  ``threshold_*`` variants replace the exact arg-max with a
descending-threshold scan.

Ties are broken towards the lowest element id; among return-rule candidates
the final greedy set wins ties, then candidates in enumeration order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .core import DomainError, Instance, SetValue, fits, residual

__all__ = [
    "ParameterError",
    "Step",
    "Trajectory",
    "AlgorithmResult",
    "GuessConfig",
    "plain_greedy",
    "greedy",
    "greedy_plus",
    "threshold_plain_greedy",
    "threshold_greedy",
    "threshold_greedy_plus",
    "k_guess",
    "g_of",
    "delta_g",
    "resolve",
    "run_algorithm",
    "check_rate_bound",
]


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    element: int
    cost: float   # c(S_{i+1})
    value: float  # f(S_{i+1})


@dataclass
class Trajectory:
    budget: float
    initial_value: float
    steps: list = field(default_factory=list)
    initial_set: tuple = ()
    initial_cost: float = 0.0

    def __len__(self):
        return len(self.steps)

    @property
    def final_value(self) -> float:
        return self.steps[-1].value if self.steps else self.initial_value

    @property
    def final_cost(self) -> float:
        return self.steps[-1].cost if self.steps else self.initial_cost

    @property
    def elements(self) -> list:
        return [s.element for s in self.steps]

    def prefix(self, i: int) -> frozenset:
        """S_i as a set."""
        return frozenset(self.initial_set).union(s.element for s in self.steps[:i])

    def cost_at(self, i: int) -> float:
        return self.initial_cost if i == 0 else self.steps[i - 1].cost

    def value_at(self, i: int) -> float:
        return self.initial_value if i == 0 else self.steps[i - 1].value

    def to_dict(self):
        return {
            "budget": self.budget,
            "initial_value": self.initial_value,
            "initial_set": list(self.initial_set),
            "initial_cost": self.initial_cost,
            "steps": [[s.element, s.cost, s.value] for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["budget"], d["initial_value"], [Step(int(e), c, v) for e, c, v in d["steps"]],
                   tuple(d["initial_set"]), d["initial_cost"])


@dataclass
class AlgorithmResult:
    algorithm: str
    solution: SetValue
    trajectory: Trajectory
    candidates_examined: int
    oracle_queries: int
    winner: str  # final-greedy-set | singleton | augmented-prefix | guess-augmented | small-solution
    guess: tuple = ()

    @property
    def value(self) -> float:
        return self.solution.value

    @property
    def members(self) -> frozenset:
        return self.solution.members

    def to_dict(self):
        return {
            "algorithm": self.algorithm,
            "solution": self.solution.to_dict(),
            "trajectory": self.trajectory.to_dict(),
            "candidates_examined": self.candidates_examined,
            "oracle_queries": self.oracle_queries,
            "winner": self.winner,
            "guess": list(self.guess),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["algorithm"], SetValue.from_dict(d["solution"]), Trajectory.from_dict(d["trajectory"]),
                   d["candidates_examined"], d["oracle_queries"], d["winner"], tuple(d["guess"]))


@dataclass(frozen=True)
class GuessConfig:
    k: int
    inner: str = "plain-greedy"
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")


class _Counted:
    """Counts the queries one algorithm run makes, independent of other users of the oracle."""

    __slots__ = ("oracle", "queries")

    def __init__(self, oracle):
        self.oracle = oracle
        self.queries = 0

    def __call__(self, S):
        self.queries += 1
        return self.oracle.eval(S)


# -- greedy loops ---------------------------------------------------------------

def _greedy_loop(instance: Instance, ev: _Counted) -> Trajectory:
    costs, B = instance.costs, instance.budget
    S = frozenset()
    val = ev(S)
    cost = 0.0
    traj = Trajectory(B, val)
    unpicked = list(range(instance.n))
    while True:
        best, best_d, best_val = -1, -math.inf, 0.0
        # the loop condition is re-tested over all of V - S_i every iteration
        for v in unpicked:
            if not fits(cost + costs[v], B):
                continue
            fv = ev(S | {v})
            d = (fv - val) / costs[v]
            if d > best_d:
                best, best_d, best_val = v, d, fv
        if best < 0:
            return traj
        S = S | {best}
        cost += costs[best]
        val = best_val
        unpicked.remove(best)
        traj.steps.append(Step(best, cost, val))


def _threshold_loop(instance: Instance, ev: _Counted, eps: float) -> Trajectory:
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    costs, B, n = instance.costs, instance.budget, instance.n
    S = frozenset()
    val = ev(S)
    cost = 0.0
    traj = Trajectory(B, val)
    if n == 0:
        return traj
    d_max = max((ev(frozenset((v,))) - val) / costs[v] for v in range(n))
    tau = d_max
    floor = eps / n * d_max
    while True:
        for v in range(n):
            if v in S or not fits(cost + costs[v], B):
                continue
            fv = ev(S | {v})
            if (fv - val) / costs[v] >= tau:
                S = S | {v}
                cost += costs[v]
                val = fv
                traj.steps.append(Step(v, cost, val))
        if d_max <= 0 or not any(v not in S and fits(cost + costs[v], B) for v in range(n)):
            return traj
        tau *= 1 - eps
        if tau < floor:
            return traj


# -- return rules ---------------------------------------------------------------

def _finish(name, instance, ev, traj, rule) -> AlgorithmResult:
    costs, B = instance.costs, instance.budget
    best_set = traj.prefix(len(traj))
    best_val = traj.final_value
    winner = "final-greedy-set"
    examined = 1
    if rule == "greedy":
        for v in range(instance.n):
            if not fits(costs[v], B):
                continue
            examined += 1
            fv = ev(frozenset((v,)))
            if fv > best_val:
                best_set, best_val, winner = frozenset((v,)), fv, "singleton"
    elif rule == "greedy-plus":
        for i in range(len(traj)):
            Si, ci = traj.prefix(i), traj.cost_at(i)
            for v in range(instance.n):
                if v in Si or not fits(ci + costs[v], B):
                    continue
                examined += 1
                fv = ev(Si | {v})
                if fv > best_val:
                    best_set, best_val, winner = Si | {v}, fv, "augmented-prefix"
    sol = SetValue(best_set, instance.cost(best_set), best_val)
    return AlgorithmResult(name, sol, traj, examined, ev.queries, winner)


def plain_greedy(instance: Instance) -> AlgorithmResult:
    ev = _Counted(instance.oracle)
    return _finish("plain-greedy", instance, ev, _greedy_loop(instance, ev), "plain-greedy")


def greedy(instance: Instance) -> AlgorithmResult:
    ev = _Counted(instance.oracle)
    return _finish("greedy", instance, ev, _greedy_loop(instance, ev), "greedy")


def greedy_plus(instance: Instance) -> AlgorithmResult:
    ev = _Counted(instance.oracle)
    return _finish("greedy-plus", instance, ev, _greedy_loop(instance, ev), "greedy-plus")


def threshold_plain_greedy(instance: Instance, eps: float) -> AlgorithmResult:
    """Descending-threshold plain greedy.

    The threshold starts at the best singleton density d_max and shrinks by a
    factor (1 - eps) per pass; each pass adds, in id order, every fitting
    element whose current density reaches the threshold.  Stops once the
    threshold drops below eps/n * d_max or nothing fits.
    """
    ev = _Counted(instance.oracle)
    return _finish(f"threshold:{eps:g}:plain-greedy", instance, ev, _threshold_loop(instance, ev, eps), "plain-greedy")


def threshold_greedy(instance: Instance, eps: float) -> AlgorithmResult:
    ev = _Counted(instance.oracle)
    return _finish(f"threshold:{eps:g}:greedy", instance, ev, _threshold_loop(instance, ev, eps), "greedy")


def threshold_greedy_plus(instance: Instance, eps: float) -> AlgorithmResult:
    ev = _Counted(instance.oracle)
    return _finish(f"threshold:{eps:g}:greedy-plus", instance, ev, _threshold_loop(instance, ev, eps), "greedy-plus")


# -- algorithm names ------------------------------------------------------------

_BASE = {"plain-greedy": plain_greedy, "greedy": greedy, "greedy-plus": greedy_plus}
_THRESH = {"plain-greedy": threshold_plain_greedy, "greedy": threshold_greedy, "greedy-plus": threshold_greedy_plus}


def _resolve_single(name: str) -> Callable[[Instance], AlgorithmResult]:
    if name in _BASE:
        return _BASE[name]
    parts = name.split(":")
    if parts[0] == "threshold" and len(parts) == 3 and parts[2] in _THRESH:
        try:
            eps = float(parts[1])
        except ValueError:
            raise ParameterError(f"bad eps in algorithm {name!r}") from None
        if not 0 < eps < 1:
            raise ParameterError(f"eps must lie in (0, 1) in {name!r}")
        fn = _THRESH[parts[2]]
        return lambda inst: fn(inst, eps)
    raise ParameterError(f"unknown algorithm {name!r}")


def resolve(name: str, workers: int = 1) -> Callable[[Instance], AlgorithmResult]:
    """Map an algorithm name to a callable.

    Names: ``plain-greedy``, ``greedy``, ``greedy-plus``,
    ``threshold:<eps>:<base>`` and ``k-guess:<k>:<inner>`` where inner is any
    non-guessing name.
    """
    if name.startswith("k-guess:"):
        _, k, inner = name.split(":", 2)
        try:
            k = int(k)
        except ValueError:
            raise ParameterError(f"bad k in algorithm {name!r}") from None
        _resolve_single(inner)  # validate eagerly
        cfg = GuessConfig(k, inner, workers)
        return lambda inst: k_guess(inst, cfg)
    return _resolve_single(name)


def run_algorithm(name: str, instance: Instance, workers: int = 1) -> AlgorithmResult:
    return resolve(name, workers)(instance)


# -- partial enumeration ----------------------------------------------------------

def _guess_block(instance: Instance, inner: str, block: list):
    """Best lifted solution over a contiguous run of guesses (strict improvement keeps the first)."""
    run = _resolve_single(inner)
    ev = _Counted(instance.oracle)
    best = None
    queries = 0
    examined = 0
    for Y in block:
        res = residual(instance, Y)
        queries += 1  # f(Y), evaluated once inside the residual oracle
        r = run(res)
        queries += r.oracle_queries
        examined += r.candidates_examined
        members = frozenset(Y) | res.lift(r.members)
        val = ev(members)
        if best is None or val > best[0]:
            best = (val, tuple(Y), members, r, res)
    if best is None:
        return None, queries + ev.queries, examined
    val, Y, members, r, res = best
    return (val, Y, members, _lift_trajectory(instance, res, r.trajectory, Y)), queries + ev.queries, examined


def _lift_trajectory(instance, res, traj, Y):
    base_val = res.oracle.guess_value
    cy = instance.cost(Y)
    steps = [Step(res.original_id(s.element), cy + s.cost, base_val + s.value) for s in traj.steps]
    return Trajectory(instance.budget, base_val + traj.initial_value, steps, tuple(Y), cy)


def k_guess(instance: Instance, cfg: GuessConfig) -> AlgorithmResult:
    name = f"k-guess:{cfg.k}:{cfg.inner}"
    _resolve_single(cfg.inner)
    n, k = instance.n, cfg.k
    guesses = [Y for Y in combinations(range(n), k) if instance.feasible(Y)]
    blocks = [guesses] if cfg.workers == 1 else [b.tolist() for b in np.array_split(np.arange(len(guesses)), cfg.workers)]
    if cfg.workers > 1:
        blocks = [[guesses[i] for i in b] for b in blocks]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outs = list(pool.map(_guess_block, [instance] * len(blocks), [cfg.inner] * len(blocks), blocks))
    else:
        outs = [_guess_block(instance, cfg.inner, guesses)]
    best = None
    queries = 0
    examined = 0
    for out, q, e in outs:
        queries += q
        examined += e
        if out is not None and (best is None or out[0] > best[0]):
            best = out
    winner = "guess-augmented"
    ev = _Counted(instance.oracle)
    for size in range(min(k - 1, n) + 1):
        for T in combinations(range(n), size):
            if not instance.feasible(T):
                continue
            examined += 1
            val = ev(frozenset(T))
            if best is None or val > best[0]:
                best = (val, (), frozenset(T), None)
                winner = "small-solution"
    val, Y, members, traj = best
    if traj is None:
        traj = Trajectory(instance.budget, val, [], tuple(sorted(members)), instance.cost(members))
    sol = SetValue(members, instance.cost(members), val)
    examined += len(guesses)
    return AlgorithmResult(name, sol, traj, examined, queries + ev.queries, winner, Y)


# -- trajectory analytics ---------------------------------------------------------

def g_of(trajectory: Trajectory, t: float) -> float:
    """Piecewise-linear g: value reached after spending t, with g(B) = f(S_l)."""
    B = trajectory.budget
    if not 0 <= t <= B * (1 + 1e-12):
        raise DomainError(f"t={t} outside [0, {B}]")
    xs = [trajectory.initial_cost] + [s.cost for s in trajectory.steps]
    ys = [trajectory.initial_value] + [s.value for s in trajectory.steps]
    if xs[-1] < B:
        xs.append(B)
        ys.append(ys[-1])
    return float(np.interp(t, xs, ys))


def delta_g(trajectory: Trajectory, i: int) -> float:
    """Rate of g between c(S_i) and c(S_{i+1}), i.e. the density of s_{i+1}."""
    if not 0 <= i < len(trajectory):
        raise DomainError(f"step index {i} outside 0..{len(trajectory) - 1}")
    dc = trajectory.cost_at(i + 1) - trajectory.cost_at(i)
    return (trajectory.value_at(i + 1) - trajectory.value_at(i)) / dc


def check_rate_bound(instance: Instance, trajectory: Trajectory, opt: Iterable[int], *,
                   max_subsets: int = 256, rng=None, rtol: float = 1e-9):
    """Check (B - c(R)) * Delta_g(c(S_i)) >= f(S*) - f(S_i u R) along a plain-greedy run.

    S* is ``opt``; R ranges over subsets of S* (all of them when there are at
    most ``max_subsets``, otherwise a random sample).  A pair (i, R) is
    applicable when B - c(S_i) >= max cost over S* - (R u S_i).
    Returns ``(checked, violations)``.
    """
    opt = tuple(sorted(opt))
    f = instance.oracle
    B = instance.budget
    f_opt = f.eval(frozenset(opt))
    if 2 ** len(opt) <= max_subsets:
        subsets = [frozenset(c) for r in range(len(opt) + 1) for c in combinations(opt, r)]
    else:
        rng = rng or np.random.default_rng(0)
        subsets = [frozenset(x for x in opt if rng.random() < 0.5) for _ in range(max_subsets)]
    checked = 0
    violations = []
    for i in range(len(trajectory)):
        Si = trajectory.prefix(i)
        ci = trajectory.cost_at(i)
        dg = delta_g(trajectory, i)
        for R in subsets:
            rest = set(opt) - R - Si
            need = max((instance.costs[v] for v in rest), default=0.0)
            # same feasibility rule greedy uses for its candidates
            if not fits(ci + need, B):
                continue
            checked += 1
            lhs = (B - instance.cost(R)) * dg
            rhs = f_opt - f.eval(Si | R)
            if lhs < rhs - rtol * max(1.0, abs(f_opt)):
                violations.append((i, tuple(sorted(R)), lhs, rhs))
    return checked, violations
