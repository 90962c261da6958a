"""Ground sets, value oracles and budgeted instances.

Elements are dense integer ids ``0..n-1``.  Sets of elements are passed around
as ``frozenset`` objects; any iterable of ints is accepted by ``eval``.
"""

from __future__ import annotations

import json
import math
import threading
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "PreconditionError",
    "InfeasibleGuessError",
    "InstanceFormatError",
    "ValueOracle",
    "ModularOracle",
    "CoverageOracle",
    "ResidualOracle",
    "Instance",
    "SetValue",
    "fits",
    "eval_set",
    "marginal",
    "density",
    "residual",
    "validate_oracle",
    "OracleReport",
    "Violation",
    "load_instance",
    "dump_instance",
    "instance_to_dict",
    "instance_from_dict",
]

# relative slack on every budget comparison; absorbs float drift in running cost sums
FEAS_RTOL = 1e-12


class DomainError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class InfeasibleGuessError(ValueError):
    pass


class InstanceFormatError(ValueError):
    pass


def fits(cost: float, budget: float) -> bool:
    return cost <= budget + FEAS_RTOL * abs(budget)


class ValueOracle:
    """Set-function evaluator with a thread-safe query counter.

    Subclasses implement ``_value(S)`` for a validated ``frozenset`` S.
    """

    kind = "abstract"

    def __init__(self, n: int):
        if n < 0:
            raise DomainError(f"ground set size must be non-negative, got {n}")
        self.n = int(n)
        self._count = 0
        self._lock = threading.Lock()

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def eval_count(self) -> int:
        return self._count

    def reset_count(self) -> None:
        with self._lock:
            self._count = 0

    def eval(self, S: Iterable[int]) -> float:
        if not isinstance(S, frozenset):
            S = frozenset(S)
        if S and (min(S) < 0 or max(S) >= self.n):
            raise DomainError(f"element id out of range 0..{self.n - 1}: {sorted(S)}")
        with self._lock:
            self._count += 1
        return self._value(S)

    __call__ = eval

    def _value(self, S: frozenset) -> float:
        raise NotImplementedError


class ModularOracle(ValueOracle):
    kind = "modular"

    def __init__(self, weights: Sequence[float]):
        w = [float(x) for x in weights]
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise DomainError("modular weights must be finite and non-negative")
        super().__init__(len(w))
        self.weights = tuple(w)

    def _value(self, S):
        # fsum is order independent, so f(S) does not depend on set iteration order
        return math.fsum(self.weights[v] for v in S)


class CoverageOracle(ValueOracle):
    """Weighted coverage: f(S) is the total weight of universe items covered by S."""

    kind = "weighted-coverage"

    def __init__(self, weights: Sequence[float], covers: Sequence[Sequence[int]]):
        w = [float(x) for x in weights]
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise DomainError("universe weights must be finite and non-negative")
        u = len(w)
        masks = []
        for v, items in enumerate(covers):
            m = 0
            for j in items:
                if not 0 <= int(j) < u:
                    raise DomainError(f"element {v} covers out-of-range universe index {j}")
                m |= 1 << int(j)
            masks.append(m)
        super().__init__(len(masks))
        self.weights = tuple(w)
        self.covers = tuple(tuple(sorted({int(j) for j in items})) for items in covers)
        self.masks = tuple(masks)
        # byte-chunked lookup tables: weight(mask) = sum of 8-bit chunk sums
        self._chunks = []
        for c in range(0, u, 8):
            tab = [0.0] * 256
            for b in range(256):
                tab[b] = math.fsum(w[c + k] for k in range(8) if b >> k & 1 and c + k < u)
            self._chunks.append(tab)

    def mask_weight(self, m: int) -> float:
        total = 0.0
        for tab in self._chunks:
            if m == 0:
                break
            total += tab[m & 0xFF]
            m >>= 8
        return total

    def _value(self, S):
        m = 0
        for v in S:
            m |= self.masks[v]
        return self.mask_weight(m)


class ResidualOracle(ValueOracle):
    """h(S) = f(S' | Y) where S' maps local ids through ``keep`` into the base ground set."""

    kind = "residual-wrapper"

    def __init__(self, base: ValueOracle, guess: Iterable[int], keep: Sequence[int]):
        self.base = base
        self.guess = frozenset(guess)
        self.keep = tuple(int(v) for v in keep)
        if self.guess & set(self.keep):
            raise PreconditionError("kept elements overlap the guess")
        super().__init__(len(self.keep))
        # an empty guess is a plain restriction: h(S) = f(S), no f(empty) offset
        self.guess_value = base.eval(self.guess) if self.guess else 0.0

    def _value(self, S):
        keep = self.keep
        full = self.guess.union(keep[v] for v in S)
        return self.base.eval(full) - self.guess_value


@dataclass(frozen=True)
class SetValue:
    members: frozenset
    cost: float
    value: float

    def to_dict(self):
        return {"members": sorted(self.members), "cost": self.cost, "value": self.value}

    @classmethod
    def from_dict(cls, d):
        return cls(frozenset(d["members"]), d["cost"], d["value"])


class Instance:
    """A budgeted instance: oracle over ``0..n-1``, positive costs, budget.

    Elements whose cost exceeds the budget can never be part of a feasible
    solution; they are dropped here (with a warning) and the survivors are
    renumbered densely.  ``origin[i]`` gives the id, in the oracle passed in,
    of local element ``i``.
    """

    def __init__(self, oracle: ValueOracle, costs: Sequence[float], budget: float, *, warn: bool = True):
        costs = [float(c) for c in costs]
        if len(costs) != oracle.n:
            raise DomainError(f"{len(costs)} costs for a ground set of {oracle.n} elements")
        if not (math.isfinite(budget) and budget > 0):
            raise DomainError(f"budget must be positive and finite, got {budget}")
        if any(not (math.isfinite(c) and c > 0) for c in costs):
            raise DomainError("costs must be positive and finite")
        keep = [v for v, c in enumerate(costs) if fits(c, budget)]
        self.dropped = tuple(v for v in range(len(costs)) if not fits(costs[v], budget))
        if self.dropped:
            if warn:
                warnings.warn(f"dropping {len(self.dropped)} element(s) with cost above the budget", stacklevel=2)
            oracle = ResidualOracle(oracle, (), keep)
            self.origin = tuple(keep)
        else:
            self.origin = None
        self.oracle = oracle
        self.costs = tuple(costs[v] for v in keep)
        self.budget = float(budget)
        self.n = len(self.costs)
        self.guess = ()

    def original_id(self, v: int) -> int:
        return v if self.origin is None else self.origin[v]

    def lift(self, S: Iterable[int]) -> frozenset:
        if self.origin is None:
            return frozenset(S)
        return frozenset(self.origin[v] for v in S)

    def cost(self, S: Iterable[int]) -> float:
        return math.fsum(self.costs[v] for v in S)

    def feasible(self, S: Iterable[int]) -> bool:
        return fits(self.cost(S), self.budget)

    def scaled(self, cost_factor: float = 1.0) -> "Instance":
        return Instance(self.oracle, [c * cost_factor for c in self.costs], self.budget * cost_factor)

    def __repr__(self):
        return f"Instance(n={self.n}, budget={self.budget}, oracle={self.oracle.kind})"


def eval_set(instance: Instance, S: Iterable[int]) -> SetValue:
    S = frozenset(S)
    return SetValue(S, instance.cost(S), instance.oracle.eval(S))


def marginal(oracle: ValueOracle, v: int, S: Iterable[int]) -> float:
    S = frozenset(S)
    if v in S:
        raise PreconditionError(f"element {v} already in the set")
    return oracle.eval(S | {v}) - oracle.eval(S)


def density(instance: Instance, v: int, S: Iterable[int]) -> float:
    return marginal(instance.oracle, v, S) / instance.costs[v]


def residual(instance: Instance, Y: Iterable[int]) -> Instance:
    """Residual instance after committing to Y: ground set V - Y, h(S) = f(S | Y), budget B - c(Y).

    Elements that no longer fit the leftover budget are dropped; ``origin`` maps
    the residual ids back to ids of ``instance``.
    """
    Y = frozenset(Y)
    if Y and (min(Y) < 0 or max(Y) >= instance.n):
        raise DomainError(f"guess {sorted(Y)} out of range")
    cy = instance.cost(Y)
    if not fits(cy, instance.budget):
        raise InfeasibleGuessError(f"guess {sorted(Y)} costs {cy} > budget {instance.budget}")
    if not Y:
        return instance
    left = max(instance.budget - cy, 0.0)
    keep = [v for v in range(instance.n) if v not in Y and fits(instance.costs[v], left)]
    res = Instance.__new__(Instance)
    res.oracle = ResidualOracle(instance.oracle, Y, keep)
    res.costs = tuple(instance.costs[v] for v in keep)
    res.budget = left
    res.n = len(keep)
    res.origin = tuple(keep)
    kept = set(keep)
    res.dropped = tuple(v for v in range(instance.n) if v not in Y and v not in kept)
    res.guess = tuple(sorted(Y))
    return res


@dataclass
class Violation:
    kind: str  # "monotone" | "submodular" | "submodular-chain" | "negative"
    S: tuple
    T: tuple
    u: int | None
    v: int | None
    lhs: float
    rhs: float


@dataclass
class OracleReport:
    kind: str
    n: int
    trials: int
    seed: int
    checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "checks": self.checks,
            "violations": [v.__dict__ for v in self.violations],
        }


def validate_oracle(oracle: ValueOracle, n: int | None = None, trials: int = 10_000, seed: int = 0,
                    rtol: float = 1e-9) -> OracleReport:
    """Randomized monotonicity/submodularity audit.

    Each trial draws T, S ⊆ T and distinct u, v outside T, then checks
    f(S) <= f(T), f(S+u) - f(S) >= f(S+u+v) - f(S+v) and
    f(S+u) - f(S) >= f(T+u) - f(T).  Violations are collected with
    witnesses rather than raised.
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    n = oracle.n if n is None else n
    rng = np.random.default_rng(seed)
    rep = OracleReport(oracle.kind, n, trials, seed)
    empty = oracle.eval(frozenset())
    if empty < -rtol:
        rep.violations.append(Violation("negative", (), (), None, None, empty, 0.0))
    if n == 0:
        return rep
    for _ in range(trials):
        p = rng.random()
        inT = rng.random(n) < p
        outside = np.flatnonzero(~inT)
        if len(outside) < 2 and n >= 2:
            inT[rng.choice(n, size=2, replace=False)] = False
            outside = np.flatnonzero(~inT)
        Tl = np.flatnonzero(inT)
        Sl = Tl[rng.random(len(Tl)) < rng.random()]
        S, T = frozenset(Sl.tolist()), frozenset(Tl.tolist())
        fS, fT = oracle.eval(S), oracle.eval(T)
        scale = max(1.0, abs(fS), abs(fT))
        rep.checks += 1
        if fS > fT + rtol * scale:
            rep.violations.append(Violation("monotone", tuple(sorted(S)), tuple(sorted(T)), None, None, fS, fT))
        if len(outside) < 2:
            continue
        u, v = (int(x) for x in rng.choice(outside, size=2, replace=False))
        fSu, fSv, fSuv = oracle.eval(S | {u}), oracle.eval(S | {v}), oracle.eval(S | {u, v})
        lhs, rhs = fSu - fS, fSuv - fSv
        rep.checks += 1
        if lhs < rhs - rtol * max(scale, abs(fSuv)):
            rep.violations.append(Violation("submodular", tuple(sorted(S)), tuple(sorted(T)), u, v, lhs, rhs))
        # chain form: the gain of u can only shrink from S to T
        fTu = oracle.eval(T | {u})
        rhs = fTu - fT
        rep.checks += 1
        if lhs < rhs - rtol * max(scale, abs(fTu)):
            rep.violations.append(Violation("submodular-chain", tuple(sorted(S)), tuple(sorted(T)), u, None, lhs, rhs))
    return rep


# -- instance files -------------------------------------------------------------

def instance_to_dict(instance: Instance) -> dict:
    o = instance.oracle
    keep = list(range(instance.n))
    if isinstance(o, ResidualOracle) and not o.guess:
        o, keep = o.base, list(o.keep)
    if isinstance(o, CoverageOracle):
        return {"kind": "coverage", "budget": instance.budget, "costs": list(instance.costs),
                "weights": list(o.weights), "covers": [list(o.covers[v]) for v in keep]}
    if isinstance(o, ModularOracle):
        return {"kind": "modular", "budget": instance.budget, "costs": list(instance.costs),
                "weights": [o.weights[v] for v in keep]}
    raise InstanceFormatError(f"oracle kind {o.kind!r} has no file representation")


def _field(d, name, typ):
    if name not in d:
        raise InstanceFormatError(f"missing field {name!r}")
    val = d[name]
    if typ is list and not isinstance(val, list):
        raise InstanceFormatError(f"field {name!r} must be a list")
    if typ is float and (isinstance(val, bool) or not isinstance(val, (int, float))):
        raise InstanceFormatError(f"field {name!r} must be a number")
    return val


def instance_from_dict(d: dict, warn: bool = True) -> Instance:
    if not isinstance(d, dict):
        raise InstanceFormatError("instance must be a JSON object")
    kind = _field(d, "kind", str)
    budget = _field(d, "budget", float)
    costs = _field(d, "costs", list)
    weights = _field(d, "weights", list)
    try:
        if kind == "coverage":
            covers = _field(d, "covers", list)
            if len(covers) != len(costs):
                raise InstanceFormatError(f"field 'covers' has {len(covers)} entries, 'costs' has {len(costs)}")
            oracle = CoverageOracle(weights, covers)
        elif kind == "modular":
            if len(weights) != len(costs):
                raise InstanceFormatError(f"field 'weights' has {len(weights)} entries, 'costs' has {len(costs)}")
            oracle = ModularOracle(weights)
        else:
            raise InstanceFormatError(f"field 'kind': unknown kind {kind!r}")
        return Instance(oracle, costs, budget, warn=warn)
    except (TypeError, DomainError) as e:
        raise InstanceFormatError(str(e)) from e


def load_instance(path: str | Path, warn: bool = True) -> Instance:
    text = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    try:
        return instance_from_dict(d, warn=warn)
    except InstanceFormatError as e:
        raise InstanceFormatError(f"{path}: {e}") from e


def dump_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=1), encoding="utf-8")
