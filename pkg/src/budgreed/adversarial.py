"""Hard instance on which Greedy stays below 0.462 of the optimum.

Ground set (ids):  z1=0, z2=1, w=2, x_1..x_n = 3..n+2, y_1..y_n = n+3..2n+2.
The objective depends only on the four role counts (cx, cz, cw, cy):

    f = 1 - f1 * (alpha * f2 + (1 - 2 alpha) * f3 * f4)
    f1 = (1 - (1 - alpha)/n) ** cx
    f2 = 2 - cz / (1 + 2 eps)
    f3 = 1 - cw / (1 + 2 eps)
    f4 = (1 - (alpha/(1 - 2 alpha) - 1)/n) ** cy

Greedy picks all of X, then all of Y, and then nothing else fits, while
O = {z1, z2, w} costs exactly 1 and is worth 1/(1 + 2 eps).
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .core import DomainError, Instance, SetValue, ValueOracle, fits
from .greedy import AlgorithmResult, Step, Trajectory, greedy

__all__ = [
    "AdversarialParams",
    "AdversarialOracle",
    "AdversarialReport",
    "build_adversarial",
    "fast_greedy",
    "symmetry_audit",
    "verify_adversarial",
    "check_counts",
    "limit_value",
    "GENERIC_AUTO_MAX",
]

Z1, Z2, W = 0, 1, 2
ROLES = ("z", "w", "x", "y")

# above this n the generic engine (set-based evaluation, cubic overall) is too
# slow to be the default; the audited role-aggregated path takes over
GENERIC_AUTO_MAX = 200


@dataclass(frozen=True)
class AdversarialParams:
    n: int = 100_000
    eps: float = 1e-4
    alpha: float = 0.461

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 24:
            raise DomainError(f"n must be an integer >= 24, got {self.n!r}")
        if not 0 < self.eps <= 0.5:
            raise DomainError(f"eps must lie in (0, 1/2], got {self.eps}")
        if not 1 / 3 < self.alpha < 0.49:
            raise DomainError(f"alpha must lie in (1/3, 0.49), got {self.alpha}")

    @property
    def beta(self) -> float:
        return (1 - self.alpha) / self.n

    @property
    def gamma(self) -> float:
        return (self.alpha / (1 - 2 * self.alpha) - 1) / self.n


class AdversarialOracle(ValueOracle):
    kind = "adversarial-closed-form"

    def __init__(self, params: AdversarialParams):
        super().__init__(2 * params.n + 3)
        self.params = params
        self._a = params.alpha
        self._s = 1 / (1 + 2 * params.eps)
        self._b1 = 1 - params.beta
        self._b4 = 1 - params.gamma

    def role(self, v: int) -> str:
        if v in (Z1, Z2):
            return "z"
        if v == W:
            return "w"
        return "x" if v < self.params.n + 3 else "y"

    def counts(self, S) -> tuple[int, int, int, int]:
        top = self.params.n + 3
        cz = (Z1 in S) + (Z2 in S)
        cw = int(W in S)
        cy = sum(1 for v in S if v >= top)
        cx = len(S) - cz - cw - cy
        return cx, cz, cw, cy

    def factors(self, cx, cz, cw, cy):
        return (self._b1 ** cx, 2 - cz * self._s, 1 - cw * self._s, self._b4 ** cy)

    def value_counts(self, cx, cz, cw, cy) -> float:
        f1, f2, f3, f4 = self.factors(cx, cz, cw, cy)
        a = self._a
        return 1 - f1 * (a * f2 + (1 - 2 * a) * f3 * f4)

    def eval_counts(self, cx, cz, cw, cy) -> float:
        """Counted evaluation straight from role counts."""
        n = self.params.n
        if not (0 <= cx <= n and 0 <= cz <= 2 and 0 <= cw <= 1 and 0 <= cy <= n):
            raise DomainError(f"role counts out of range: {(cx, cz, cw, cy)}")
        with self._lock:
            self._count += 1
        return self.value_counts(cx, cz, cw, cy)

    def value_exact(self, cx, cz, cw, cy) -> Fraction:
        """Exact value for the float parameters as given (their binary values)."""
        p = self.params
        a, e, n = Fraction(p.alpha), Fraction(p.eps), p.n
        s = 1 / (1 + 2 * e)
        f1 = (1 - (1 - a) / n) ** cx
        f4 = (1 - (a / (1 - 2 * a) - 1) / n) ** cy
        return 1 - f1 * (a * (2 - cz * s) + (1 - 2 * a) * (1 - cw * s) * f4)

    def _value(self, S):
        return self.value_counts(*self.counts(S))


def role_costs(params: AdversarialParams) -> dict:
    a, e, n = params.alpha, params.eps, params.n
    return {
        "z": a,
        "w": 1 - 2 * a,
        "x": (1 - a) * (1 + e) / n,
        "y": (3 * a - 1) * (1 + 1.5 * e) / n,
    }


def build_adversarial(params: AdversarialParams) -> Instance:
    rc = role_costs(params)
    n = params.n
    costs = [rc["z"], rc["z"], rc["w"]] + [rc["x"]] * n + [rc["y"]] * n
    return Instance(AdversarialOracle(params), costs, 1.0)


def limit_value(alpha: float) -> float:
    """n -> infinity value of f(X u Y)."""
    return 1 - math.exp(alpha - 1) * (2 * alpha + (1 - 2 * alpha) * math.exp(1 - alpha / (1 - 2 * alpha)))


def symmetry_audit(instance: Instance) -> list[str]:
    """Reasons the role-aggregated path would differ from the generic engine (empty = safe)."""
    problems = []
    oracle = instance.oracle
    if not isinstance(oracle, AdversarialOracle):
        return ["oracle is not the count-based adversarial oracle"]
    if instance.origin is not None:
        problems.append("instance dropped elements, ids are remapped")
    n = oracle.params.n
    if instance.n != 2 * n + 3:
        problems.append("ground set size mismatch")
        return problems
    c = instance.costs
    groups = {"z": c[0:2], "x": c[3:n + 3], "y": c[n + 3:]}
    for name, g in groups.items():
        if len(set(g)) != 1:
            problems.append(f"costs within role {name} are not identical")
    return problems


def fast_greedy(instance: Instance) -> AlgorithmResult:
    """Greedy on the adversarial instance, one representative per role.

    Elements of one role have identical costs and identical marginals, so the
    generic engine always picks the lowest unpicked id of the best role.
    Representatives are scanned in id order with strict improvement, float
    costs are accumulated in the same order, and values come from the same
    count formula, so the trajectory matches the generic engine bit for bit.
    Only the query count differs (one query per role instead of per element).
    """
    problems = symmetry_audit(instance)
    if problems:
        raise DomainError("role-aggregated greedy refused: " + "; ".join(problems))
    oracle: AdversarialOracle = instance.oracle
    n = oracle.params.n
    B = instance.budget
    cost_of = {"z": instance.costs[0], "w": instance.costs[2], "x": instance.costs[3], "y": instance.costs[n + 3]}
    size = {"z": 2, "w": 1, "x": n, "y": n}
    first_id = {"z": Z1, "w": W, "x": 3, "y": n + 3}
    slot = {"x": 0, "z": 1, "w": 2, "y": 3}
    queries = 0

    def ev(cnt):
        nonlocal queries
        queries += 1
        return oracle.eval_counts(*cnt)

    cnt = [0, 0, 0, 0]
    val = ev(cnt)
    cost = 0.0
    traj = Trajectory(B, val)
    while True:
        best, best_d, best_val = None, -math.inf, 0.0
        for r in ROLES:  # representatives in increasing id order
            k = cnt[slot[r]]
            if k >= size[r] or not fits(cost + cost_of[r], B):
                continue
            trial = list(cnt)
            trial[slot[r]] += 1
            fv = ev(trial)
            d = (fv - val) / cost_of[r]
            if d > best_d:
                best, best_d, best_val = r, d, fv
        if best is None:
            break
        v = first_id[best] + cnt[slot[best]]
        cnt[slot[best]] += 1
        cost += cost_of[best]
        val = best_val
        traj.steps.append(Step(v, cost, val))

    best_set = traj.prefix(len(traj))
    best_val, winner, examined = traj.final_value, "final-greedy-set", 1
    for r in ROLES:
        if not fits(cost_of[r], B):
            continue
        examined += 1
        trial = [0, 0, 0, 0]
        trial[slot[r]] = 1
        fv = ev(trial)
        if fv > best_val:
            best_set, best_val, winner = frozenset((first_id[r],)), fv, "singleton"
    sol = SetValue(best_set, instance.cost(best_set), best_val)
    return AlgorithmResult("greedy", sol, traj, examined, queries, winner)


def check_counts(params: AdversarialParams, cap: int = 3) -> list[tuple]:
    """Exhaustive monotonicity/submodularity over role-count tuples.

    Returns violations as (kind, S-counts, T-counts, role).  S <= T
    componentwise; u is one more element of a role that T has not used up.
    """
    o = AdversarialOracle(params)
    n = params.n
    caps = (min(cap, n), 2, 1, min(cap, n))
    limits = (n, 2, 1, n)
    tuples = list(itertools.product(*(range(c + 1) for c in caps)))
    f = {t: o.value_counts(*t) for t in tuples}
    tol = 1e-12
    bad = []

    def fv(t):
        return f[t] if t in f else o.value_counts(*t)

    for T in tuples:
        for S in tuples:
            if any(s > t for s, t in zip(S, T)):
                continue
            if f[S] > f[T] + tol:
                bad.append(("monotone", S, T, None))
            for r in range(4):
                if T[r] >= limits[r]:
                    continue
                Su = S[:r] + (S[r] + 1,) + S[r + 1:]
                Tu = T[:r] + (T[r] + 1,) + T[r + 1:]
                if fv(Su) - f[S] < fv(Tu) - f[T] - tol:
                    bad.append(("submodular", S, T, ("x", "z", "w", "y")[r]))
    return bad


@dataclass
class AdversarialReport:
    n: int
    eps: float
    alpha: float
    engine: str
    f_O: float
    f_O_exact: str
    c_O_exact: str
    best_singleton: float
    singleton_bound: float
    selection_order_ok: bool
    first_bad_step: int | None
    f_XY: float
    f_XY_closed: float
    closed_form_gap: float
    bound_577: float
    limit_value: float
    x_density_max_rel_err: float
    y_density_max_rel_err: float
    z_infeasible_after_x: bool
    greedy_value: float
    ratio: float
    winner: str
    oracle_queries: int
    wall_time: float
    claims: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.claims.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.claims.items() if not v]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AdversarialReport":
        return cls(**d)

    def deterministic_dict(self) -> dict:
        d = self.to_dict()
        d.pop("wall_time")
        return d

    def format_text(self) -> str:
        rows = [
            ("n, eps, alpha", f"{self.n}, {self.eps:g}, {self.alpha:g}"),
            ("engine", self.engine),
            ("c(O) exact", self.c_O_exact),
            ("f(O)", f"{self.f_O:.15f}  (exact {self.f_O_exact})"),
            ("best singleton", f"{self.best_singleton:.12f}  (bound alpha/(1+2eps) = {self.singleton_bound:.12f})"),
            ("selection X then Y", str(self.selection_order_ok).lower()),
            ("f(X u Y)", f"{self.f_XY:.15f}"),
            ("closed form", f"{self.f_XY_closed:.15f}  (gap {self.closed_form_gap:.2e})"),
            ("limit + 577/n", f"{self.bound_577:.12f}  (limit {self.limit_value:.12f})"),
            ("X density rel err", f"{self.x_density_max_rel_err:.2e}"),
            ("Y density rel err", f"{self.y_density_max_rel_err:.2e}"),
            ("z infeasible after X", str(self.z_infeasible_after_x).lower()),
            ("greedy value", f"{self.greedy_value:.15f}  (winner {self.winner})"),
            ("ratio vs f(O)", f"{self.ratio:.9f}"),
            ("oracle queries", str(self.oracle_queries)),
            ("wall time", f"{self.wall_time:.3f}s"),
        ]
        out = [f"{k:<22}{v}" for k, v in rows]
        out.append("claims:")
        out += [f"  {'PASS' if v else 'FAIL'}  {k}" for k, v in self.claims.items()]
        return "\n".join(out)


def verify_adversarial(params: AdversarialParams, engine: str = "auto", ratio_cap: float = 0.462) -> AdversarialReport:
    """Run Greedy on the instance and check every claim about it.

    engine: "generic" (the normal greedy engine), "fast" (role-aggregated,
    requires the symmetry audit to pass) or "auto" (generic up to
    GENERIC_AUTO_MAX, fast above).
    """
    if engine not in ("auto", "fast", "generic"):
        raise DomainError(f"unknown engine {engine!r}")
    t0 = time.perf_counter()
    inst = build_adversarial(params)
    oracle: AdversarialOracle = inst.oracle
    n, a, e = params.n, params.alpha, params.eps
    if engine == "auto":
        engine = "generic" if n <= GENERIC_AUTO_MAX else "fast"
    res = greedy(inst) if engine == "generic" else fast_greedy(inst)
    traj = res.trajectory

    # exact claims on O = {z1, z2, w}
    af, ef = Fraction(a), Fraction(e)
    c_O = af + af + (1 - 2 * af)
    f_O_exact = oracle.value_exact(0, 2, 1, 0)
    f_O = oracle.eval({Z1, Z2, W})

    # singletons, exactly (every singleton value is a rational in the parameters)
    bound_single = af / (1 + 2 * ef)
    singles = [oracle.value_exact(*t) for t in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))]
    best_single = max(singles)

    # selection order: first n picks are X, next n are Y, nothing else
    elems = traj.elements
    xs, ys = set(range(3, n + 3)), set(range(n + 3, 2 * n + 3))
    first_bad = None
    for i, v in enumerate(elems):
        want = xs if i < n else ys
        if i >= 2 * n or v not in want:
            first_bad = i
            break
    order_ok = first_bad is None and len(elems) == 2 * n

    f_xy = traj.final_value
    closed = 1 - math.exp(n * math.log1p(-params.beta)) * (
        2 * a + (1 - 2 * a) * math.exp(n * math.log1p(-params.gamma)))
    lim = limit_value(a)
    bound = lim + 577 / n

    # leading densities along the run
    x_err = y_err = 0.0
    if order_ok:
        prev_c, prev_v = 0.0, traj.initial_value
        lx = math.log1p(-params.beta)
        ly = math.log1p(-params.gamma)
        for i, st in enumerate(traj.steps):
            d = (st.value - prev_v) / (st.cost - prev_c)
            if i < n:
                want = math.exp(i * lx) / (1 + e)
                x_err = max(x_err, abs(d - want) / want)
            else:
                want = math.exp(n * lx + (i - n) * ly) / (1 + 1.5 * e)
                y_err = max(y_err, abs(d - want) / want)
            prev_c, prev_v = st.cost, st.value
    z_blocked = len(traj) >= n and not fits(traj.cost_at(n) + inst.costs[Z1], inst.budget)

    ratio = res.value / f_O
    claims = {
        "c(O) = 1 exactly": c_O == 1,
        "f(O) = 1/(1+2eps) exactly": f_O_exact == 1 / (1 + 2 * ef),
        "float f(O) matches exact": abs(f_O - float(f_O_exact)) <= 1e-15,
        "every singleton <= alpha/(1+2eps)": best_single <= bound_single,
        "plain greedy selects X then Y": order_ok,
        "f(X u Y) within 1e-10 of closed form": abs(f_xy - closed) <= 1e-10,
        "f(X u Y) <= limit + 577/n": f_xy <= bound,
        "X leading density matches": order_ok and x_err <= 1e-6,
        "Y leading density matches": order_ok and y_err <= 1e-6,
        "z1, z2 infeasible once X is taken": z_blocked,
        "greedy keeps X u Y over singletons": res.winner == "final-greedy-set" or f_xy <= float(bound_single),
        f"greedy ratio <= {ratio_cap}": ratio <= ratio_cap,
    }
    return AdversarialReport(
        n=n, eps=e, alpha=a, engine=engine,
        f_O=f_O, f_O_exact=str(f_O_exact), c_O_exact=str(c_O),
        best_singleton=float(best_single), singleton_bound=float(bound_single),
        selection_order_ok=order_ok, first_bad_step=first_bad,
        f_XY=f_xy, f_XY_closed=closed, closed_form_gap=abs(f_xy - closed),
        bound_577=bound, limit_value=lim,
        x_density_max_rel_err=x_err, y_density_max_rel_err=y_err,
        z_infeasible_after_x=z_blocked,
        greedy_value=res.value, ratio=ratio, winner=res.winner,
        oracle_queries=res.oracle_queries,
        wall_time=time.perf_counter() - t0,
        claims=claims,
    )
