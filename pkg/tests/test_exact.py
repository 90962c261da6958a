import csv
import io
import itertools

import numpy as np
import pytest

from budgreed import kernels
from budgreed.core import CoverageOracle, DomainError, Instance, ModularOracle, ValueOracle, residual
from budgreed.exact import (
    FAMILIES,
    PROFILES,
    RatioReport,
    SizeError,
    _dfs_opt,
    brute_force_opt,
    measure_ratio,
    query_count_instance,
    query_count_table,
    random_instance,
    ratio_batch,
    summarize,
    write_csv,
)
from budgreed.greedy import GuessConfig, k_guess


def _naive_opt(inst):
    # every feasible subset; ties to the lexicographically smallest sorted tuple
    cands = [S for r in range(inst.n + 1) for S in itertools.combinations(range(inst.n), r) if inst.feasible(S)]
    vals = {S: inst.oracle.eval(S) for S in cands}
    top = max(vals.values())
    best = min(S for S in cands if vals[S] == top)
    return frozenset(best), top


class Opaque(ValueOracle):
    kind = "opaque"

    def __init__(self, inner):
        super().__init__(inner.n)
        self.inner = inner

    def _value(self, S):
        return self.inner.eval(S)


def test_examples(two_elem, modular3):
    assert brute_force_opt(two_elem) == (frozenset({1}), 1.0)
    assert brute_force_opt(modular3) == (frozenset({0, 1}), 5.0)


def test_size_cap():
    inst = Instance(ModularOracle([1] * 23), [1] * 23, 3)
    with pytest.raises(SizeError):
        brute_force_opt(inst)
    assert brute_force_opt(inst, cap=23)[1] == 3


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("profile", PROFILES)
def test_kernels_agree_with_naive(family, profile):
    for seed in range(8):
        inst = random_instance(family, 9, seed, profile)
        ref = _naive_opt(inst)
        for force in ("numba", "numpy"):
            assert brute_force_opt(inst, force=force) == ref
        assert frozenset(_dfs_opt(inst)) == ref[0]
        assert brute_force_opt(Instance(Opaque(inst.oracle), inst.costs, inst.budget)) == ref


def test_opt_is_lexicographic_on_ties():
    inst = Instance(ModularOracle([1, 1, 1, 1]), [1, 1, 1, 1], 2)
    for force in ("numba", "numpy"):
        assert brute_force_opt(inst, force=force)[0] == {0, 1}


def test_residual_instance_opt():
    inst = random_instance("coverage", 10, 4, "harmonic")
    r = residual(inst, [])
    assert brute_force_opt(r) == brute_force_opt(inst)
    cheap = min(range(inst.n), key=lambda v: inst.costs[v])
    r1 = residual(inst, [cheap])
    assert brute_force_opt(r1) == _naive_opt(r1)


def test_random_instance_deterministic():
    for fam in FAMILIES:
        for prof in PROFILES:
            a = random_instance(fam, 12, 3, prof)
            b = random_instance(fam, 12, 3, prof)
            assert a.costs == b.costs and a.budget == b.budget
            assert a.oracle.eval(range(12)) == b.oracle.eval(range(12))
    with pytest.raises(DomainError):
        random_instance("matroid", 5, 0)
    with pytest.raises(DomainError):
        random_instance("modular", 5, 0, "zipf")


def test_uniform_profile_unit_costs():
    inst = random_instance("modular", 10, 1, "uniform")
    assert set(inst.costs) == {1.0} and inst.budget == int(inst.budget)


def test_measure_ratio(modular3):
    rep = measure_ratio(modular3, ["plain-greedy", "greedy-plus"], "m3")
    assert rep.ratios == {"plain-greedy": 1.0, "greedy-plus": 1.0}
    assert RatioReport.from_dict(rep.to_dict()) == rep
    zero = Instance(ModularOracle([0, 0]), [1, 1], 1)
    assert measure_ratio(zero, ["greedy"]).ratios["greedy"] == 1.0


def test_ratio_batch_and_csv():
    rows = ratio_batch("coverage", 8, range(5), "harmonic", ["greedy", "greedy-plus"])
    assert len(rows) == 10
    assert [r["seed"] for r in rows] == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]
    assert all(0 <= r["ratio"] <= 1 + 1e-12 for r in rows)
    par = ratio_batch("coverage", 8, range(5), "harmonic", ["greedy", "greedy-plus"], workers=2)
    assert par == rows
    summ = summarize(rows)
    assert {(s["algorithm"], s["seed"]) for s in summ} == {(a, s) for a in ("greedy", "greedy-plus")
                                                             for s in ("min", "mean")}
    text = write_csv(rows + summ)
    back = list(csv.DictReader(io.StringIO(text)))
    assert len(back) == len(rows) + len(summ)
    assert float(back[0]["ratio"]) == rows[0]["ratio"]


@pytest.mark.parametrize("force", ["numba", "numpy"])
def test_query_kernel_matches_engine(force):
    inst = query_count_instance(12, seed=1)
    w = np.array(inst.oracle.weights)
    for k in range(4):
        val, q = kernels.kguess_query_count(w, np.array(inst.costs), inst.budget, k, force)
        if k == 0:
            from budgreed.greedy import plain_greedy

            ref = plain_greedy(inst)
        else:
            ref = k_guess(inst, GuessConfig(k, "plain-greedy"))
        assert q == ref.oracle_queries
        assert val == ref.value


def test_query_count_table_small():
    rows = query_count_table(ns=(10, 20), ks=(0, 2, 3))
    by = {(r["n"], r["driver"]): r["queries"] for r in rows}
    for n in (10, 20):
        assert by[(n, "plain-greedy")] < by[(n, "k-guess:2:plain-greedy")] < by[(n, "k-guess:3:plain-greedy")]


def test_more_examples(two_elem, cov_oracle):
    inst = Instance(ModularOracle([4, 1, 2, 7]), [1.0, 2.0, 0.5, 3.0], 10)
    assert brute_force_opt(inst)[0] == {0, 1, 2, 3}
    cov = Instance(cov_oracle, [1, 1], 1)
    assert brute_force_opt(cov) == (frozenset({1}), 3.0)
    rep = measure_ratio(two_elem, ["plain-greedy", "greedy"])
    assert rep.ratios["plain-greedy"] == pytest.approx(0.02)
    assert rep.ratios["greedy"] == 1.0


def test_opt_invariant_under_cost_scaling():
    for seed in range(5):
        inst = random_instance("coverage", 10, seed, "heavy-one")
        for lam in (0.5, 4.0):
            assert brute_force_opt(inst.scaled(lam))[0] == brute_force_opt(inst)[0]
