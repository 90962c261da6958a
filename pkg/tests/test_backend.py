import json
import os
import subprocess
import sys

import numpy as np
import pytest

from budgreed import _accel, kernels
from budgreed.bound import certify
from budgreed.exact import random_instance

SCRIPT = r"""
import json
from budgreed import backend, kernels
from budgreed.bound import certify
from budgreed.exact import brute_force_opt, random_instance, query_count_table
out = {"backend": backend()}
out["certify"] = certify("52/125", "1/50", 10**6).deterministic_dict()
out["opt"] = [sorted(brute_force_opt(random_instance(f, 10, 2, "heavy-one"))[0]) for f in ("coverage", "modular")]
out["queries"] = query_count_table(ns=(12,), ks=(0, 2))
print(json.dumps(out, sort_keys=True))
"""


def _run(env_flag):
    env = dict(os.environ)
    env.pop("BUDGREED_DISABLE_NUMBA", None)
    if env_flag is not None:
        env["BUDGREED_DISABLE_NUMBA"] = env_flag
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")
def test_env_flag_switches_backend_with_identical_results():
    fast, slow = _run(None), _run("1")
    assert fast["backend"] == "numba" and slow["backend"] == "numpy"
    assert fast["certify"].pop("backend") == "numba"
    assert slow["certify"].pop("backend") == "numpy"
    assert fast == {**slow, "backend": "numba"}


def test_forcing_numba_without_it_fails(monkeypatch):
    monkeypatch.setattr(_accel, "HAVE_NUMBA", False)
    with pytest.raises(RuntimeError):
        kernels.m_grid_final(np.zeros(1, np.int64), np.zeros(1, np.int64), 10, 10**6, 2, 5, force="numba")
    assert certify("1/3", "1/10", 10**6).backend == "numpy"


def test_int64_guard():
    assert kernels.m_grid_fits_int64(1000, 10**9, 427, 1000)
    assert not kernels.m_grid_fits_int64(1000, 10**18, 427, 1000)


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")
def test_benchmark_quick_runs():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    res = subprocess.run([sys.executable, os.path.join(root, "benchmarks", "bench_kernels.py"), "--quick", "--repeat", "1"],
                         capture_output=True, text=True, check=True)
    lines = res.stdout.strip().splitlines()
    assert len(lines) == 5 and "MISMATCH" not in res.stdout
