"""Greedy knapsack solver vs a brute-force vertex-enumeration oracle,
plus structural properties of the canonical solution."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revpref.knapsack import (
    SENTINEL_PRICE,
    Bundle,
    InfeasibleBundleError,
    Instance,
    is_optimal,
    solve,
    solve_batch,
)


def brute_force_value(u, a, b):
    """LP optimum by enumerating vertices of {0 <= x <= 1, a.x <= b}.

    Vertices set each coordinate to 0 or 1 except at most one fractional
    coordinate that saturates the budget.
    """
    u, a = np.asarray(u, float), np.asarray(a, float)
    n = len(u)
    best = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        x = np.array(bits, float)
        cost = a @ x
        if cost <= b + 1e-12:
            best = max(best, float(u @ x))
            # try adding one fractional item on top
            for j in range(n):
                if bits[j] == 0 and a[j] > 0:
                    frac = min(1.0, (b - cost) / a[j])
                    if frac > 0:
                        y = x.copy()
                        y[j] = frac
                        best = max(best, float(u @ y))
        else:
            # saturate the budget by shrinking one chosen coordinate
            for j in range(n):
                if bits[j] == 1:
                    over = cost - b
                    if over <= a[j]:
                        y = x.copy()
                        y[j] = 1.0 - over / a[j]
                        best = max(best, float(u @ y))
    return best


def random_instance(rng, law):
    n = int(rng.integers(2, 6))
    if law == "uniform_i":
        a = rng.uniform(1.0, 2.0, n)
        b = rng.uniform(1.0, n)
    elif law == "discrete_ii":
        a = rng.integers(1, 3, n).astype(float)
        b = float(rng.integers(1, n + 1))
    else:
        a = np.ones(n)
        b = float(rng.integers(1, n + 1))
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    return Instance(u=u, a=a, b=b)


@pytest.mark.parametrize("law", ["uniform_i", "discrete_ii", "fixed_a_iii"])
def test_matches_brute_force(law):
    rng = np.random.default_rng(42)
    for _ in range(400):
        inst = random_instance(rng, law)
        out = solve(inst)
        assert out.value == pytest.approx(brute_force_value(inst.u, inst.a, inst.b), abs=1e-9)


def test_solution_structure():
    rng = np.random.default_rng(7)
    for _ in range(300):
        inst = random_instance(rng, "uniform_i")
        out = solve(inst)
        x = out.x.x
        assert np.all(x >= 0) and np.all(x <= 1)
        assert inst.a @ x <= inst.b + 1e-9
        # at most one fractional coordinate
        frac = np.sum((x > 1e-9) & (x < 1 - 1e-9))
        assert frac <= 1
        if out.fractional_index is not None:
            assert 1e-9 < x[out.fractional_index] < 1 - 1e-9
        # non-positive utilities never purchased
        assert np.all(x[inst.u <= 0] == 0)


def test_tie_break_ascending_index():
    # equal ratios: item 0 filled first
    out = solve(Instance(u=np.array([1.0, 1.0]), a=np.array([1.0, 1.0]), b=1.0))
    assert np.allclose(out.x.x, [1.0, 0.0])


def test_sentinel_price_never_bought():
    out = solve(Instance(u=np.array([1.0, 1.0]), a=np.array([SENTINEL_PRICE, 1.0]), b=5.0))
    assert np.allclose(out.x.x, [0.0, 1.0])


def test_threshold_semantics():
    # fractional item defines the threshold ratio
    out = solve(Instance(u=np.array([3.0, 1.0]), a=np.array([1.0, 2.0]), b=2.0))
    assert out.fractional_index == 1
    assert out.threshold == pytest.approx(0.5)
    # slack budget: threshold 0
    out = solve(Instance(u=np.array([1.0, 1.0]), a=np.array([1.0, 1.0]), b=5.0))
    assert out.threshold == 0.0


unit_vec = st.integers(0, 2**32 - 1)


@given(seed=unit_vec, scale=st.floats(0.1, 10.0))
@settings(max_examples=100, deadline=None)
def test_scale_invariance_of_bundle(seed, scale):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, "uniform_i")
    out1 = solve(inst)
    out2 = solve(Instance(u=inst.u * scale, a=inst.a, b=inst.b))
    assert np.allclose(out1.x.x, out2.x.x)
    assert out2.value == pytest.approx(out1.value * scale, rel=1e-9, abs=1e-12)


@given(seed=unit_vec, extra=st.floats(0.0, 5.0))
@settings(max_examples=100, deadline=None)
def test_value_monotone_in_budget(seed, extra):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, "uniform_i")
    bigger = Instance(u=inst.u, a=inst.a, b=inst.b + extra)
    assert solve(bigger).value >= solve(inst).value - 1e-12


@given(seed=unit_vec)
@settings(max_examples=60, deadline=None)
def test_batch_agrees_with_scalar(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    N = 20
    U = rng.standard_normal((N, n))
    A = rng.uniform(1.0, 2.0, (N, n))
    B = rng.uniform(1.0, n, N)
    X, vals = solve_batch(U, A, B)
    for t in range(N):
        out = solve(Instance(u=U[t], a=A[t], b=B[t]))
        assert np.allclose(X[t], out.x.x, atol=1e-12)
        assert vals[t] == pytest.approx(out.value, abs=1e-12)


def test_batch_broadcasts_single_u():
    rng = np.random.default_rng(3)
    u = rng.standard_normal(4)
    A = rng.uniform(1.0, 2.0, (10, 4))
    B = rng.uniform(1.0, 4.0, 10)
    X, vals = solve_batch(u, A, B)
    for t in range(10):
        assert vals[t] == pytest.approx(solve(Instance(u=u, a=A[t], b=B[t])).value, abs=1e-12)


def test_is_optimal_oracle():
    inst = Instance(u=np.array([2.0, 1.0]), a=np.array([1.0, 1.0]), b=1.0)
    assert is_optimal(Bundle(np.array([1.0, 0.0])), inst)
    assert not is_optimal(Bundle(np.array([0.0, 1.0])), inst)
    with pytest.raises(InfeasibleBundleError):
        is_optimal(Bundle(np.array([1.0, 1.0])), inst)


def test_input_validation():
    with pytest.raises(ValueError):
        Instance(u=np.ones(2), a=np.array([1.0, -1.0]), b=1.0)
    with pytest.raises(ValueError):
        Instance(u=np.ones(2), a=np.ones(2), b=-1.0)
    with pytest.raises(ValueError):
        Instance(u=np.ones(3), a=np.ones(2), b=1.0)
    with pytest.raises(ValueError):
        Bundle(np.array([1.5, 0.0]))
