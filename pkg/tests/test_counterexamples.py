import math

import numpy as np
import pytest

from cubeavg.counterexamples import (
    Prop7Instance,
    Prop9Instance,
    prop7_check,
    prop7_control,
    prop7_divergence,
    prop9_check,
    prop9_weight_defects,
    quadratic_identity_holds,
    uniform_ww_control,
    uniform_ww_failure,
)
from cubeavg.dynamics import kronecker_project, vn_sequence


def direct_double_loop(inst, N):
    # oracle: explicit sum of a_n b_m f(T^{n+m} x) with the orbit from iterate
    from cubeavg.dynamics import iterate_many
    a, b = inst.weights(N)
    k = np.arange(2 * N - 1)
    orbit = iterate_many(inst.system, np.asarray(inst.x), k)
    c = inst.observable(orbit)
    total = 0j
    for n in range(N):
        total += a.values[n] * np.dot(b.values[:N], c[n:n + N])
    return total / N ** 2


@pytest.mark.parametrize("N", [1, 2, 3, 17, 256, 4096])
def test_prop7_collapse(N):
    chk = prop7_check(Prop7Instance(), N)
    assert chk["diff"] < 1e-10


def test_prop7_against_direct_loop_and_random_points():
    rng = np.random.default_rng(0)
    for _ in range(5):
        inst = Prop7Instance(x=tuple(rng.random(4)))
        assert abs(prop7_check(inst, 64)["lhs"] - direct_double_loop(inst, 64)) < 1e-12
        assert prop7_check(inst, 1000)["diff"] < 1e-10


def test_prop7_instance_invariants():
    inst = Prop7Instance()
    a, b = inst.weights(300)
    assert np.allclose(np.abs(a.values), 1) and np.allclose(np.abs(b.values), 1)
    assert kronecker_project(inst.system, inst.observable).terms == ()


def test_prop7_degenerate_point():
    inst = Prop7Instance(x=(0.3, 0.1, 0.3, 0.8))
    a, b = inst.weights(50)
    assert np.all(b.values == 1) and np.array_equal(a.values, vn_sequence(50).values)
    assert prop7_check(inst, 50)["diff"] < 1e-12


def test_prop7_divergence_and_control():
    inst = Prop7Instance()
    assert prop7_divergence(inst, [4 ** k for k in range(1, 10)]) >= 0.5
    assert prop7_divergence(inst, [256, 256]) == 0.0
    assert prop7_control(inst) < 0.1
    with pytest.raises(ValueError):
        prop7_divergence(inst, [])


def test_near_rational_alpha_warns():
    with pytest.warns(RuntimeWarning):
        Prop7Instance(alpha=0.25 + 1e-9)


@pytest.mark.parametrize("N", [1, 5, 64, 128])
def test_prop9_collapse(N):
    assert prop9_check(Prop9Instance(), N)["diff"] < 1e-9


def test_prop9_budget_and_weights():
    inst = Prop9Instance()
    with pytest.raises(ValueError):
        prop9_check(inst, 300)
    for seq in inst.weights(40).values():
        assert np.allclose(np.abs(seq.values), 1.0, atol=1e-15)


def test_prop9_matches_direct_triple_loop():
    inst = Prop9Instance(point=(0.71, 0.05))
    N = 12
    spec = inst.cube_spec(N)
    total = 0j
    for n in range(N):
        for m in range(N):
            for p in range(N):
                term = 1 + 0j
                for s in spec.slots:
                    term *= s.sequence.values[s.pattern.value(n, m, p)]
                total += term
    assert abs(total / N ** 3 - prop9_check(inst, N)["lhs"]) < 1e-13


def test_quadratic_identity():
    assert quadratic_identity_holds(count=1000, seed=1)
    assert quadratic_identity_holds([(1, 2, 3), (-5, 0, 7), (10 ** 30, -1, 3)])


def test_prop9_weights_in_ww1():
    defects = prop9_weight_defects(Prop9Instance())
    assert set(defects) == {f"a{k}" for k in range(1, 7)}
    assert max(defects.values()) < 0.1


def test_uniform_ww_failure_and_control():
    x = (0.1234, 0.5678, 0.8765, 0.4321)
    for N in (8, 100, 4096):
        rep = uniform_ww_failure(x, N=N)
        assert abs(rep.sup_value - 1) < 1e-9
        assert abs(((rep.argmax_t - (-(x[2] - x[0])) % 1) + 0.5) % 1 - 0.5) < 1e-8
    assert uniform_ww_control(x[2:], N=4096).sup_value < 0.1
