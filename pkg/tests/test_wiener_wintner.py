import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubeavg.cesaro import geometric_average
from cubeavg.dynamics import (
    BoundedSequence,
    Observable,
    Product,
    Rotation,
    SkewProduct2,
    orbit_sequence,
    vn_sequence,
    weyl_sequence,
)
from cubeavg.wiener_wintner import (
    TwistedSumSpec,
    affinity_demo,
    bessel_check,
    correlation,
    et_estimate,
    et_orthogonality,
    twisted_sum,
    ww1_defect,
    ww_sup,
)

A1 = math.sqrt(2) - 1
A2 = (math.sqrt(5) - 1) / 2


def dense_sup(seq, N, factor=64):
    # oracle: plain evaluation on a dense uniform grid
    v = seq.values[:N]
    ts = np.arange(factor * N) / (factor * N)
    best = 0.0
    for chunk in np.array_split(ts, 64):
        vals = np.abs(np.exp(2j * np.pi * np.outer(chunk, np.arange(N))) @ v) / N
        best = max(best, float(vals.max()))
    return best


def test_twisted_sum_examples():
    N = 50
    ones = BoundedSequence.ones(2 * N)
    assert twisted_sum(ones, TwistedSumSpec.standard(N), 0.0) == pytest.approx(1.0)
    th = 0.3
    ch = BoundedSequence(np.exp(2j * np.pi * th * np.arange(N)), 1.0)
    assert twisted_sum(ch, TwistedSumSpec.standard(N), -th % 1) == pytest.approx(1.0)
    assert twisted_sum(ones, TwistedSumSpec(1, 2 * (N - 1), N), 0.0) == pytest.approx((2 * N - 2) / N)
    with pytest.raises(ValueError):
        twisted_sum(ones, TwistedSumSpec(0, 2 * N, N), 0.0)


def test_ww_sup_single_character():
    th, N = 0.2345, 300
    ch = BoundedSequence(np.exp(2j * np.pi * th * np.arange(N)), 1.0)
    rep = ww_sup(ch, TwistedSumSpec.standard(N))
    assert rep.sup_value == pytest.approx(1.0, abs=1e-9)
    assert abs(((rep.argmax_t - (1 - th)) + 0.5) % 1 - 0.5) < 1e-8


def test_ww_sup_weyl_against_dense_oracle():
    small = ww_sup(weyl_sequence(A1, 256), TwistedSumSpec.standard(256))
    big = ww_sup(weyl_sequence(A1, 4096), TwistedSumSpec.standard(4096))
    assert small.sup_value == pytest.approx(dense_sup(weyl_sequence(A1, 256), 256), abs=1e-6)
    assert big.sup_value < small.sup_value
    assert big.sup_value < 0.15


def test_ww_sup_nonergodic_orbit_is_one():
    x = (0.1234, 0.5678, 0.8765, 0.4321)
    S = SkewProduct2(A1)
    for N in (16, 256, 1024):
        seq = orbit_sequence(Product((S, S)), x, Observable.character((0, -1, 0, 1)), N)
        assert ww_sup(seq, TwistedSumSpec.standard(N)).sup_value == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 200), st.integers(0, 2 ** 32 - 1), st.floats(0, 1), st.floats(0, 1))
def test_ww_sup_dominates_spot_checks_and_is_modulation_invariant(N, seed, theta, t):
    rng = np.random.default_rng(seed)
    seq = BoundedSequence(np.exp(2j * np.pi * rng.random(N)), 1.0)
    spec = TwistedSumSpec.standard(N)
    rep = ww_sup(seq, spec)
    assert rep.sup_value >= abs(twisted_sum(seq, spec, t)) - 1e-9
    mod = BoundedSequence(seq.values * np.exp(2j * np.pi * theta * np.arange(N)), 1.0)
    assert ww_sup(mod, spec).sup_value == pytest.approx(rep.sup_value, abs=1e-9)


def test_ww1_defect_examples():
    ones = BoundedSequence.ones(4096)
    assert ww1_defect(ones, [0.0], [256, 512, 1024]) == 0.0
    t = 0.3
    bound = 3 / (256 * abs(1 - np.exp(2j * np.pi * t)))
    assert ww1_defect(ones, [t], [256, 512, 1024]) < bound
    v = vn_sequence(4 ** 9)
    assert ww1_defect(v, [0.0], [4 ** k for k in range(1, 10)]) >= 0.5
    a = v * weyl_sequence(A1, 4 ** 9)
    assert ww1_defect(a, np.arange(128) / 128, [1024, 2048, 4096]) < 0.1


def test_et_estimate_rotation_projection():
    T = Rotation([A1])
    f = Observable.character([1])
    x = 0.3
    for N in (1, 10, 1000):
        assert abs(et_estimate(T, f, [x], A1, N) - np.exp(2j * np.pi * x)) < 1e-12
    t = A1 + 0.5
    N = 1000
    assert abs(et_estimate(T, f, [x], t, N)) <= 2 / (N * abs(1 - np.exp(2j * np.pi * (A1 - t)))) + 1e-15
    S = SkewProduct2(A1)
    for t in (0.0, A1, 0.37):
        assert abs(et_estimate(S, Observable.character([0, 1]), [0.3137, 0.6021], t, 4096)) < 0.05


def test_et_estimate_at_zero_is_birkhoff_mean():
    S = SkewProduct2(A2)
    f = Observable(((( 1, 0), 1.0), ((0, 1), 0.5)))
    seq = orbit_sequence(S, (0.1, 0.2), f, 500)
    assert et_estimate(S, f, (0.1, 0.2), 0.0, 500) == pytest.approx(np.mean(seq.values), abs=1e-14)


def test_et_orthogonality():
    T = Rotation([A1, A2])
    f = Observable(((( 1, 0), 1.0), ((0, 1), 1.0)))
    samples, N = 400, 512
    val = et_orthogonality(T, f, A1, A2, samples, N, seed=1)
    tails = 2 * 2 / (N * abs(1 - np.exp(2j * np.pi * (A1 - A2))))
    assert abs(val) < 3 / math.sqrt(samples) + tails
    same = et_orthogonality(T, f, A1, A1, samples, N, seed=1)
    assert same.real >= 0 and abs(same.imag) < 1e-12
    one = Observable.constant(2)
    assert abs(et_orthogonality(T, one, 0.0, 0.3, 50, N, seed=2)) < 2 / (N * abs(1 - np.exp(2j * np.pi * 0.3)))


def test_bessel_check_examples():
    T = Rotation([A1])
    f = Observable.character([1], 0.7)
    rep = bessel_check(T, f, [A1, 0.1], 200, 512, seed=0)
    assert rep["rhs"] == pytest.approx(0.49)
    assert rep["lhs"] == pytest.approx(0.49, abs=1e-3)
    rep = bessel_check(T, f, [0.1, 0.6], 200, 512, seed=0)
    assert rep["lhs"] < 1e-3 <= rep["rhs"]
    S = SkewProduct2(A1)
    mixed = Observable(((( 1, 0), 0.6), ((0, 1), 0.8), ((2, 1), 0.3)))
    rng = np.random.default_rng(3)
    ts = list(rng.random(8)) + [A1, (2 * A1) % 1]
    samples = 200
    rep = bessel_check(S, mixed, ts, samples, 1024, seed=5)
    assert rep["lhs"] <= rep["rhs"] + 0.05
    assert rep["lhs"] <= rep["rhs"] + 5 / math.sqrt(samples)
    with pytest.raises(ValueError):
        bessel_check(T, f, [0.25, 1.25], 10, 10, seed=0)


def test_correlation_examples():
    w = weyl_sequence(A1, 5000)
    assert correlation(w, 0, 4096) == pytest.approx(1.0, abs=1e-15)
    assert abs(correlation(w, 3, 4096)) < 0.1
    v = vn_sequence(4 ** 8 + 3)
    assert abs(correlation(v, 3, 4 ** 8) - 1) < 0.05
    with pytest.raises(ValueError):
        correlation(w, 2000, 4096)


def test_affinity_demo():
    rows = affinity_demo(A1, [4 ** k for k in range(2, 9)])
    assert rows[-1]["twisted_sup"] < 0.1
    means = [r["mean"] for r in rows]
    assert max(means) - min(means) >= 0.5
    degenerate = affinity_demo(0.0, [64, 256])
    for r in degenerate:
        assert r["twisted_sup"] >= abs(r["mean"]) - 1e-12
