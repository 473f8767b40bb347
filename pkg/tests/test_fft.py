import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubeavg.fft import convolve, fft, ifft, next_pow2


@pytest.mark.parametrize("n,expected", [(1, 1), (2, 2), (3, 4), (1000, 1024), (1024, 1024)])
def test_next_pow2(n, expected):
    assert next_pow2(n) == expected


@pytest.mark.parametrize("n", [1, 2, 8, 32, 64, 1024, 1 << 14])
def test_fft_matches_numpy(n):
    rng = np.random.default_rng(n)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    ref = np.fft.fft(x)
    assert np.max(np.abs(fft(x) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))
    assert np.allclose(ifft(fft(x)), x, atol=1e-12)


def test_fft_batched_rows():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(5, 256)) + 0j
    assert np.allclose(fft(x), np.fft.fft(x, axis=-1), atol=1e-11)


def test_fft_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        fft(np.ones(12))


def test_convolve_accuracy_at_large_size():
    rng = np.random.default_rng(2)
    n = 1 << 15
    a = np.exp(2j * np.pi * rng.random(n))
    b = np.exp(2j * np.pi * rng.random(n))
    got = convolve(a, b)
    ref = np.fft.ifft(np.fft.fft(a, 2 * n) * np.fft.fft(b, 2 * n))[: 2 * n - 1]
    # relative to the sup of the result
    assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=60),
    st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=60),
)
def test_convolve_matches_direct(a, b):
    a, b = np.array(a, dtype=complex), np.array(b, dtype=complex)
    got = convolve(a, b)
    assert got.shape == (a.size + b.size - 1,)
    assert np.allclose(got, np.convolve(a, b), atol=1e-9)
