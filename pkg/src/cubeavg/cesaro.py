"""Multilinear Cesaro averages along cubes.

Two-index averages

    (1/N^2) sum_{n,m<N} a_n b_m c_{n+m}

run either as a direct double loop or through one zero-padded FFT
convolution.  Three-index averages over the cube patterns n, m, p, n+m,
n+p, m+p, n+m+p run as a blocked triple loop whose per-block partial sums
are reduced in a fixed order, so the result does not depend on the number
of worker threads.

All sums run over indices 0..N-1.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .dynamics import (
    BoundedSequence,
    Observable,
    TorusSystem,
    frac_mul,
    iterate_many,
    orbit_sequence,
)
from .fft import convolve

__all__ = [
    "PATTERNS",
    "IndexPattern",
    "Slot",
    "CubeSpec",
    "CesaroSeries",
    "default_workers",
    "cube_average_2",
    "cube_average_3",
    "theorem1_series",
    "theorem1_rotation_closed_form",
    "geometric_average",
    "weighted_series",
    "l2_cauchy_estimate",
]

_INDEX_ORDER = ("n", "m", "p")
PATTERNS = ("n", "m", "p", "n+m", "n+p", "m+p", "n+m+p")
THEOREM1_PATTERNS = ("n", "m", "p", "n+m", "n+p", "m+p")
WORKERS_ENV = "CUBEAVG_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class IndexPattern:
    """Nonempty subset of {n, m, p}, read as the sum of its members."""
    indices: frozenset

    def __post_init__(self):
        idx = frozenset(self.indices)
        if not idx or not idx <= set(_INDEX_ORDER):
            raise ValueError(f"bad index pattern {sorted(idx)}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def parse(cls, text: "str | IndexPattern") -> "IndexPattern":
        if isinstance(text, IndexPattern):
            return text
        parts = [t.strip() for t in str(text).split("+")]
        if len(set(parts)) != len(parts):
            raise ValueError(f"repeated index in pattern {text!r}")
        return cls(frozenset(parts))

    def __str__(self) -> str:
        return "+".join(i for i in _INDEX_ORDER if i in self.indices)

    def max_index(self, N: int) -> int:
        return len(self.indices) * (N - 1)

    def value(self, n, m, p):
        env = {"n": n, "m": m, "p": p}
        return sum(env[i] for i in _INDEX_ORDER if i in self.indices)


@dataclass(frozen=True)
class Slot:
    sequence: BoundedSequence
    pattern: IndexPattern
    twist: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pattern", IndexPattern.parse(self.pattern))
        object.__setattr__(self, "twist", float(self.twist))


@dataclass(frozen=True)
class CubeSpec:
    slots: tuple

    def __post_init__(self):
        slots = tuple(s if isinstance(s, Slot) else Slot(*s) for s in self.slots)
        if not slots:
            raise ValueError("cube spec needs at least one slot")
        if len(slots) > 7:
            raise ValueError("at most seven slots")
        object.__setattr__(self, "slots", slots)

    def check_lengths(self, N: int) -> None:
        for k, s in enumerate(self.slots):
            need = s.pattern.max_index(N) + 1
            if len(s.sequence) < need:
                raise ValueError(
                    f"slot {k} ({s.pattern}) needs length {need}, has {len(s.sequence)}"
                )

    @property
    def bound(self) -> float:
        return math.prod(s.sequence.bound for s in self.slots)


@dataclass(frozen=True)
class CesaroSeries:
    Ns: tuple
    values: tuple

    def __post_init__(self):
        Ns = tuple(int(n) for n in self.Ns)
        vals = tuple(complex(v) for v in self.values)
        if len(Ns) != len(vals):
            raise ValueError("Ns and values differ in length")
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ValueError("Ns must be strictly increasing")
        object.__setattr__(self, "Ns", Ns)
        object.__setattr__(self, "values", vals)

    def increments(self) -> list[float]:
        """|M_{N_{j+1}} - M_{N_j}|; the Cauchy increments on a dyadic ladder."""
        return [abs(b - a) for a, b in zip(self.values, self.values[1:])]

    def oscillation(self) -> float:
        """Largest distance between any two values of the series."""
        v = np.asarray(self.values)
        return float(np.max(np.abs(v[:, None] - v[None, :]))) if v.size else 0.0


def _check_N(N: int) -> int:
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    return int(N)


def _vals(seq) -> np.ndarray:
    if isinstance(seq, BoundedSequence):
        return seq.values
    return np.asarray(seq, dtype=np.complex128)


def cube_average_2(a, b, c, N: int, method: str = "convolution") -> complex:
    """(1/N^2) sum_{n,m<N} a_n b_m c_{n+m}."""
    N = _check_N(N)
    a, b, c = _vals(a), _vals(b), _vals(c)
    if a.size < N or b.size < N:
        raise ValueError(f"a and b need length >= {N}")
    if c.size < 2 * N - 1:
        raise ValueError(f"c needs length >= {2 * N - 1}")
    if method == "naive":
        total = 0j
        bN = b[:N]
        for n in range(N):
            total += a[n] * np.dot(bN, c[n:n + N])
        return complex(total / (N * N))
    if method == "convolution":
        w = convolve(a[:N], b[:N])
        return complex(np.dot(w, c[: 2 * N - 1]) / (N * N))
    raise ValueError(f"unknown method {method!r}")


def _twisted(slot: Slot, length: int) -> np.ndarray:
    vals = slot.sequence.values[:length]
    if slot.twist == 0.0:
        return vals
    k = np.arange(length, dtype=np.int64)
    return vals * np.exp(2j * np.pi * frac_mul(k, slot.twist))


def _block_partials(factors, bn: tuple[int, int], N: int, block: int) -> list[complex]:
    n_idx = np.arange(*bn)[:, None, None]
    out = []
    for m0 in range(0, N, block):
        m_idx = np.arange(m0, min(m0 + block, N))[None, :, None]
        for p0 in range(0, N, block):
            p_idx = np.arange(p0, min(p0 + block, N))[None, None, :]
            env = {"n": n_idx, "m": m_idx, "p": p_idx}
            arrays = []
            for pattern, arr in factors:
                idx = sum(env[i] for i in _INDEX_ORDER if i in pattern.indices)
                arrays.append(arr[idx])
            # lower-rank factors first so broadcasting does most of the work
            arrays.sort(key=lambda x: x.size)
            out.append(complex(np.sum(reduce(np.multiply, arrays))))
    return out


def cube_average_3(spec: CubeSpec, N: int, *, block: int = 64, workers: int | None = None) -> complex:
    """(1/N^3) sum_{n,m,p<N} prod_slots seq[pattern] * exp(2 pi i pattern * twist).

    Slots sharing a pattern are multiplied together first.  Parallel over
    n-blocks; partial sums are combined in block order with ``math.fsum``.
    """
    N = _check_N(N)
    if not isinstance(spec, CubeSpec):
        spec = CubeSpec(tuple(spec))
    spec.check_lengths(N)
    if block < 1:
        raise ValueError("block must be positive")
    merged: dict[IndexPattern, np.ndarray] = {}
    for s in spec.slots:
        arr = _twisted(s, s.pattern.max_index(N) + 1)
        merged[s.pattern] = merged[s.pattern] * arr if s.pattern in merged else arr
    factors = sorted(merged.items(), key=lambda kv: (len(kv[0].indices), str(kv[0])))

    n_blocks = [(n0, min(n0 + block, N)) for n0 in range(0, N, block)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(n_blocks) == 1:
        partials = [_block_partials(factors, bn, N, block) for bn in n_blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda bn: _block_partials(factors, bn, N, block), n_blocks))
    flat = [z for row in partials for z in row]
    total = complex(math.fsum(z.real for z in flat), math.fsum(z.imag for z in flat))
    return total / float(N) ** 3


def geometric_average(theta: float, N: int) -> complex:
    """(1/N) sum_{k<N} exp(2 pi i k theta), in closed form."""
    N = _check_N(N)
    th = float(np.mod(theta, 1.0))
    if min(th, 1.0 - th) < 1e-15:
        return 1.0 + 0j
    num = np.exp(2j * np.pi * float(frac_mul(N, th))) - 1.0
    return complex(num / (N * (np.exp(2j * np.pi * th) - 1.0)))


def _ladder(Ns: Iterable[int]) -> tuple[int, ...]:
    Ns = tuple(_check_N(n) for n in Ns)
    if not Ns:
        raise ValueError("empty N ladder")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must be strictly increasing")
    return Ns


def theorem1_series(
    systems: Sequence[TorusSystem],
    fs: Sequence[Observable],
    x: Sequence[float],
    Ns: Iterable[int],
    *,
    workers: int | None = None,
) -> CesaroSeries:
    """Six-function cube average f1(T1^n x) f2(T2^m x) f3(T3^p x) f4(T4^{n+m} x)
    f5(T5^{n+p} x) f6(T6^{m+p} x), evaluated along the ladder ``Ns``."""
    if len(systems) != 6 or len(fs) != 6:
        raise ValueError("need exactly six systems and six observables")
    Ns = _ladder(Ns)
    length = 2 * Ns[-1] - 1
    seqs = [orbit_sequence(T, x, f, length) for T, f in zip(systems, fs)]
    spec = CubeSpec(tuple(Slot(s, pat) for s, pat in zip(seqs, THEOREM1_PATTERNS)))
    return CesaroSeries(Ns, tuple(cube_average_3(spec, N, workers=workers) for N in Ns))


def theorem1_rotation_closed_form(
    alphas: Sequence[Sequence[float]],
    fs: Sequence[Observable],
    x: Sequence[float],
    N: int,
) -> complex:
    """Theorem-1 average when every T_i is a rotation and every f_i a character.

    f_i(T_i^k x) = c_i e(<k_i, x>) e(k theta_i) with theta_i = <k_i, alpha_i>,
    so the triple sum factors into three geometric averages in n, m and p.
    """
    const = 1 + 0j
    thetas = []
    xv = np.asarray(x, dtype=np.float64)
    for al, f in zip(alphas, fs):
        if len(f.terms) != 1:
            raise ValueError("closed form needs single-character observables")
        freq, coef = f.terms[0]
        const *= coef * np.exp(2j * np.pi * float(np.dot(freq, xv)))
        thetas.append(float(np.dot(freq, al)))
    t1, t2, t3, t4, t5, t6 = thetas
    return complex(
        const
        * geometric_average(t1 + t4 + t5, N)
        * geometric_average(t2 + t4 + t6, N)
        * geometric_average(t3 + t5 + t6, N)
    )


def weighted_series(a, b, system: TorusSystem, f: Observable, x, Ns: Iterable[int]) -> CesaroSeries:
    """M_N = (1/N^2) sum_{n,m<N} a_n b_m f(T^{n+m} x) along ``Ns``."""
    Ns = _ladder(Ns)
    top = Ns[-1]
    if len(_vals(a)) < top or len(_vals(b)) < top:
        raise ValueError(f"weights need length >= {top}")
    c = orbit_sequence(system, x, f, 2 * top - 1)
    return CesaroSeries(Ns, tuple(cube_average_2(a, b, c, N) for N in Ns))


def l2_cauchy_estimate(
    system: TorusSystem,
    f: Observable,
    a,
    b,
    N: int,
    M: int,
    samples: int,
    seed: int,
    *,
    block: int = 1024,
) -> float:
    """Monte Carlo estimate of ||M_N - M_M||_{L^2(mu)} for the weighted average.

    The weight convolution w = a * b does not depend on the point, so each
    sample costs two dot products against its orbit.
    """
    N, M = _check_N(N), _check_N(M)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a, b = _vals(a), _vals(b)
    top = max(N, M)
    if a.size < top or b.size < top:
        raise ValueError(f"weights need length >= {top}")
    if N == M:
        return 0.0
    wN = convolve(a[:N], b[:N]) / (N * N)
    wM = convolve(a[:M], b[:M]) / (M * M)
    length = 2 * top - 1
    ks = np.arange(length, dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sq = []
    done = 0
    while done < samples:
        size = min(block, samples - done)
        pts = rng.random((size, system.dimension))
        orbit = iterate_many(system, pts[:, None, :], ks[None, :])
        vals = f(orbit)
        diff = vals[:, : 2 * N - 1] @ wN - vals[:, : 2 * M - 1] @ wM
        sq.append(float(np.sum(np.abs(diff) ** 2)))
        done += size
    return math.sqrt(math.fsum(sq) / samples)
