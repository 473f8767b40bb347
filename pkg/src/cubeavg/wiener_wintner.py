"""Twisted sums, the uniform (sup over frequency) engine, and E_t estimators.

``ww_sup`` evaluates |S(t)| on an oversampled uniform grid with one FFT and
then refines, by golden-section search, every grid peak high enough to sit
next to the true maximum (a curvature bound decides which).  Unimodality
within the two cells around a peak is assumed, not proven; the tests
cross-check against a much denser grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import (
    BoundedSequence,
    Observable,
    TorusSystem,
    frac_mul,
    iterate_many,
    kronecker_project,
    orbit_sequence,
    vn_sequence,
    weyl_sequence,
)
from .fft import ifft, next_pow2

__all__ = [
    "TwistedSumSpec",
    "WWReport",
    "twisted_sum",
    "ww_sup",
    "ww_sup_rows",
    "ww1_defect",
    "et_estimate",
    "et_orthogonality",
    "bessel_check",
    "correlation",
    "affinity_demo",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TwistedSumSpec:
    """Index range [start, end] (inclusive), divided by ``normalizer``."""
    start: int
    end: int
    normalizer: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("start must be <= end")
        if self.normalizer < 1:
            raise ValueError("normalizer must be >= 1")

    @classmethod
    def standard(cls, N: int) -> "TwistedSumSpec":
        """0..N-1 normalized by N."""
        return cls(0, N - 1, N)

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class WWReport:
    sup_value: float
    argmax_t: float
    grid_size: int
    refined: bool


def _vals(seq) -> np.ndarray:
    if isinstance(seq, BoundedSequence):
        return seq.values
    return np.asarray(seq, dtype=np.complex128)


def _window(seq, spec: TwistedSumSpec) -> np.ndarray:
    v = _vals(seq)
    if spec.start < 0 or spec.end >= v.size:
        raise ValueError(
            f"range [{spec.start}, {spec.end}] outside sequence of length {v.size}"
        )
    return v[spec.start:spec.end + 1]


def twisted_sum(seq, spec: TwistedSumSpec, t: float) -> complex:
    """(1/normalizer) sum_{k=start}^{end} seq[k] exp(2 pi i k t)."""
    w = _window(seq, spec)
    k = np.arange(spec.start, spec.end + 1, dtype=np.int64)
    phase = np.exp(2j * np.pi * frac_mul(k, float(np.mod(t, 1.0))))
    return complex(np.dot(w, phase) / spec.normalizer)


def _eval_rows(rows: np.ndarray, t: np.ndarray) -> np.ndarray:
    # |sum_r rows[i, r] e(r t_i)|^2 for per-row frequencies t_i; powers of
    # e(t_i) by running product, relative error ~ L * eps
    z = np.exp(2j * np.pi * np.mod(t, 1.0))
    ph = np.empty(rows.shape, dtype=np.complex128)
    ph[:, 0] = 1.0
    ph[:, 1:] = z[:, None]
    np.cumprod(ph, axis=1, out=ph)
    s = np.einsum("ij,ij->i", rows, ph)
    return s.real ** 2 + s.imag ** 2


def _golden(rows: np.ndarray, lo: np.ndarray, hi: np.ndarray, tol: float):
    # batched golden-section maximization of _eval_rows on [lo, hi]
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc = _eval_rows(rows, c)
    fd = _eval_rows(rows, d)
    while np.max(hi - lo) > tol:
        left = fc >= fd  # maximum lies in [lo, d]
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = hi - _INVPHI * (hi - lo)
        new_d = lo + _INVPHI * (hi - lo)
        keep_d = np.where(left, c, new_d)
        keep_c = np.where(left, new_c, d)
        f_keep = np.where(left, fc, fd)
        f_new = _eval_rows(rows, np.where(left, new_c, new_d))
        fc = np.where(left, f_new, f_keep)
        fd = np.where(left, f_keep, f_new)
        c, d = keep_c, keep_d
    better = fd > fc
    return np.where(better, d, c), np.where(better, fd, fc)


def ww_sup_rows(
    rows,
    normalizer: float,
    grid_factor: int = 8,
    refine_tol: float = 1e-10,
    max_candidates: int = 32,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Batched sup_t |(1/normalizer) sum_r rows[i, r] e(r t)| over t in [0, 1).

    Returns (sups, argmaxes, grid_size).  The frequency origin is index 0 of
    each row; shifting the summation range only multiplies by a unimodular
    factor, so the modulus (and argmax) are unchanged.

    The grid holds G >= grid_factor * L points.  g = |sum|^2 is a real
    trigonometric polynomial of degree L - 1, so |g''| <= (2 pi (L - 1))^2 sup g,
    and g' vanishes at the maximizer.  The grid point nearest the maximizer
    therefore has g >= (1 - (pi (L - 1) / G)^2 / 2) sup g.  Grid local maxima
    above that fraction of the grid max are refined (at most
    ``max_candidates`` per row, highest first) by golden-section search over
    the two adjacent cells.  Taking only local maxima assumes g is unimodal
    across the cells next to the maximizer, which holds comfortably at
    oversampling 8 but is not proven.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.complex128))
    if grid_factor < 2:
        raise ValueError("grid_factor must be >= 2")
    if refine_tol <= 0:
        raise ValueError("refine_tol must be positive")
    n_rows, L = rows.shape
    G = next_pow2(grid_factor * L)
    padded = np.zeros((n_rows, G), dtype=np.complex128)
    padded[:, :L] = rows
    grid = ifft(padded) * G
    power = grid.real ** 2 + grid.imag ** 2
    j = np.argmax(power, axis=1)
    best_val = power[np.arange(n_rows), j]
    best_t = j / G
    if L > 1:
        keep = max(0.0, 1.0 - 0.5 * (math.pi * (L - 1) / G) ** 2)
        peak = (power >= np.roll(power, 1, axis=1)) & (power >= np.roll(power, -1, axis=1))
        score = np.where(peak & (power >= keep * best_val[:, None]), power, -1.0)
        K = min(max_candidates, G)
        idx = np.argpartition(-score, K - 1, axis=1)[:, :K]
        r_idx, k_idx = np.nonzero(np.take_along_axis(score, idx, axis=1) >= 0.0)
        cand = idx[r_idx, k_idx] / G
        t, f = _golden(rows[r_idx], cand - 1.0 / G, cand + 1.0 / G, refine_tol)
        # best candidate per row; ties go to the lowest candidate position
        order = np.lexsort((np.arange(f.size), -f, r_idx))
        rs = r_idx[order]
        first = order[np.r_[True, rs[1:] != rs[:-1]]]
        rows_first = r_idx[first]
        better = f[first] > best_val[rows_first]
        best_val[rows_first[better]] = f[first][better]
        best_t[rows_first[better]] = t[first][better]
    sups = np.sqrt(best_val) / normalizer
    return sups, np.mod(best_t, 1.0), G


def ww_sup(seq, spec: TwistedSumSpec, grid_factor: int = 8, refine_tol: float = 1e-10) -> WWReport:
    """sup_t |twisted_sum(seq, spec, t)| with its maximizing frequency."""
    w = _window(seq, spec)
    sups, ts, G = ww_sup_rows(w[None, :], spec.normalizer, grid_factor, refine_tol)
    t = float(ts[0])
    if t >= 1.0:
        t = 0.0
    return WWReport(float(sups[0]), t, G, spec.length > 1)


def _ladder(Ns) -> tuple[int, ...]:
    Ns = tuple(int(n) for n in Ns)
    if not Ns or Ns[0] < 1 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must be a strictly increasing ladder of positive integers")
    return Ns


def ww1_defect(seq, t_grid: Iterable[float], Ns: Iterable[int]) -> float:
    """max_t max_j |A_{N_{j+1}}(t) - A_{N_j}(t)|, A_N(t) = (1/N) sum_{n<N} seq[n] e(n t).

    A small value is evidence the twisted means converge at every grid
    frequency; a large one certifies divergence at the maximizing t.
    """
    Ns = _ladder(Ns)
    v = _vals(seq)
    if v.size < Ns[-1]:
        raise ValueError(f"sequence shorter than {Ns[-1]}")
    ts = np.mod(np.asarray(list(t_grid), dtype=np.float64), 1.0)
    if ts.size == 0 or len(Ns) < 2:
        return 0.0
    k = np.arange(Ns[-1], dtype=np.int64)
    worst = 0.0
    for chunk in np.array_split(ts, max(1, ts.size // 32)):
        ph = np.exp(2j * np.pi * np.stack([frac_mul(k, t) for t in chunk]))
        cs = np.cumsum(ph * v[None, : Ns[-1]], axis=1)
        A = np.stack([cs[:, N - 1] / N for N in Ns], axis=1)
        worst = max(worst, float(np.max(np.abs(np.diff(A, axis=1)))))
    return worst


def et_estimate(system: TorusSystem, f: Observable, x, t: float, N: int) -> complex:
    """(1/N) sum_{n<N} f(T^n x) exp(-2 pi i n t)."""
    vals = orbit_sequence(system, x, f, N).values
    k = np.arange(N, dtype=np.int64)
    return complex(np.mean(vals * np.exp(-2j * np.pi * frac_mul(k, float(np.mod(t, 1.0))))))


def _et_samples(system, f, ts, N, samples, seed, block=256) -> np.ndarray:
    # E_t estimates at uniformly sampled points: shape (samples, len(ts))
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if N < 1:
        raise ValueError("N must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    k = np.arange(N, dtype=np.int64)
    phases = np.exp(-2j * np.pi * np.stack([frac_mul(k, float(np.mod(t, 1.0))) for t in ts]))
    out = np.empty((samples, len(ts)), dtype=np.complex128)
    done = 0
    while done < samples:
        size = min(block, samples - done)
        pts = rng.random((size, system.dimension))
        vals = f(iterate_many(system, pts[:, None, :], k[None, :]))
        out[done:done + size] = vals @ phases.T / N
        done += size
    return out


def et_orthogonality(system, f, t: float, s: float, samples: int, N: int, seed: int) -> complex:
    """Monte Carlo estimate of the integral of E_t(f) * conj(E_s(f))."""
    est = _et_samples(system, f, [t, s], N, samples, seed)
    return complex(np.mean(est[:, 0] * np.conj(est[:, 1])))


def bessel_check(system, f, t_list: Sequence[float], samples: int, N: int, seed: int) -> dict:
    """lhs = sum_k ||E_{t_k}(f)||^2 (Monte Carlo); rhs = ||projection onto eigenfunctions||^2."""
    ts = [float(np.mod(t, 1.0)) for t in t_list]
    if len(set(ts)) != len(ts):
        raise ValueError("t_list must be distinct mod 1")
    rhs = kronecker_project(system, f).norm2_squared()
    est = _et_samples(system, f, ts, N, samples, seed)
    lhs = float(np.sum(np.mean(np.abs(est) ** 2, axis=0)))
    return {"lhs": lhs, "rhs": rhs}


def correlation(seq, h: int, N: int) -> complex:
    """(1/N) sum_{n<N} seq[n] conj(seq[n+h])."""
    if h < 0 or N < 1:
        raise ValueError("need h >= 0 and N >= 1")
    v = _vals(seq)
    if v.size < N + h:
        raise ValueError(f"sequence needs length >= {N + h}")
    return complex(np.mean(v[:N] * np.conj(v[h:h + N])))


def affinity_demo(alpha: float, Ns: Iterable[int], growth: int = 4, grid_factor: int = 8) -> list[dict]:
    """Per N: sup_t |(1/N) sum v_n e(n^2 alpha) e(n t)| next to the plain mean of v_n."""
    Ns = _ladder(Ns)
    v = vn_sequence(Ns[-1], growth)
    a = v * weyl_sequence(alpha, Ns[-1])
    rows = []
    for N in Ns:
        rep = ww_sup(a, TwistedSumSpec.standard(N), grid_factor=grid_factor)
        rows.append({"N": N, "twisted_sup": rep.sup_value, "argmax_t": rep.argmax_t,
                     "mean": float(np.mean(v.values[:N].real))})
    return rows
