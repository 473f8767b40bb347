"""Explicit divergence witnesses on torus skew products.

Two constructions, both driven through the generic kernels:

* a weighted double average along T = S x S (not ergodic) whose weights
  cancel the orbit phase exactly, leaving (1/N) sum v_n, which diverges;
* a seven-term cube average along the ergodic S with six chirp weights
  chosen through (n+m+p)^2 = (n+m)^2 + (n+p)^2 + (m+p)^2 - n^2 - m^2 - p^2,
  which again collapses to (1/N) sum v_n.

The closed-form right sides are the oracles; left sides never use them.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cesaro import CubeSpec, Slot, cube_average_3, weighted_series
from .dynamics import (
    BoundedSequence,
    Observable,
    Product,
    SkewProduct2,
    frac_mul,
    orbit_sequence,
    vn_sequence,
    warn_if_near_rational,
)
from .wiener_wintner import TwistedSumSpec, WWReport, ww1_defect, ww_sup

__all__ = [
    "DEFAULT_ALPHA",
    "PROP9_BUDGET",
    "Prop7Instance",
    "Prop9Instance",
    "prop7_check",
    "prop7_divergence",
    "prop7_control",
    "prop9_check",
    "prop9_weight_defects",
    "quadratic_identity_holds",
    "uniform_ww_failure",
    "uniform_ww_control",
]

DEFAULT_ALPHA = math.sqrt(2.0) - 1.0
PROP9_BUDGET = 256
# the control runs start past the early transient of the Weyl sums
CONTROL_LADDER = tuple(4 ** k for k in range(4, 10))


def _e(phase) -> np.ndarray:
    return np.exp(2j * np.pi * np.asarray(phase, dtype=np.float64))


def _linear(k: np.ndarray, theta: float) -> np.ndarray:
    return frac_mul(k, theta)


def _unique_ladder(Ns: Iterable[int]) -> tuple[int, ...]:
    Ns = sorted({int(n) for n in Ns})
    if not Ns:
        raise ValueError("need at least one N")
    if Ns[0] < 1:
        raise ValueError("N must be positive")
    return tuple(Ns)


# ---------------------------------------------------------------------------
# double average along S x S

@dataclass(frozen=True)
class Prop7Instance:
    """Weights a_n = v_n e(-n(x3 - x1)), b_m = e(-m(x3 - x1)); f = e(x4 - x2)."""
    alpha: float = DEFAULT_ALPHA
    x: tuple = (0.1234, 0.5678, 0.8765, 0.4321)
    growth: int = 4

    def __post_init__(self):
        x = tuple(float(v) % 1.0 for v in self.x)
        if len(x) != 4:
            raise ValueError("point must have four coordinates")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "alpha", float(self.alpha))
        warn_if_near_rational(self.alpha)

    @property
    def system(self) -> Product:
        S = SkewProduct2(self.alpha)
        return Product((S, S))

    @property
    def observable(self) -> Observable:
        return Observable.character((0, -1, 0, 1))

    @property
    def shift(self) -> float:
        # x3 - x1, the frequency the weights cancel
        return (self.x[2] - self.x[0]) % 1.0

    @property
    def phase(self) -> complex:
        return complex(_e(self.x[3] - self.x[1]))

    def vn(self, N: int) -> BoundedSequence:
        return vn_sequence(N, self.growth)

    def weights(self, N: int) -> tuple[BoundedSequence, BoundedSequence]:
        k = np.arange(N, dtype=np.int64)
        b = _e(-_linear(k, self.shift))
        return BoundedSequence(self.vn(N).values * b, 1.0), BoundedSequence(b, 1.0)


def _prop7_series(inst: Prop7Instance, Ns: Sequence[int]):
    a, b = inst.weights(Ns[-1])
    return weighted_series(a, b, inst.system, inst.observable, inst.x, Ns)


def prop7_check(inst: Prop7Instance, N: int) -> dict:
    """lhs through the weighted double-average kernel, rhs = mean(v) e(x4 - x2)."""
    if N < 1:
        raise ValueError("N must be positive")
    lhs = _prop7_series(inst, (N,)).values[0]
    rhs = float(np.mean(inst.vn(N).values).real) * inst.phase
    return {"lhs": lhs, "rhs": rhs, "diff": abs(lhs - rhs)}


def _re_spread(values, phase: complex) -> float:
    re = [(v * phase.conjugate()).real for v in values]
    return float(max(re) - min(re))


def prop7_divergence(inst: Prop7Instance, Ns: Iterable[int]) -> float:
    """max - min over Ns of Re(lhs e(-(x4 - x2))); >= 0.5 witnesses divergence."""
    Ns = _unique_ladder(Ns)
    return _re_spread(_prop7_series(inst, Ns).values, inst.phase)


def prop7_control(inst: Prop7Instance, Ns: Iterable[int] = CONTROL_LADDER) -> float:
    """Same weights, ergodic S on (x3, x4) with f = e(y); spread of the real part.

    The weighted averages converge here, so the spread is small.
    """
    Ns = _unique_ladder(Ns)
    a, b = inst.weights(Ns[-1])
    series = weighted_series(
        a, b, SkewProduct2(inst.alpha), Observable.character((0, 1)), inst.x[2:], Ns
    )
    return _re_spread(series.values, inst.phase)


# ---------------------------------------------------------------------------
# seven-term cube average along S

@dataclass(frozen=True)
class Prop9Instance:
    """Chirp weights a1..a6 and f(x, y) = e(2y) along S(x, y) = (x + alpha, x + y)."""
    alpha: float = DEFAULT_ALPHA
    point: tuple = (0.3137, 0.6021)
    growth: int = 4

    def __post_init__(self):
        p = tuple(float(v) % 1.0 for v in self.point)
        if len(p) != 2:
            raise ValueError("point must have two coordinates")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "alpha", float(self.alpha))
        warn_if_near_rational(self.alpha)

    @property
    def system(self) -> SkewProduct2:
        return SkewProduct2(self.alpha)

    @property
    def observable(self) -> Observable:
        return Observable.character((0, 2))

    def _chirp(self, length: int) -> np.ndarray:
        k = np.arange(length, dtype=np.int64)
        return _e(frac_mul(k * k, self.alpha))

    def _corrected(self, length: int) -> np.ndarray:
        # e(-k^2 alpha) e(-k (x - alpha/2))
        k = np.arange(length, dtype=np.int64)
        x = self.point[0]
        ph = frac_mul(k * k, self.alpha) + frac_mul(k, x) - frac_mul(k, 0.5 * self.alpha)
        return _e(-ph)

    def weights(self, N: int) -> dict[str, BoundedSequence]:
        """Weights keyed a1..a6, each long enough for its index pattern."""
        single, pair = N, 2 * N - 1
        w = {
            "a1": self._chirp(single),
            "a2": vn_sequence(single, self.growth).values * self._chirp(single),
            "a3": self._corrected(pair),
            "a4": self._chirp(single),
            "a5": self._corrected(pair),
            "a6": self._corrected(pair),
        }
        return {k: BoundedSequence(v, 1.0) for k, v in w.items()}

    def cube_spec(self, N: int) -> CubeSpec:
        w = self.weights(N)
        orbit = orbit_sequence(self.system, self.point, self.observable, 3 * N - 2)
        return CubeSpec((
            Slot(w["a1"], "p"),
            Slot(w["a2"], "n"),
            Slot(w["a3"], "n+p"),
            Slot(w["a4"], "m"),
            Slot(w["a5"], "n+m"),
            Slot(w["a6"], "m+p"),
            Slot(orbit, "n+m+p"),
        ))


def prop9_check(inst: Prop9Instance, N: int, *, budget: int = PROP9_BUDGET, workers: int | None = None) -> dict:
    """lhs through the blocked triple-sum kernel, rhs = mean(v) e(2y)."""
    if N < 1:
        raise ValueError("N must be positive")
    if N > budget:
        raise ValueError(f"N={N} exceeds the triple-sum budget {budget}")
    lhs = cube_average_3(inst.cube_spec(N), N, workers=workers)
    rhs = float(np.mean(vn_sequence(N, inst.growth).values).real) * complex(_e(2 * inst.point[1]))
    return {"lhs": lhs, "rhs": rhs, "diff": abs(lhs - rhs)}


def prop9_weight_defects(
    inst: Prop9Instance,
    Ns: Sequence[int] = (1024, 2048, 4096),
    grid: int = 256,
) -> dict[str, float]:
    """ww1_defect of each weight on a uniform t grid, ladder ``Ns``."""
    w = inst.weights(Ns[-1])
    t_grid = np.arange(grid) / grid
    return {k: ww1_defect(v, t_grid, Ns) for k, v in w.items()}


def quadratic_identity_holds(triples: Iterable[tuple[int, int, int]] | None = None, count: int = 1000, seed: int = 0) -> bool:
    """(n+m+p)^2 == (n+m)^2 + (n+p)^2 + (m+p)^2 - n^2 - m^2 - p^2 in exact integers."""
    if triples is None:
        rng = random.Random(seed)
        triples = [tuple(rng.randrange(-10 ** 12, 10 ** 12) for _ in range(3)) for _ in range(count)]
    return all(
        (n + m + p) ** 2 == (n + m) ** 2 + (n + p) ** 2 + (m + p) ** 2 - n * n - m * m - p * p
        for n, m, p in triples
    )


# ---------------------------------------------------------------------------
# uniform twisted sums

def uniform_ww_failure(
    x: Sequence[float],
    alpha: float = DEFAULT_ALPHA,
    N: int = 4096,
    *,
    grid_factor: int = 8,
    refine_tol: float = 1e-10,
) -> WWReport:
    """Sup over t of the twisted orbit mean of e(x4 - x2) under S x S.

    The orbit is the pure character n -> e(x4 - x2) e(n (x3 - x1)), so the
    sup is 1 at t = -(x3 - x1) mod 1 for every N.
    """
    x = tuple(float(v) for v in x)
    if len(x) != 4:
        raise ValueError("point must have four coordinates")
    warn_if_near_rational(alpha)
    S = SkewProduct2(alpha)
    seq = orbit_sequence(Product((S, S)), x, Observable.character((0, -1, 0, 1)), N)
    return ww_sup(seq, TwistedSumSpec.standard(N), grid_factor, refine_tol)


def uniform_ww_control(
    y: Sequence[float],
    alpha: float = DEFAULT_ALPHA,
    N: int = 4096,
    *,
    grid_factor: int = 8,
    refine_tol: float = 1e-10,
) -> WWReport:
    """Same sup for e(y) along the ergodic S on a two-dimensional point."""
    y = tuple(float(v) for v in y)
    if len(y) != 2:
        raise ValueError("point must have two coordinates")
    seq = orbit_sequence(SkewProduct2(alpha), y, Observable.character((0, 1)), N)
    return ww_sup(seq, TwistedSumSpec.standard(N), grid_factor, refine_tol)
