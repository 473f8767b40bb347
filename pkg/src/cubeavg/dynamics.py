"""Torus systems, trigonometric observables and orbit sequences.

Systems are immutable descriptors acting on points of the d-torus stored as
coordinate tuples reduced into [0, 1).  Iterates use closed forms: for the
skew product S(x, y) = (x + a, x + y),

    S^n(x, y) = (x + n a, y + n x + n(n-1)/2 a)   (mod 1).

Products k*theta with large integer k are reduced exactly via ``frac_mul`` so
orbits stay accurate far beyond the n ~ 1e7 where naive float products lose
all fractional digits.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Rotation",
    "SkewProduct2",
    "Product",
    "Identity",
    "TorusSystem",
    "Observable",
    "BoundedSequence",
    "frac_mul",
    "torus_distance",
    "apply",
    "iterate",
    "iterate_many",
    "orbit_sequence",
    "vn_sequence",
    "weyl_sequence",
    "kronecker_project",
    "commutator_defect",
    "near_rational",
    "is_resonant",
    "is_ergodic",
]

BOUND_SLACK = 1e-12
_HI_BITS = 26
_CHUNK = 1 << 26


# ---------------------------------------------------------------------------
# exact-ish modular arithmetic

def _split(theta):
    # theta >= 0 as hi + lo exactly: hi is theta truncated to 26 significant
    # bits, lo >= 0 carries the remaining <= 27.  Both parts stay nonnegative
    # so reducing them mod 1 never rounds.
    theta = np.asarray(theta, dtype=np.float64)
    _, e = np.frexp(theta)
    # clamp keeps the scale finite for subnormal theta; those contribute < 1e-280
    scale = np.ldexp(1.0, _HI_BITS - np.maximum(e, -960))
    hi = np.floor(theta * scale) / scale
    return hi, theta - hi


def frac_mul(k, theta: float) -> np.ndarray:
    """Fractional part of ``k * theta`` for integer ``k`` (scalar or array).

    ``k`` is cut into 26-bit chunks and |theta| into a 26-bit head and a
    nonnegative tail of at most 27 bits, so
    every partial product is an exact double and is reduced mod 1 exactly.
    Absolute error is a few ulps of 1 for any |k| < 2**63.
    """
    k = np.asarray(k, dtype=np.int64)
    theta = float(theta)
    # frac(k * theta) = -frac(k * |theta|) mod 1
    neg = (k < 0) != (theta < 0)
    kk = np.abs(k)
    hi, lo = _split(abs(theta))
    acc = np.zeros(kk.shape, dtype=np.float64)
    scale = 1.0
    while True:
        chunk = (kk % _CHUNK).astype(np.float64)
        for part in (hi, lo):
            # scale * part is exact (power-of-two scaling), chunk * that too
            acc += np.mod(chunk * np.mod(scale * part, 1.0), 1.0)
        kk = kk // _CHUNK
        if not np.any(kk):
            break
        scale *= _CHUNK
    acc = np.mod(acc, 1.0)
    acc = np.where(neg, np.mod(-acc, 1.0), acc)
    # np.mod can return 1.0 for tiny negative inputs
    return np.where(acc >= 1.0, 0.0, acc)


def _reduce(v) -> np.ndarray:
    v = np.mod(np.asarray(v, dtype=np.float64), 1.0)
    return np.where(v >= 1.0, 0.0, v)


def torus_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Euclidean distance on the torus (per-coordinate circular distance)."""
    d = np.abs(np.mod(np.asarray(p, float) - np.asarray(q, float), 1.0))
    d = np.minimum(d, 1.0 - d)
    return float(np.sqrt(np.sum(d * d)))


# ---------------------------------------------------------------------------
# systems

@dataclass(frozen=True)
class Rotation:
    alphas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.alphas:
            raise ValueError("rotation needs at least one angle")

    @property
    def dimension(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class SkewProduct2:
    """S(x, y) = (x + alpha, x + y) on the 2-torus."""
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def dimension(self) -> int:
        return 2


@dataclass(frozen=True)
class Identity:
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dimension must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def dimension(self) -> int:
        return self.dim


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("product needs at least one factor")

    @property
    def dimension(self) -> int:
        return sum(f.dimension for f in self.factors)


TorusSystem = Union[Rotation, SkewProduct2, Identity, Product]


def _check_dim(system, p) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.shape[-1] != system.dimension:
        raise ValueError(
            f"point has dimension {arr.shape[-1]}, system acts on {system.dimension}"
        )
    return arr


def iterate_many(system: TorusSystem, points, n) -> np.ndarray:
    """Vectorized closed-form iterate.

    ``points`` has shape (..., d); ``n`` is a nonnegative integer or an integer
    array broadcastable against ``points[..., 0]``.  Returns shape
    broadcast(...) + (d,).
    """
    pts = _check_dim(system, points)
    n = np.asarray(n, dtype=np.int64)
    if np.any(n < 0):
        raise ValueError("iterate count must be nonnegative")
    shape = np.broadcast_shapes(pts.shape[:-1], n.shape)
    # n keeps its own shape so phase products are computed once per count
    out = np.empty(shape + (system.dimension,), dtype=np.float64)
    _iterate_into(system, pts, n, out)
    return out


def _iterate_into(system, pts, n, out) -> None:
    if isinstance(system, Identity):
        out[...] = _reduce(pts)
    elif isinstance(system, Rotation):
        for j, a in enumerate(system.alphas):
            out[..., j] = _reduce(pts[..., j] + frac_mul(n, a))
    elif isinstance(system, SkewProduct2):
        x = pts[..., 0]
        y = pts[..., 1]
        out[..., 0] = _reduce(x + frac_mul(n, system.alpha))
        tri = n * (n - 1) // 2
        if np.ndim(x) == 0 and np.ndim(n) == 0:
            nx = frac_mul(n, float(x))
        else:
            nx = _frac_mul_points(n, x)
        out[..., 1] = _reduce(y + nx + frac_mul(tri, system.alpha))
    elif isinstance(system, Product):
        start = 0
        for f in system.factors:
            stop = start + f.dimension
            sub = np.empty(out.shape[:-1] + (f.dimension,), dtype=np.float64)
            _iterate_into(f, pts[..., start:stop], n, sub)
            out[..., start:stop] = sub
            start = stop
    else:
        raise TypeError(f"unsupported system {system!r}")


def _frac_mul_points(n: np.ndarray, x: np.ndarray) -> np.ndarray:
    # frac(n * x) with per-element x: same splitting as frac_mul, vectorized
    hi, lo = _split(x)
    kk = np.array(n, dtype=np.int64, copy=True)
    acc = np.zeros(np.broadcast_shapes(kk.shape, x.shape), dtype=np.float64)
    scale = 1.0
    while True:
        chunk = (kk % _CHUNK).astype(np.float64)
        acc = acc + np.mod(chunk * np.mod(scale * hi, 1.0), 1.0)
        acc = acc + np.mod(chunk * np.mod(scale * lo, 1.0), 1.0)
        kk = kk // _CHUNK
        if not np.any(kk):
            break
        scale *= _CHUNK
    return _reduce(acc)


def apply(system: TorusSystem, p: Sequence[float]) -> tuple[float, ...]:
    """One step of ``system`` from ``p``; coordinates reduced mod 1."""
    pts = _check_dim(system, p)
    if pts.ndim != 1:
        raise ValueError("apply takes a single point")
    if isinstance(system, Identity):
        q = pts
    elif isinstance(system, Rotation):
        q = pts + np.asarray(system.alphas)
    elif isinstance(system, SkewProduct2):
        q = np.array([pts[0] + system.alpha, pts[0] + pts[1]])
    elif isinstance(system, Product):
        parts, start = [], 0
        for f in system.factors:
            parts.extend(apply(f, pts[start:start + f.dimension]))
            start += f.dimension
        q = np.asarray(parts)
    else:
        raise TypeError(f"unsupported system {system!r}")
    return tuple(float(v) for v in _reduce(q))


def iterate(system: TorusSystem, p: Sequence[float], n: int) -> tuple[float, ...]:
    """n-fold application of ``system`` to ``p`` via closed forms."""
    if int(n) != n or n < 0:
        raise ValueError("n must be a nonnegative integer")
    pts = _check_dim(system, p)
    if pts.ndim != 1:
        raise ValueError("iterate takes a single point")
    return tuple(float(v) for v in iterate_many(system, pts, int(n)))


def commutator_defect(s1: TorusSystem, s2: TorusSystem, p: Sequence[float]) -> float:
    """Torus distance between s1(s2(p)) and s2(s1(p))."""
    if s1.dimension != s2.dimension:
        raise ValueError("systems act on different dimensions")
    return torus_distance(apply(s1, apply(s2, p)), apply(s2, apply(s1, p)))


# ---------------------------------------------------------------------------
# observables and sequences

@dataclass(frozen=True)
class Observable:
    """Trigonometric polynomial sum_j c_j exp(2 pi i <k_j, x>)."""
    terms: tuple[tuple[tuple[int, ...], complex], ...]

    def __post_init__(self):
        terms = tuple(
            (tuple(int(v) for v in freq), complex(coef)) for freq, coef in self.terms
        )
        dims = {len(f) for f, _ in terms}
        if len(dims) > 1:
            raise ValueError("frequency vectors of mixed dimension")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def character(cls, freq: Iterable[int], coef: complex = 1.0) -> "Observable":
        return cls(((tuple(freq), coef),))

    @classmethod
    def constant(cls, dimension: int, value: complex = 1.0) -> "Observable":
        return cls((((0,) * dimension, value),))

    @property
    def dimension(self) -> int | None:
        return len(self.terms[0][0]) if self.terms else None

    @property
    def bound(self) -> float:
        return float(sum(abs(c) for _, c in self.terms))

    def norm2_squared(self) -> float:
        """L2 norm squared; terms with equal frequencies are merged first."""
        return float(sum(abs(c) ** 2 for c in self.merged().values()))

    def merged(self) -> dict[tuple[int, ...], complex]:
        out: dict[tuple[int, ...], complex] = {}
        for f, c in self.terms:
            out[f] = out.get(f, 0j) + c
        return out

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        if not self.terms:
            return np.zeros(pts.shape[:-1], dtype=np.complex128)
        if pts.shape[-1] != self.dimension:
            raise ValueError("observable and point dimensions differ")
        val = np.zeros(pts.shape[:-1], dtype=np.complex128)
        for freq, coef in self.terms:
            phase = np.mod(pts @ np.asarray(freq, dtype=np.float64), 1.0)
            val += coef * np.exp(2j * np.pi * phase)
        return val


@dataclass(frozen=True, eq=False)
class BoundedSequence:
    """Finite complex sequence with a certified sup bound."""
    values: np.ndarray
    bound: float

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128).ravel()
        if vals.size == 0:
            raise ValueError("sequence must be nonempty")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bound", float(self.bound))
        if np.max(np.abs(vals)) > self.bound + BOUND_SLACK:
            raise ValueError(
                f"sequence exceeds declared bound {self.bound}: max {np.max(np.abs(vals))}"
            )

    @classmethod
    def from_values(cls, values) -> "BoundedSequence":
        """Bound inferred as the max modulus."""
        vals = np.asarray(values, dtype=np.complex128)
        return cls(vals, float(np.max(np.abs(vals))) if vals.size else 0.0)

    @classmethod
    def ones(cls, n: int) -> "BoundedSequence":
        return cls(np.ones(n), 1.0)

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]

    def __mul__(self, other: "BoundedSequence") -> "BoundedSequence":
        n = min(len(self), len(other))
        return BoundedSequence(self.values[:n] * other.values[:n], self.bound * other.bound)

    def scaled(self, lam: complex) -> "BoundedSequence":
        return BoundedSequence(self.values * lam, self.bound * abs(lam))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoundedSequence):
            return NotImplemented
        return self.bound == other.bound and np.array_equal(self.values, other.values)


def orbit_sequence(system: TorusSystem, p: Sequence[float], f: Observable, N: int) -> BoundedSequence:
    """values[n] = f(T^n p) for n < N."""
    if N < 1:
        raise ValueError("N must be positive")
    pts = _check_dim(system, p)
    if f.terms and f.dimension != system.dimension:
        raise ValueError("observable dimension does not match the system")
    orbit = iterate_many(system, pts, np.arange(N, dtype=np.int64))
    return BoundedSequence(f(orbit), f.bound)


def vn_sequence(N: int, growth: int = 4) -> BoundedSequence:
    """+-1 sequence of constant-sign blocks of lengths growth**k, signs +,-,+,..."""
    if N < 1:
        raise ValueError("N must be positive")
    if growth < 2:
        raise ValueError("growth must be >= 2")
    out = np.empty(N)
    pos, k = 0, 0
    while pos < N:
        length = growth ** k
        out[pos:pos + length] = 1.0 if k % 2 == 0 else -1.0
        pos += length
        k += 1
    return BoundedSequence(out, 1.0)


def weyl_sequence(alpha: float, N: int) -> BoundedSequence:
    """values[n] = exp(2 pi i n^2 alpha)."""
    if N < 1:
        raise ValueError("N must be positive")
    n = np.arange(N, dtype=np.int64)
    return BoundedSequence(np.exp(2j * np.pi * frac_mul(n * n, alpha)), 1.0)


# ---------------------------------------------------------------------------
# Kronecker projection

def _fiber_coordinates(system) -> list[int]:
    if isinstance(system, (Rotation, Identity)):
        return []
    if isinstance(system, SkewProduct2):
        return [1]
    if isinstance(system, Product):
        out, start = [], 0
        for f in system.factors:
            out.extend(start + j for j in _fiber_coordinates(f))
            start += f.dimension
        return out
    raise TypeError(f"no Kronecker projection for {system!r}")


def kronecker_project(system: TorusSystem, f: Observable) -> Observable:
    """Projection of ``f`` onto the span of eigenfunctions of ``system``.

    Characters are eigenfunctions of rotations; for skew products only the
    characters constant along the fiber are, so terms with a nonzero fiber
    frequency are dropped.
    """
    fiber = _fiber_coordinates(system)
    if f.terms and f.dimension != system.dimension:
        raise ValueError("observable dimension does not match the system")
    kept = tuple((fr, c) for fr, c in f.terms if all(fr[j] == 0 for j in fiber))
    return Observable(kept)


# ---------------------------------------------------------------------------
# arithmetic diagnostics

def near_rational(alpha: float, qmax: int = 64, tol: float = 1e-6) -> Fraction | None:
    """Return p/q (q <= qmax) within ``tol`` of alpha, or None."""
    for q in range(1, qmax + 1):
        p = round(alpha * q)
        if abs(alpha - p / q) < tol:
            return Fraction(p, q)
    return None


def warn_if_near_rational(alpha: float, qmax: int = 64, tol: float = 1e-6) -> None:
    r = near_rational(alpha, qmax, tol)
    if r is not None:
        warnings.warn(
            f"alpha={alpha!r} is within {tol} of {r}; orbits will look periodic at desk-scale N",
            RuntimeWarning,
            stacklevel=2,
        )


def is_resonant(alphas: Sequence[float], max_coeff: int = 32, tol: float = 1e-9) -> bool:
    """True if some nonzero integer vector |k_i| <= max_coeff has <k, alpha> ~ 0 mod 1."""
    alphas = np.asarray(alphas, dtype=np.float64)
    d = alphas.size
    q = max_coeff
    while (2 * q + 1) ** d > 2_000_000 and q > 1:
        q //= 2
    grids = np.meshgrid(*([np.arange(-q, q + 1)] * d), indexing="ij")
    ks = np.stack([g.ravel() for g in grids], axis=1)
    ks = ks[np.any(ks != 0, axis=1)]
    vals = np.mod(ks @ alphas, 1.0)
    dist = np.minimum(vals, 1.0 - vals)
    return bool(np.any(dist < tol))


def _base_angles(system) -> list[float] | None:
    if isinstance(system, Identity):
        return None
    if isinstance(system, Rotation):
        return list(system.alphas)
    if isinstance(system, SkewProduct2):
        return [system.alpha]
    if isinstance(system, Product):
        out = []
        for f in system.factors:
            sub = _base_angles(f)
            if sub is None:
                return None
            out.extend(sub)
        return out
    raise TypeError(f"unsupported system {system!r}")


def is_ergodic(system: TorusSystem) -> bool:
    """Ergodicity for the explicit families, with float angles read as exact.

    Every factor here has discrete spectrum generated by its base angles, and
    a product of ergodic systems is ergodic iff their eigenvalue groups meet
    only at 1.  So the test reduces to rational independence of all base
    angles (rotation angles and skew-product angles) together with 1.
    S x S is therefore never ergodic, and Identity never is.
    """
    angles = _base_angles(system)
    if angles is None:
        return False
    return not is_resonant(angles)
