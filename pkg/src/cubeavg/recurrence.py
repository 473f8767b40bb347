"""Recurrence series for two and three transformations.

Sets are finite unions of axis-parallel boxes on the torus.  When every map
is a translation (rotations, identity, products of these) the preimage
T^{-n} A is A shifted by -n*alpha, so intersection measures are computed
exactly from arc overlaps.  Anything involving a skew product is estimated
by Monte Carlo with a fixed seed; reports record which path ran.

Recurrence sums run over n, m = 1..N.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Iterable, Sequence

import numpy as np

from .dynamics import (
    Identity,
    Product,
    Rotation,
    SkewProduct2,
    TorusSystem,
    frac_mul,
    is_ergodic,
    iterate_many,
)
from .cesaro import default_workers
from .fft import fft, ifft, next_pow2

__all__ = [
    "BoxSet",
    "RecurrenceReport",
    "MCConfig",
    "translation_vector",
    "intersection_measure",
    "khintchine2_series",
    "khintchine3_series",
    "conditional_product_integral",
    "threshold_root",
    "delta_threshold",
]


# ---------------------------------------------------------------------------
# box sets

Box = tuple  # tuple of (lo, hi) per coordinate, 0 <= lo < hi <= 1


def _split_interval(lo: float, hi: float) -> list[tuple[float, float]]:
    # an interval given as [lo, hi) on the circle; lo > hi wraps through 0
    if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
        raise ValueError("interval endpoints must lie in [0, 1]")
    if lo < hi:
        return [(lo, hi)]
    if lo == hi:
        return []
    return [p for p in ((lo, 1.0), (0.0, hi)) if p[0] < p[1]]


def _box_minus(box: Box, other: Box) -> list[Box]:
    # box \ other as disjoint boxes
    inter = [(max(a, c), min(b, d)) for (a, b), (c, d) in zip(box, other)]
    if any(lo >= hi for lo, hi in inter):
        return [box]
    out = []
    rest = list(box)
    for j, ((a, b), (lo, hi)) in enumerate(zip(box, inter)):
        if a < lo:
            out.append(tuple(rest[:j]) + ((a, lo),) + tuple(rest[j + 1:]))
        if hi < b:
            out.append(tuple(rest[:j]) + ((hi, b),) + tuple(rest[j + 1:]))
        rest[j] = (lo, hi)
    return out


@dataclass(frozen=True)
class BoxSet:
    """Finite union of disjoint boxes in [0, 1)^d."""
    dimension: int
    boxes: tuple = ()

    @classmethod
    def from_intervals(cls, boxes: Iterable[Sequence[tuple[float, float]]], dimension: int | None = None) -> "BoxSet":
        """Build from boxes given as per-coordinate (lo, hi) arcs.

        lo > hi denotes an arc wrapping through 0.  Overlaps are removed on
        insertion so stored boxes are disjoint.
        """
        boxes = [tuple(tuple(map(float, iv)) for iv in b) for b in boxes]
        if dimension is None:
            if not boxes:
                raise ValueError("dimension needed for an empty set")
            dimension = len(boxes[0])
        stored: list[Box] = []
        for b in boxes:
            if len(b) != dimension:
                raise ValueError("box dimension mismatch")
            for piece in cartesian(*[_split_interval(lo, hi) for lo, hi in b]):
                pieces = [tuple(piece)]
                for s in stored:
                    pieces = [q for p in pieces for q in _box_minus(p, s)]
                stored.extend(pieces)
        return cls(int(dimension), tuple(stored))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "BoxSet":
        return cls.from_intervals([[(lo, hi)]])

    @classmethod
    def full(cls, dimension: int) -> "BoxSet":
        return cls.from_intervals([[(0.0, 1.0)] * dimension])

    def measure(self) -> float:
        return float(sum(math.prod(hi - lo for lo, hi in b) for b in self.boxes))

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        if pts.shape[-1] != self.dimension:
            raise ValueError("point dimension mismatch")
        inside = np.zeros(pts.shape[:-1], dtype=bool)
        for b in self.boxes:
            hit = np.ones(pts.shape[:-1], dtype=bool)
            for j, (lo, hi) in enumerate(b):
                hit &= (pts[..., j] >= lo) & (pts[..., j] < hi)
            inside |= hit
        return inside


# ---------------------------------------------------------------------------
# exact path

def translation_vector(system: TorusSystem) -> np.ndarray | None:
    """Per-coordinate translation if ``system`` is a translation, else None."""
    if isinstance(system, Identity):
        return np.zeros(system.dim)
    if isinstance(system, Rotation):
        return np.asarray(system.alphas, dtype=np.float64)
    if isinstance(system, Product):
        parts = [translation_vector(f) for f in system.factors]
        if any(p is None for p in parts):
            return None
        return np.concatenate(parts)
    return None


def _arc_pieces(lo: np.ndarray, length: float) -> list[tuple[np.ndarray, np.ndarray]]:
    # arc [lo, lo + length) with lo in [0, 1) as two linear pieces
    end = lo + length
    first = (lo, np.minimum(end, 1.0))
    second = (np.zeros_like(lo), np.maximum(end - 1.0, 0.0))
    return [first, second]


def _exact_measure(A: BoxSet, shifts: list[np.ndarray]) -> np.ndarray:
    # measure of A ∩ (A - s_1) ∩ ... ∩ (A - s_r); each s_i has shape (K, d)
    K = shifts[0].shape[0] if shifts else 1
    total = np.zeros(K)
    for combo in cartesian(A.boxes, repeat=len(shifts) + 1):
        vol = np.ones(K)
        for j in range(A.dimension):
            lo0, hi0 = combo[0][j]
            pieces_per_set = []
            for box, s in zip(combo[1:], shifts):
                lo, hi = box[j]
                start = np.mod(lo - s[:, j], 1.0)
                start = np.where(start >= 1.0, 0.0, start)
                pieces_per_set.append(_arc_pieces(start, hi - lo))
            overlap = np.zeros(K)
            for chosen in cartesian(*pieces_per_set):
                lo_max = np.full(K, lo0)
                hi_min = np.full(K, hi0)
                for plo, phi in chosen:
                    lo_max = np.maximum(lo_max, plo)
                    hi_min = np.minimum(hi_min, phi)
                overlap += np.maximum(hi_min - lo_max, 0.0)
            vol *= overlap
        total += vol
    return total


def _shift(alpha: np.ndarray, k: np.ndarray) -> np.ndarray:
    return np.stack([frac_mul(k, a) for a in alpha], axis=-1)


# ---------------------------------------------------------------------------
# Monte Carlo path

@dataclass(frozen=True)
class MCConfig:
    samples: int = 100_000
    seed: int = 0
    block: int = 2048

    def __post_init__(self):
        if self.samples < 1 or self.block < 1:
            raise ValueError("samples and block must be positive")


def _map_blocks(fn, cfg: MCConfig, dimension: int, workers: int | None = None) -> list:
    """Apply ``fn`` to each sample block; results come back in block order.

    Block b draws from child b of the seed, so the partition and hence the
    result do not depend on the worker count.
    """
    n_blocks = -(-cfg.samples // cfg.block)
    children = np.random.SeedSequence(cfg.seed).spawn(n_blocks)

    def run(b):
        size = min(cfg.block, cfg.samples - b * cfg.block)
        return fn(np.random.default_rng(children[b]).random((size, dimension)))

    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n_blocks == 1:
        return [run(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(n_blocks)))


def intersection_measure(
    A: BoxSet,
    preimages: Sequence[tuple[TorusSystem, int]],
    *,
    method: str = "auto",
    mc: MCConfig | None = None,
    workers: int | None = None,
) -> tuple[float, str]:
    """mu(A ∩ T_1^{-k_1} A ∩ ... ) and the path used ("exact" or "monte-carlo")."""
    for T, k in preimages:
        if T.dimension != A.dimension:
            raise ValueError("system and set dimensions differ")
        if k < 0:
            raise ValueError("iterate counts must be nonnegative")
    vecs = [translation_vector(T) for T, _ in preimages]
    exact_ok = all(v is not None for v in vecs)
    if method == "auto":
        method = "exact" if exact_ok else "monte-carlo"
    if method == "exact":
        if not exact_ok:
            raise ValueError("exact path needs translation systems only")
        shifts = [_shift(v, np.array([k], dtype=np.int64)) for v, (_, k) in zip(vecs, preimages)]
        return float(_exact_measure(A, shifts)[0]), "exact"
    if method != "monte-carlo":
        raise ValueError(f"unknown method {method!r}")
    cfg = mc or MCConfig()

    def block(pts):
        ok = A.contains(pts)
        for T, k in preimages:
            ok &= A.contains(iterate_many(T, pts, k))
        return int(np.count_nonzero(ok))

    return sum(_map_blocks(block, cfg, A.dimension, workers)) / cfg.samples, "monte-carlo"


# ---------------------------------------------------------------------------
# recurrence series

@dataclass(frozen=True)
class RecurrenceReport:
    muA: float
    Ns: tuple
    series_values: tuple
    limit_estimate: float
    uncertainty: float
    lower_bound: float
    bound_name: str
    satisfied: bool | None
    path: str
    convention: str = "n,m = 1..N"
    samples: int | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict, compare=False)


def _ladder(Ns) -> tuple[int, ...]:
    Ns = tuple(int(n) for n in Ns)
    if not Ns or Ns[0] < 1 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must be strictly increasing positive integers")
    return Ns


def _limit(values: Sequence[float]) -> tuple[float, float]:
    # last value, with the largest of the last three increments as the band
    incs = [abs(b - a) for a, b in zip(values, values[1:])][-3:]
    return float(values[-1]), float(max(incs) if incs else 0.0)


def _grid_partial_sums(grid: np.ndarray, Ns: Sequence[int]) -> list[float]:
    # grid[n-1, m-1] summed over n, m <= N, divided by N^2
    cs = grid.cumsum(axis=0).cumsum(axis=1)
    return [float(cs[N - 1, N - 1] / (N * N)) for N in Ns]


def _exact_series2(T1, T2, A: BoxSet, Ns) -> list[float]:
    top = Ns[-1]
    v1, v2 = translation_vector(T1), translation_vector(T2)
    n = np.arange(1, top + 1, dtype=np.int64)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    s1 = _shift(v1, nn.ravel())
    s2 = _shift(v2, (nn + mm).ravel())
    grid = _exact_measure(A, [s1, s2]).reshape(top, top)
    return _grid_partial_sums(grid, Ns)


def _exact_series3(T1, T2, T3, A: BoxSet, Ns) -> list[float]:
    top = Ns[-1]
    v1, v2, v3 = (translation_vector(T) for T in (T1, T2, T3))
    n = np.arange(1, top + 1, dtype=np.int64)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    grid = _exact_measure(
        A, [_shift(v1, nn.ravel()), _shift(v2, mm.ravel()), _shift(v3, (nn + mm).ravel())]
    ).reshape(top, top)
    return _grid_partial_sums(grid, Ns)


def _membership(T, A: BoxSet, pts: np.ndarray, count: int) -> np.ndarray:
    # 1_A(T^k x) for k = 0..count-1, shape (samples, count)
    k = np.arange(count, dtype=np.int64)
    return A.contains(iterate_many(T, pts[:, None, :], k[None, :])).astype(np.float64)


def _mc_series2(T1, T2, A: BoxSet, Ns, cfg: MCConfig, workers=None) -> list[float]:
    top = Ns[-1]

    def block(pts):
        sums = np.zeros(len(Ns))
        in_a = A.contains(pts).astype(np.float64)
        u = _membership(T1, A, pts, top + 1)
        h = _membership(T2, A, pts, 2 * top + 1)
        prefix = np.concatenate([np.zeros((h.shape[0], 1)), np.cumsum(h, axis=1)], axis=1)
        for j, N in enumerate(Ns):
            n = np.arange(1, N + 1)
            # sum_{m=1}^N h[n+m] = prefix[n+N+1] - prefix[n+1]
            inner = prefix[:, n + N + 1] - prefix[:, n + 1]
            sums[j] = float(np.sum(in_a * np.sum(u[:, n] * inner, axis=1))) / (N * N)
        return sums

    parts = _map_blocks(block, cfg, A.dimension, workers)
    return [math.fsum(p[j] for p in parts) / cfg.samples for j in range(len(Ns))]


def _mc_series3(T1, T2, T3, A: BoxSet, Ns, cfg: MCConfig, workers=None) -> list[float]:
    top = Ns[-1]

    def block(pts):
        sums = np.zeros(len(Ns))
        in_a = A.contains(pts).astype(np.float64)
        u = _membership(T1, A, pts, top + 1)
        v = _membership(T2, A, pts, top + 1)
        w = _membership(T3, A, pts, 2 * top + 1)
        for j, N in enumerate(Ns):
            # sum_{n,m=1}^N u_n v_m w_{n+m} via one batched convolution
            size = next_pow2(2 * N - 1)
            pu = np.zeros((u.shape[0], size))
            pv = np.zeros((u.shape[0], size))
            pu[:, :N] = u[:, 1:N + 1]
            pv[:, :N] = v[:, 1:N + 1]
            conv = ifft(fft(pu) * fft(pv)).real[:, : 2 * N - 1]
            val = np.sum(conv * w[:, 2:2 * N + 1], axis=1)
            sums[j] = float(np.sum(in_a * val)) / (N * N)
        return sums

    parts = _map_blocks(block, cfg, A.dimension, workers)
    return [math.fsum(p[j] for p in parts) / cfg.samples for j in range(len(Ns))]


def _report(muA, Ns, values, lower, name, applies, path, cfg, tol=None, extra=None) -> RecurrenceReport:
    limit, band = _limit(values)
    tol = band if tol is None else tol
    satisfied = (limit >= lower - tol) if applies else None
    return RecurrenceReport(
        muA=muA,
        Ns=tuple(Ns),
        series_values=tuple(float(v) for v in values),
        limit_estimate=limit,
        uncertainty=band,
        lower_bound=float(lower),
        bound_name=name,
        satisfied=satisfied,
        path=path,
        samples=cfg.samples if path == "monte-carlo" else None,
        seed=cfg.seed if path == "monte-carlo" else None,
        extra=dict(extra or {}),
    )


def _choose_path(systems, method: str) -> str:
    exact_ok = all(translation_vector(T) is not None for T in systems)
    if method == "auto":
        return "exact" if exact_ok else "monte-carlo"
    if method == "exact" and not exact_ok:
        raise ValueError("exact path needs translation systems only")
    if method not in ("exact", "monte-carlo"):
        raise ValueError(f"unknown method {method!r}")
    return method


def khintchine2_series(
    T1: TorusSystem,
    T2: TorusSystem,
    A: BoxSet,
    Ns: Iterable[int],
    mc: MCConfig | None = None,
    *,
    method: str = "auto",
    workers: int | None = None,
) -> RecurrenceReport:
    """(1/N^2) sum_{n,m=1}^N mu(A ∩ T1^{-n}A ∩ T2^{-n-m}A) against mu(A)^4."""
    Ns = _ladder(Ns)
    for T in (T1, T2):
        if T.dimension != A.dimension:
            raise ValueError("system and set dimensions differ")
    muA = A.measure()
    if muA <= 0:
        raise ValueError("A must have positive measure")
    cfg = mc or MCConfig()
    path = _choose_path((T1, T2), method)
    if path == "exact":
        values = _exact_series2(T1, T2, A, Ns)
    else:
        values = _mc_series2(T1, T2, A, Ns, cfg, workers)
    return _report(muA, Ns, values, muA ** 4, "muA^4", True, path, cfg)


def delta_threshold(tol: float = 1e-14) -> float:
    """delta = 1 - root of x^7/2 + x - 1 on (0, 1)."""
    return threshold_root("delta", tol)


def khintchine3_series(
    T1: TorusSystem,
    T2: TorusSystem,
    T3: TorusSystem,
    A: BoxSet,
    Ns: Iterable[int],
    mc: MCConfig | None = None,
    *,
    method: str = "auto",
    constant: float = 0.5,
    workers: int | None = None,
) -> RecurrenceReport:
    """(1/N^2) sum_{n,m=1}^N mu(A ∩ T1^{-n}A ∩ T2^{-m}A ∩ T3^{-n-m}A).

    The bound constant*mu(A)^8 is asserted only when mu(A) > 1 - delta;
    otherwise ``satisfied`` is None.  ``constant`` other than 1/2 is for
    exploration and changes the label.
    """
    Ns = _ladder(Ns)
    for T in (T1, T2, T3):
        if T.dimension != A.dimension:
            raise ValueError("system and set dimensions differ")
    muA = A.measure()
    if muA <= 0:
        raise ValueError("A must have positive measure")
    cfg = mc or MCConfig()
    path = _choose_path((T1, T2, T3), method)
    if path == "exact":
        values = _exact_series3(T1, T2, T3, A, Ns)
    else:
        values = _mc_series3(T1, T2, T3, A, Ns, cfg, workers)
    delta = delta_threshold()
    applies = muA > 1.0 - delta
    name = "half-muA^8" if constant == 0.5 else f"{constant!r}*muA^8"
    return _report(
        muA, Ns, values, constant * muA ** 8, name, applies, path, cfg,
        extra={"delta": delta, "gate": 1.0 - delta, "applies": applies},
    )


def _conditional_expectation(T, A: BoxSet, pts: np.ndarray, horizon: int) -> np.ndarray:
    # E(1_A | invariant sets) at grid points, via closed forms where known
    if isinstance(T, Identity):
        return A.contains(pts).astype(np.float64)
    if is_ergodic(T):
        return np.full(pts.shape[0], A.measure())
    if horizon < 1:
        raise ValueError(f"no closed form for {T!r} and no Birkhoff budget")
    acc = np.zeros(pts.shape[0])
    for start in range(0, horizon, 256):
        k = np.arange(start, min(start + 256, horizon), dtype=np.int64)
        acc += A.contains(iterate_many(T, pts[:, None, :], k[None, :])).sum(axis=1)
    return acc / horizon


def conditional_product_integral(
    T1: TorusSystem,
    T2: TorusSystem,
    A: BoxSet,
    resolution: int = 512,
    *,
    horizon: int = 4096,
) -> float:
    """Integral over A of E(1_A | I_1) E(1_A | I_2), the limit of the two-map series.

    Identity gives E = 1_A and an ergodic map gives E = mu(A); both integrate
    exactly when A is a box set.  Other maps fall back to Birkhoff averages
    of length ``horizon`` on a midpoint grid of ``resolution`` points per axis.
    """
    closed = []
    for T in (T1, T2):
        if T.dimension != A.dimension:
            raise ValueError("system and set dimensions differ")
        if isinstance(T, Identity):
            closed.append("indicator")
        elif is_ergodic(T):
            closed.append("constant")
        else:
            closed.append(None)
    mu = A.measure()
    if None not in closed:
        # integrand is 1_A times constants or indicators of A again
        return mu * math.prod(mu if c == "constant" else 1.0 for c in closed)
    axes = [(np.arange(resolution) + 0.5) / resolution] * A.dimension
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    in_a = A.contains(pts).astype(np.float64)
    e1 = _conditional_expectation(T1, A, pts, horizon)
    e2 = _conditional_expectation(T2, A, pts, horizon)
    return float(np.mean(in_a * e1 * e2))


def threshold_root(which: str, tol: float = 1e-14) -> float:
    """Bisection on (0, 1).

    which="delta": 1 - root of x^7/2 + x - 1 (the set-measure threshold).
    which="beta":  root of x^7 + x - 1.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if which == "delta":
        poly = lambda x: 0.5 * x ** 7 + x - 1.0
    elif which == "beta":
        poly = lambda x: x ** 7 + x - 1.0
    else:
        raise ValueError("which must be 'delta' or 'beta'")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if poly(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return 1.0 - root if which == "delta" else root
