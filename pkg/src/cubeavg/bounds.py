"""Finite-N checks of the two cube-average inequalities.

Two-index bound.  For sequences bounded by one,

    |(1/N^2) sum_{n,m<N} a_n b_m c_{n+m}|^2
        <= min( sup_t |(1/N) sum_{k=1}^{2(N-1)} c_k e(kt)|^2,
                sup_t |(1/N) sum_{k=1}^{N} a_k e(kt)|^2,
                sup_t |(1/N) sum_{k=1}^{N} b_k e(kt)|^2 ).

The ranges above are the ``printed`` ones.  They skip index 0 although the
left side uses a_0, b_0 and c_0, and the bound then fails for inputs
concentrated at index 0 (a = (1, 0, 0, ...) gives rhs = 0).  ``aligned``
uses the ranges the left side actually touches: a, b over 0..N-1 and c
over 0..2N-2.

Three-index bound.  With slots laid out as

    slot:     1  2  3    4  5    6    7
    pattern:  p  n  n+p  m  n+m  m+p  n+m+p

two slots are connected when one pattern is the other plus a single index.
The nine connected pairs, the inner sups and the unspecified constant C are
handled by ``lemma2_margin`` and ``empirical_C``; C is only estimated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cesaro import CubeSpec, IndexPattern, Slot, cube_average_2, cube_average_3
from .dynamics import BOUND_SLACK, BoundedSequence
from .wiener_wintner import TwistedSumSpec, ww_sup, ww_sup_rows

__all__ = [
    "LEMMA2_PATTERNS",
    "CONNECTED_PAIRS",
    "connected_pairs_from_patterns",
    "MarginReport",
    "Lemma2Report",
    "lemma1_margin",
    "lemma2_margin",
    "random_sequences",
    "empirical_C",
    "empirical_C_table",
]

LEMMA2_PATTERNS = ("p", "n", "n+p", "m", "n+m", "m+p", "n+m+p")

CONNECTED_PAIRS = (
    (1, 3, "n"), (1, 6, "m"), (2, 3, "p"),
    (2, 5, "m"), (4, 5, "n"), (4, 6, "p"),
    (3, 7, "m"), (5, 7, "p"), (6, 7, "n"),
)


def connected_pairs_from_patterns(patterns: Sequence[str] = LEMMA2_PATTERNS) -> tuple:
    """Pairs (i, j, index) with pattern_j = pattern_i + index (1-based slots)."""
    pats = [IndexPattern.parse(p).indices for p in patterns]
    out = []
    for i, pi in enumerate(pats):
        for j, pj in enumerate(pats):
            extra = pj - pi
            if pi < pj and len(extra) == 1:
                out.append((i + 1, j + 1, next(iter(extra))))
    order = {p: k for k, p in enumerate(CONNECTED_PAIRS)}
    return tuple(sorted(out, key=lambda t: order.get(t, len(order))))


@dataclass(frozen=True)
class MarginReport:
    lhs: float
    rhs: float
    margin: float
    witness: str
    terms: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, lhs: float, rhs: float, witness: str, terms: dict | None = None) -> "MarginReport":
        return cls(float(lhs), float(rhs), float(rhs) - float(lhs), witness, dict(terms or {}))


@dataclass(frozen=True)
class Lemma2Report:
    lhs: float
    rhs_noC: float
    ratio: float
    witness: tuple
    pair_terms: dict = field(default_factory=dict, compare=False)


def _as_seq(x) -> BoundedSequence:
    return x if isinstance(x, BoundedSequence) else BoundedSequence.from_values(x)


def _check_unit_bound(seqs, names) -> None:
    for s, name in zip(seqs, names):
        top = float(np.max(np.abs(s.values)))
        if top > 1.0 + BOUND_SLACK:
            raise ValueError(f"{name} has modulus {top} > 1; rescale before checking")


def lemma1_margin(
    a,
    b,
    c,
    N: int,
    *,
    ranges: str = "printed",
    grid_factor: int = 8,
    refine_tol: float = 1e-10,
    method: str = "convolution",
) -> MarginReport:
    """Margin rhs - lhs of the two-index inequality; ``terms`` holds each squared sup."""
    if N < 1:
        raise ValueError("N must be positive")
    a, b, c = _as_seq(a), _as_seq(b), _as_seq(c)
    _check_unit_bound((a, b, c), "abc")
    if ranges == "printed":
        specs = {
            "c": TwistedSumSpec(1, max(1, 2 * (N - 1)), N),
            "a": TwistedSumSpec(1, N, N),
            "b": TwistedSumSpec(1, N, N),
        }
    elif ranges == "aligned":
        specs = {
            "c": TwistedSumSpec(0, 2 * N - 2, N),
            "a": TwistedSumSpec(0, N - 1, N),
            "b": TwistedSumSpec(0, N - 1, N),
        }
    else:
        raise ValueError(f"unknown ranges {ranges!r}")
    seqs = {"a": a, "b": b, "c": c}
    for name, spec in specs.items():
        if len(seqs[name]) <= spec.end:
            raise ValueError(f"{name} needs length >= {spec.end + 1} for {ranges} ranges")
    lhs = abs(cube_average_2(a, b, c, N, method=method)) ** 2
    terms = {}
    for name, spec in specs.items():
        if ranges == "printed" and name == "c" and N == 1:
            # the printed c-range 1..0 is empty
            terms[name] = {"sup_sq": 0.0, "argmax_t": 0.0}
            continue
        rep = ww_sup(seqs[name], spec, grid_factor=grid_factor, refine_tol=refine_tol)
        terms[name] = {"sup_sq": rep.sup_value ** 2, "argmax_t": rep.argmax_t}
    best = min(terms, key=lambda k: terms[k]["sup_sq"])
    witness = f"{best}-term sup at t={terms[best]['argmax_t']:.12f} ({ranges} ranges)"
    return MarginReport.build(lhs, terms[best]["sup_sq"], witness, terms)


def _pair_term(ai: np.ndarray, aj: np.ndarray, N: int, L: int, grid_factor, refine_tol) -> float:
    # (1/N) sum_{n<N} sup_t |(1/N) sum_{m<L} ai[m] aj[n+m] e(mt)|^2
    m = np.arange(L)
    rows = ai[None, :L] * aj[np.arange(N)[:, None] + m[None, :]]
    sups, _, _ = ww_sup_rows(rows, N, grid_factor, refine_tol)
    return float(np.mean(sups ** 2))


def lemma2_margin(
    seqs: Sequence,
    N: int,
    *,
    grid_factor: int = 8,
    refine_tol: float = 1e-9,
    workers: int | None = None,
) -> Lemma2Report:
    """lhs = |M_N(A_1..A_7)|^2, rhs_noC = min over connected pairs of the max of the
    two inner averaged sups (inner ranges 0..N-1 and 0..2(N-1)); ratio = lhs/rhs_noC."""
    if len(seqs) != 7:
        raise ValueError("need exactly seven sequences")
    if N < 1:
        raise ValueError("N must be positive")
    seqs = [_as_seq(s) for s in seqs]
    _check_unit_bound(seqs, [f"A{k}" for k in range(1, 8)])
    need = 3 * N - 2
    for k, s in enumerate(seqs, 1):
        if len(s) < need:
            raise ValueError(f"A{k} needs length >= {need}")
    spec = CubeSpec(tuple(Slot(s, p) for s, p in zip(seqs, LEMMA2_PATTERNS)))
    lhs = abs(cube_average_3(spec, N, workers=workers)) ** 2
    pair_terms = {}
    for i, j, idx in CONNECTED_PAIRS:
        ai, aj = seqs[i - 1].values, seqs[j - 1].values
        first = _pair_term(ai, aj, N, N, grid_factor, refine_tol)
        second = _pair_term(ai, aj, N, 2 * N - 1, grid_factor, refine_tol)
        pair_terms[(i, j, idx)] = (first, second, max(first, second))
    witness = min(pair_terms, key=lambda k: pair_terms[k][2])
    rhs = pair_terms[witness][2]
    if rhs == 0.0:
        ratio = 0.0 if lhs == 0.0 else math.inf
    else:
        ratio = lhs / rhs
    return Lemma2Report(float(lhs), float(rhs), float(ratio), witness, pair_terms)


def random_sequences(rng: np.random.Generator, count: int, length: int, kind: str) -> list[BoundedSequence]:
    """``count`` sequences of one of the kinds unit | sign | ones | zeros."""
    if kind == "unit":
        vals = np.exp(2j * np.pi * rng.random((count, length)))
    elif kind == "sign":
        vals = rng.choice([-1.0, 1.0], size=(count, length)).astype(np.complex128)
    elif kind == "ones":
        vals = np.ones((count, length), dtype=np.complex128)
    elif kind == "zeros":
        vals = np.zeros((count, length), dtype=np.complex128)
    else:
        raise ValueError(f"unknown sequence kind {kind!r}")
    return [BoundedSequence(v, 1.0) for v in vals]


def empirical_C_table(trials: int, Ns: Sequence[int], seed: int, kind: str = "unit") -> dict[int, float]:
    """Max of lemma2 ratio over ``trials`` random 7-tuples, per N.

    Trial k draws from the k-th child of SeedSequence(seed), so values do not
    depend on evaluation order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    out = {}
    for N in Ns:
        worst = 0.0
        for child in children:
            rng = np.random.default_rng(child)
            seqs = random_sequences(rng, 7, 3 * N - 2, kind)
            worst = max(worst, lemma2_margin(seqs, N).ratio)
        out[int(N)] = worst
    return out


def empirical_C(trials: int, Ns: Sequence[int], seed: int, kind: str = "unit") -> float:
    """Largest observed lhs/rhs_noC ratio; an estimate, not a proven constant."""
    return max(empirical_C_table(trials, Ns, seed, kind).values())
