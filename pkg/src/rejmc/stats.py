"""Empirical summaries and goodness-of-fit checks for sample batches.

summarize uses blockwise accumulation with a numerically stable merge, and
merge_summaries exposes the same merge for parallel reduction. The KS test
uses the fixed asymptotic thresholds 1.358/sqrt(n) (alpha 0.05) and
1.628/sqrt(n) (alpha 0.01); the box chi-square test compares observed cell
counts against midpoint-quadrature cell masses of the target density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import chi2 as _chi2

from .model import SampleBatch, TargetSpec

__all__ = [
    "SummaryStats",
    "GofReport",
    "summarize",
    "merge_summaries",
    "ks_test_1d",
    "chi_square_box",
    "predicted_acceptance",
    "KS_THRESHOLDS",
]

KS_THRESHOLDS = {0.05: 1.358, 0.01: 1.628}
_CHI2_CONFIDENCE = 0.999
_BLOCK_ROWS = 65536


@dataclass(frozen=True, eq=False)
class SummaryStats:
    """Mean, unbiased covariance (divisor n-1) and correlation.

    Dimensions with zero variance get NaN correlation entries (the undefined
    marker) instead of raising.
    """

    n: int
    mean: np.ndarray
    covariance: np.ndarray
    correlation: np.ndarray


@dataclass(frozen=True)
class GofReport:
    """Outcome of one goodness-of-fit test; passed <=> statistic < threshold.

    The field is named ``passed`` ("pass" is reserved in Python); it is
    serialized as "pass" in run-metadata JSON.
    """

    kind: str  # "ks" or "chi_square"
    statistic: float
    threshold: float
    dof: int | None
    passed: bool


def _moments(points: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    n = points.shape[0]
    mean = points.mean(axis=0)
    centered = points - mean
    return n, mean, centered.T @ centered


def _merge_moments(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * (nb / n)
    scatter = sa + sb + np.outer(delta, delta) * (na * nb / n)
    return n, mean, scatter


def _finish(n: int, mean: np.ndarray, scatter: np.ndarray) -> SummaryStats:
    cov = scatter / (n - 1)
    sd = np.sqrt(np.diag(cov))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = cov / np.outer(sd, sd)
    corr[~np.isfinite(corr)] = np.nan
    return SummaryStats(n=n, mean=mean, covariance=cov, correlation=corr)


def _as_points(batch: SampleBatch | np.ndarray) -> np.ndarray:
    pts = batch.points if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"expected an (n, d) matrix, got shape {pts.shape}")
    return pts


def summarize(batch: SampleBatch | np.ndarray) -> SummaryStats:
    """Single-pass summary of a batch (needs at least two rows)."""
    pts = _as_points(batch)
    if pts.shape[0] < 2:
        raise ValueError("summaries need at least 2 samples")
    acc = None
    for start in range(0, pts.shape[0], _BLOCK_ROWS):
        block = _moments(pts[start : start + _BLOCK_ROWS])
        acc = block if acc is None else _merge_moments(acc, block)
    return _finish(*acc)


def merge_summaries(a: SummaryStats, b: SummaryStats) -> SummaryStats:
    """Associative merge; equals summarizing the concatenated batches."""
    return _finish(
        *_merge_moments(
            (a.n, a.mean, a.covariance * (a.n - 1)),
            (b.n, b.mean, b.covariance * (b.n - 1)),
        )
    )


def ks_test_1d(
    samples: Sequence[float] | np.ndarray,
    cdf: Callable[[np.ndarray], np.ndarray],
    alpha: float = 0.01,
) -> GofReport:
    """One-sample Kolmogorov-Smirnov test against a reference CDF.

    D_n = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n) over the sorted
    sample; the input must already be sorted.
    """
    if alpha not in KS_THRESHOLDS:
        raise ValueError(f"alpha must be one of {sorted(KS_THRESHOLDS)}, got {alpha}")
    xs = np.asarray(samples, dtype=np.float64).ravel()
    n = xs.size
    if n < 1:
        raise ValueError("KS test needs at least one sample")
    if np.any(np.diff(xs) < 0):
        raise ValueError("samples must be sorted nondecreasing")
    f = np.asarray(cdf(xs), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = float(np.max(np.maximum(i / n - f, f - (i - 1) / n)))
    threshold = KS_THRESHOLDS[alpha] / math.sqrt(n)
    return GofReport(kind="ks", statistic=d, threshold=threshold, dof=None, passed=d < threshold)


def _cell_neighbors(idx: int, bins: tuple[int, ...]) -> list[int]:
    multi = list(np.unravel_index(idx, bins))
    out = []
    for axis, b in enumerate(bins):
        for step in (-1, 1):
            coord = multi[axis] + step
            if 0 <= coord < b:
                shifted = multi.copy()
                shifted[axis] = coord
                out.append(int(np.ravel_multi_index(shifted, bins)))
    return out


def _merge_small_cells(
    observed: np.ndarray, expected: np.ndarray, bins: tuple[int, ...], min_expected: float = 5.0
) -> tuple[np.ndarray, np.ndarray]:
    """Union-find merge of cells with expected count below the minimum into
    their largest neighboring group, scanning in row-major order."""
    ncells = observed.size
    parent = np.arange(ncells)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    group_exp = expected.astype(np.float64).copy()
    group_obs = observed.astype(np.float64).copy()
    for _ in range(ncells):
        changed = False
        for idx in range(ncells):
            g = find(idx)
            if group_exp[g] >= min_expected:
                continue
            candidates = {find(nb) for nb in _cell_neighbors(idx, bins)} - {g}
            if not candidates:
                continue
            best = max(candidates, key=lambda c: (group_exp[c], -c))
            parent[g] = best
            group_exp[best] += group_exp[g]
            group_obs[best] += group_obs[g]
            changed = True
        if not changed:
            break
    roots = sorted({find(i) for i in range(ncells)})
    return group_obs[roots], group_exp[roots]


def chi_square_box(
    batch: SampleBatch | np.ndarray,
    target: TargetSpec,
    bins_per_dim: int | Sequence[int],
    *,
    quadrature_per_dim: int = 32,
) -> GofReport:
    """Chi-square test of a batch against its target on the support box.

    Expected cell probabilities come from midpoint quadrature
    (quadrature_per_dim^d points per cell), normalized over the box; cells
    with expected count below 5 are merged into their largest neighbor.
    """
    pts = _as_points(batch)
    box = target.support
    d = box.dims
    bins = (
        (int(bins_per_dim),) * d
        if isinstance(bins_per_dim, int)
        else tuple(int(b) for b in bins_per_dim)
    )
    if len(bins) != d or any(b < 1 for b in bins):
        raise ValueError(f"need {d} positive bin counts, got {bins}")

    edges = [np.linspace(lo, hi, b + 1) for (lo, hi), b in zip(box.bounds, bins)]
    observed, _ = np.histogramdd(pts, bins=edges)

    q = quadrature_per_dim
    axes = []
    for (lo, hi), b in zip(box.bounds, bins):
        step = (hi - lo) / (b * q)
        axes.append(lo + (np.arange(b * q, dtype=np.float64) + 0.5) * step)
    mesh = np.meshgrid(*axes, indexing="ij")
    quad_pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = target.field(quad_pts).reshape(tuple(x for b in bins for x in (b, q)))
    cell_mass = vals.sum(axis=tuple(range(1, 2 * d, 2)))
    total = float(cell_mass.sum())
    if not total > 0.0:
        raise ValueError("target density vanishes on the quadrature grid")
    probs = cell_mass / total

    n = pts.shape[0]
    grouped_obs, grouped_exp = _merge_small_cells(observed.ravel(), probs.ravel() * n, bins)
    if grouped_obs.size < 2:
        raise ValueError("fewer than two cells remain after merging; use fewer bins")
    statistic = float(np.sum((grouped_obs - grouped_exp) ** 2 / grouped_exp))
    dof = grouped_obs.size - 1
    threshold = float(_chi2.ppf(_CHI2_CONFIDENCE, dof))
    return GofReport(
        kind="chi_square",
        statistic=statistic,
        threshold=threshold,
        dof=dof,
        passed=statistic < threshold,
    )


def predicted_acceptance(f_box_integral: float, c: float, vol: float) -> float:
    """Acceptance probability of srmc: integral / (c * volume)."""
    if not (f_box_integral > 0 and c > 0 and vol > 0):
        raise ValueError("all inputs must be positive")
    return f_box_integral / (c * vol)
