"""Correlation matrices, threshold networks, and cluster decomposition.

Pairwise Pearson coefficients between banks' leverage series define an
undirected graph: two banks are linked when their coefficient clears a
threshold rho (``signed`` mode, r >= rho) or when its magnitude does
(``absolute`` mode, |r| >= rho). Clusters are connected components.
Sweeping rho yields the largest-cluster fraction curve.

Constant (zero-variance) series have no defined correlation; their matrix
entries carry NaN, they are kept as nodes, and they are never linked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from .balance_sheet import LeverageSeries, Panel, filter_complete, leverage_series

__all__ = [
    "ClusterCurve",
    "ComponentPartition",
    "CorrelationMatrix",
    "GridMismatchError",
    "InsufficientPairsError",
    "LeverageNetwork",
    "LinkMode",
    "cluster_curve",
    "components",
    "correlation_matrix",
    "leverage_correlation",
    "pearson",
    "threshold_network",
    "top_m_network",
]

LinkMode = Literal["signed", "absolute"]


class GridMismatchError(ValueError):
    """Series handed to the correlation matrix do not share one grid."""


class InsufficientPairsError(ValueError):
    """Fewer defined correlation pairs than the construction needs."""


def pearson(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Pearson correlation coefficient of two equal-length series.

    Returns NaN (the undefined marker) when either series has zero
    variance. The result is clipped to [-1, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise ValueError(f"need at least 2 points, got {len(x)}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx == 0.0 or syy == 0.0:
        return math.nan
    r = float(np.dot(xc, yc)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Symmetric matrix of pairwise coefficients, NaN where undefined.

    The diagonal is exactly 1. ``zero_variance`` lists banks whose constant
    series make every pair involving them undefined.
    """

    bank_ids: tuple[str, ...]
    values: np.ndarray
    zero_variance: tuple[str, ...] = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        n = len(self.bank_ids)
        if vals.shape != (n, n):
            raise ValueError(f"matrix shape {vals.shape} does not match {n} banks")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bank_ids", tuple(self.bank_ids))
        object.__setattr__(self, "zero_variance", tuple(self.zero_variance))

    @property
    def n(self) -> int:
        return len(self.bank_ids)

    def entry(self, i: int, j: int) -> float:
        return float(self.values[i, j])

    def defined_pairs(self) -> Iterator[tuple[int, int, float]]:
        """Upper-triangle (i, j, r) triples with a defined coefficient, in lexicographic order."""
        vals = self.values
        for i in range(self.n - 1):
            row = vals[i]
            for j in range(i + 1, self.n):
                r = row[j]
                if not math.isnan(r):
                    yield i, j, float(r)


def correlation_matrix(series_set: Sequence[LeverageSeries]) -> CorrelationMatrix:
    """All-pairs Pearson matrix over leverage series sharing one grid."""
    if len(series_set) < 2:
        raise ValueError(f"need at least 2 series, got {len(series_set)}")
    grid = series_set[0].times
    for s in series_set[1:]:
        if not np.array_equal(s.times, grid):
            raise GridMismatchError(f"series {s.bank_id!r} is not on the common grid")
    if len(grid) < 2:
        raise ValueError("grid too short for correlation (need >= 2 points)")

    X = np.vstack([s.values for s in series_set])
    Xc = X - X.mean(axis=1, keepdims=True)
    sq = np.einsum("ij,ij->i", Xc, Xc)
    cross = Xc @ Xc.T
    # mirror the upper triangle so symmetry is exact, not up to BLAS rounding
    iu = np.triu_indices(len(series_set), k=1)
    cross[(iu[1], iu[0])] = cross[iu]
    denom = np.sqrt(np.outer(sq, sq))
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = cross / denom
    np.clip(vals, -1.0, 1.0, out=vals)
    vals[sq == 0.0, :] = math.nan
    vals[:, sq == 0.0] = math.nan
    np.fill_diagonal(vals, 1.0)
    flagged = tuple(s.bank_id for s, z in zip(series_set, sq == 0.0) if z)
    return CorrelationMatrix(tuple(s.bank_id for s in series_set), vals, flagged)


def leverage_correlation(panel: Panel) -> CorrelationMatrix:
    """Correlation matrix of the leverage series of a complete-filtered panel."""
    complete = filter_complete(panel)
    return correlation_matrix([leverage_series(m) for m in complete.members])


@dataclass(frozen=True, eq=False)
class LeverageNetwork:
    """Thresholded undirected graph over banks.

    ``edges`` holds (i, j, r) index triples with i < j. ``threshold`` is the
    rho used, or the implied cut (the M-th largest coefficient) for top-M
    construction, in which case ``target_edges`` records the requested M.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    threshold: float
    mode: LinkMode = "signed"
    target_edges: int | None = None

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def avg_degree(self) -> float:
        return 2.0 * self.n_edges / self.n if self.n else 0.0


def _link_mask(matrix: CorrelationMatrix, rho: float, mode: LinkMode) -> np.ndarray:
    vals = matrix.values
    with np.errstate(invalid="ignore"):
        if mode == "signed":
            mask = vals >= rho
        elif mode == "absolute":
            mask = np.abs(vals) >= rho
        else:
            raise ValueError(f"unknown link mode {mode!r}")
    return mask


def threshold_network(matrix: CorrelationMatrix, rho: float,
                      mode: LinkMode = "signed") -> LeverageNetwork:
    """Link every defined pair whose coefficient clears rho (inclusive)."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"threshold must lie in [-1, 1], got {rho}")
    mask = _link_mask(matrix, rho, mode)
    ii, jj = np.nonzero(np.triu(mask, k=1))
    edges = tuple((int(i), int(j), float(matrix.values[i, j])) for i, j in zip(ii, jj))
    return LeverageNetwork(matrix.bank_ids, edges, float(rho), mode)


def top_m_network(matrix: CorrelationMatrix, m: int | None = None,
                  avg_degree: float | None = None) -> LeverageNetwork:
    """Link the M most correlated pairs (signed ordering).

    Pass either ``m`` or ``avg_degree``; an average degree k maps to
    M = round(k * n / 2), half away from zero. Ties with the M-th largest
    coefficient are all included, so the realized edge count can exceed M.
    """
    if (m is None) == (avg_degree is None):
        raise ValueError("pass exactly one of m and avg_degree")
    if avg_degree is not None:
        if avg_degree < 0:
            raise ValueError(f"average degree must be nonnegative, got {avg_degree}")
        m = int(math.floor(avg_degree * matrix.n / 2.0 + 0.5))
    if m < 0:
        raise ValueError(f"edge count must be nonnegative, got {m}")
    pairs = list(matrix.defined_pairs())
    if m > len(pairs):
        raise InsufficientPairsError(
            f"requested {m} edges but only {len(pairs)} defined pairs exist")
    if m == 0:
        return LeverageNetwork(matrix.bank_ids, (), math.nan, "signed", 0)
    pairs.sort(key=lambda p: (-p[2], p[0], p[1]))
    cut = pairs[m - 1][2]
    edges = tuple(sorted(p for p in pairs if p[2] >= cut))
    return LeverageNetwork(matrix.bank_ids, edges, cut, "signed", m)


@dataclass(frozen=True)
class ComponentPartition:
    """Connected components of a network; isolated nodes are singletons.

    Component ids are 0-based, ordered by each component's smallest node
    index, so the partition is a pure function of the edge set.
    """

    assignment: tuple[int, ...]
    sizes: tuple[int, ...]
    largest_fraction: float

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def n_components(self) -> int:
        return len(self.sizes)

    @property
    def n_isolated(self) -> int:
        return sum(1 for s in self.sizes if s == 1)


def components(network: LeverageNetwork) -> ComponentPartition:
    """Union-find decomposition of the network into clusters."""
    n = network.n
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, _ in network.edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    roots = [find(i) for i in range(n)]
    ids: dict[int, int] = {}
    assignment = []
    for r in roots:
        if r not in ids:
            ids[r] = len(ids)
        assignment.append(ids[r])
    sizes = [0] * len(ids)
    for c in assignment:
        sizes[c] += 1
    return ComponentPartition(tuple(assignment), tuple(sizes), max(sizes) / n)


@dataclass(frozen=True, eq=False)
class ClusterCurve:
    """Largest-cluster fraction as a function of the threshold rho."""

    points: tuple[tuple[float, float], ...]
    mode: LinkMode = "signed"

    @property
    def rhos(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def fractions(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def max_jump(self) -> tuple[float, float, float]:
        """Largest single-step drop: (rho_before, rho_after, drop size)."""
        fr = self.fractions
        rh = self.rhos
        if len(fr) < 2:
            raise ValueError("curve needs at least two points")
        drops = fr[:-1] - fr[1:]
        k = int(np.argmax(drops))
        return float(rh[k]), float(rh[k + 1]), float(drops[k])


def cluster_curve(matrix: CorrelationMatrix, rho_grid: Iterable[float],
                  mode: LinkMode = "signed") -> ClusterCurve:
    """Largest-cluster fraction at each threshold of an increasing rho grid."""
    rhos = [float(r) for r in rho_grid]
    if any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ValueError("rho grid must be strictly increasing")
    points = []
    for rho in rhos:
        part = components(threshold_network(matrix, rho, mode))
        points.append((rho, part.largest_fraction))
    return ClusterCurve(tuple(points), mode)
