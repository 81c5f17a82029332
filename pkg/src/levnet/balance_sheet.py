"""Balance-sheet panels and leverage computations.

A bank's record is its total assets and total liabilities sampled on an
integer time grid. Leverage is liabilities over equity (assets minus
liabilities, at book value), so it is unit-free and comparable across
countries and currencies. A panel collects many banks on a common grid;
banks appear and disappear, so only *complete* members (an observation at
every grid point) enter correlation analysis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

__all__ = [
    "BankSeries",
    "CensusReport",
    "DegenerateEquityError",
    "DomainError",
    "EmptyPanelWarning",
    "LeverageSeries",
    "Panel",
    "census",
    "central_leverage",
    "filter_complete",
    "leverage_of",
    "leverage_series",
]


class DomainError(ValueError):
    """Assets or liabilities outside the valid domain (A > 0, L >= 0)."""


class DegenerateEquityError(ValueError):
    """Liabilities at or above assets: equity is non-positive, leverage undefined."""

    def __init__(self, message: str, bank_id: str | None = None,
                 time_index: int | None = None):
        super().__init__(message)
        self.bank_id = bank_id
        self.time_index = time_index


class EmptyPanelWarning(UserWarning):
    """Completeness filtering removed every member of a panel."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class BankSeries:
    """One bank's (time, assets, liabilities) observations, validated on build.

    Times are strictly increasing integers; assets are positive and strictly
    exceed liabilities at every observation (equity stays positive).
    """

    bank_id: str
    times: np.ndarray
    assets: np.ndarray
    liabilities: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.int64)
        assets = np.asarray(self.assets, dtype=np.float64)
        liab = np.asarray(self.liabilities, dtype=np.float64)
        if not (times.ndim == assets.ndim == liab.ndim == 1):
            raise DomainError(f"{self.bank_id}: series must be one-dimensional")
        if not (len(times) == len(assets) == len(liab)):
            raise DomainError(f"{self.bank_id}: mismatched series lengths")
        if len(times) == 0:
            raise DomainError(f"{self.bank_id}: empty series")
        if np.any(np.diff(times) <= 0):
            raise DomainError(f"{self.bank_id}: time indices must be strictly increasing")
        if not np.all(np.isfinite(assets)) or not np.all(np.isfinite(liab)):
            raise DomainError(f"{self.bank_id}: non-finite balance sheet values")
        if np.any(assets <= 0) or np.any(liab < 0):
            t = int(times[np.flatnonzero((assets <= 0) | (liab < 0))[0]])
            raise DomainError(f"{self.bank_id}: invalid assets/liabilities at t={t}")
        bad = np.flatnonzero(liab >= assets)
        if bad.size:
            t = int(times[bad[0]])
            raise DegenerateEquityError(
                f"{self.bank_id}: liabilities >= assets at t={t} (non-positive equity)",
                bank_id=self.bank_id, time_index=t)
        object.__setattr__(self, "times", _readonly(times))
        object.__setattr__(self, "assets", _readonly(assets))
        object.__setattr__(self, "liabilities", _readonly(liab))

    @classmethod
    def from_observations(cls, bank_id: str,
                          observations: Iterable[tuple[int, float, float]]) -> "BankSeries":
        obs = sorted(observations)
        times = [o[0] for o in obs]
        return cls(bank_id,
                   np.array(times, dtype=np.int64),
                   np.array([o[1] for o in obs], dtype=np.float64),
                   np.array([o[2] for o in obs], dtype=np.float64))

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True, eq=False)
class LeverageSeries:
    """A bank's leverage ratio on its observation grid."""

    bank_id: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _readonly(np.asarray(self.times, dtype=np.int64)))
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, dtype=np.float64)))

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True, eq=False)
class Panel:
    """A labelled collection of bank series over a common time grid.

    ``grid`` is the sorted union of member observation times. ``grid_labels``
    optionally keeps the original date strings, one per grid point, so that a
    panel read from a file can be written back verbatim.
    """

    label: str
    members: tuple[BankSeries, ...]
    grid: np.ndarray
    grid_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "grid", _readonly(np.asarray(self.grid, dtype=np.int64)))
        if self.grid_labels is not None:
            labels = tuple(self.grid_labels)
            if len(labels) != len(self.grid):
                raise ValueError("grid_labels length must match grid length")
            object.__setattr__(self, "grid_labels", labels)

    @classmethod
    def from_members(cls, label: str, members: Iterable[BankSeries],
                     grid_labels: Iterable[str] | None = None) -> "Panel":
        members = sorted(members, key=lambda m: m.bank_id)
        ids = [m.bank_id for m in members]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate bank ids in panel {label!r}")
        if not members:
            raise ValueError(f"panel {label!r} has no members")
        grid = np.unique(np.concatenate([m.times for m in members]))
        labels = tuple(grid_labels) if grid_labels is not None else None
        return cls(label, tuple(members), grid, labels)

    @property
    def period_start(self) -> int:
        return int(self.grid[0])

    @property
    def period_end(self) -> int:
        return int(self.grid[-1])

    @property
    def bank_ids(self) -> tuple[str, ...]:
        return tuple(m.bank_id for m in self.members)

    def is_complete(self, member: BankSeries) -> bool:
        return len(member.times) == len(self.grid)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CensusReport:
    """Membership counts over a panel window.

    ``n_start``/``n_end`` count banks observed at the first/last grid point,
    ``n_birth`` banks whose first observation falls strictly inside the
    window, ``n_death`` banks whose last one does, and ``n_complete`` banks
    observed at every grid point.
    """

    n_start: int
    n_end: int
    n_birth: int
    n_death: int
    n_complete: int


def leverage_of(assets: float, liabilities: float) -> float:
    """Leverage ratio: liabilities / (assets - liabilities)."""
    if not assets > 0 or liabilities < 0 or not np.isfinite(assets) or not np.isfinite(liabilities):
        raise DomainError(f"invalid balance sheet: assets={assets}, liabilities={liabilities}")
    if liabilities >= assets:
        raise DegenerateEquityError(
            f"liabilities ({liabilities}) >= assets ({assets}): equity is not positive")
    return liabilities / (assets - liabilities)


def leverage_series(series: BankSeries) -> LeverageSeries:
    """Pointwise leverage of a bank series, preserving its time grid."""
    values = series.liabilities / (series.assets - series.liabilities)
    return LeverageSeries(series.bank_id, series.times, values)


def filter_complete(panel: Panel) -> Panel:
    """Keep only members with an observation at every grid point.

    The grid itself is unchanged. Warns (EmptyPanelWarning) when nothing
    survives. Idempotent.
    """
    kept = tuple(m for m in panel.members if panel.is_complete(m))
    if panel.members and not kept:
        warnings.warn(f"panel {panel.label!r}: no complete members", EmptyPanelWarning)
    return Panel(panel.label, kept, panel.grid, panel.grid_labels)


def census(panel: Panel) -> CensusReport:
    """Count start/end populations, births, deaths, and complete members."""
    if not panel.members:
        raise ValueError("cannot take a census of an empty panel")
    start, end = panel.period_start, panel.period_end
    n_grid = len(panel.grid)
    n_start = n_end = n_birth = n_death = n_complete = 0
    for m in panel.members:
        first, last = int(m.times[0]), int(m.times[-1])
        n_start += first == start
        n_end += last == end
        n_birth += first > start
        n_death += last < end
        n_complete += len(m.times) == n_grid
    return CensusReport(n_start, n_end, n_birth, n_death, n_complete)


def central_leverage(panel: Panel, statistic: Literal["median", "mean"] = "median",
                     ) -> list[tuple[int, float]]:
    """Per-grid-point median (or mean) leverage across complete members."""
    if statistic not in ("median", "mean"):
        raise ValueError(f"unknown statistic {statistic!r}")
    if not panel.members:
        raise ValueError("cannot summarize an empty panel")
    incomplete = [m.bank_id for m in panel.members if not panel.is_complete(m)]
    if incomplete:
        raise ValueError(f"panel has incomplete members (filter first): {incomplete[:5]}")
    stack = np.vstack([leverage_series(m).values for m in panel.members])
    agg = np.median(stack, axis=0) if statistic == "median" else np.mean(stack, axis=0)
    return list(zip(panel.grid.tolist(), agg.tolist()))
