"""Ingestion and normalisation of asynchronous event data.

This module turns raw trade tables (long or wide CSV) into per-asset
event series, rescales observation clocks onto [0, 2*pi], forms
log-price increments, and derives the aliasing-free mode cutoff from
the smallest inter-observation gap. Everything downstream (the Fourier
engines and the covariance estimator) consumes the types defined here.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import (
    DegenerateSpacingError,
    DegenerateSpanError,
    ParseError,
    UnderpopulatedSeriesError,
    ValidationError,
)

TWO_PI = 2.0 * math.pi


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    out = np.asarray(values, dtype=dtype).reshape(-1).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class EventSeries:
    """One asset's observation times and prices on the original clock.

    Construction strips entries where either the time or the price is
    NaN (the missing marker of matrix-form inputs), then validates that
    times are strictly increasing, prices strictly positive, and at
    least two observations remain.
    """

    asset_id: str
    times: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        prices = np.asarray(self.prices, dtype=np.float64).reshape(-1)
        if times.shape != prices.shape:
            raise ValidationError(
                f"asset {self.asset_id!r}: times and prices differ in length "
                f"({times.size} vs {prices.size})"
            )
        keep = ~(np.isnan(times) | np.isnan(prices))
        times, prices = times[keep], prices[keep]
        if times.size < 2:
            raise UnderpopulatedSeriesError(
                f"asset {self.asset_id!r} has {times.size} usable observations; need >= 2"
            )
        if np.any(np.diff(times) <= 0):
            raise ValidationError(
                f"asset {self.asset_id!r}: times must be strictly increasing"
            )
        if np.any(prices <= 0):
            raise ValidationError(f"asset {self.asset_id!r}: prices must be positive")
        object.__setattr__(self, "times", _frozen_array(times))
        object.__setattr__(self, "prices", _frozen_array(prices))

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Rescaled times in [0, 2*pi] paired with log-price increments.

    ``deltas[h]`` is the increment over the interval starting at
    ``times[h]`` (previous-tick convention: the increment is attached
    to the left endpoint of its interval).
    """

    asset_id: str
    times: np.ndarray
    deltas: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times)
        deltas = _frozen_array(self.deltas)
        if times.shape != deltas.shape:
            raise ValidationError(
                f"asset {self.asset_id!r}: times and deltas differ in length"
            )
        if times.size and (times[0] < 0.0 or times[-1] > TWO_PI):
            raise ValidationError(
                f"asset {self.asset_id!r}: rescaled times must lie in [0, 2*pi]"
            )
        if np.any(np.diff(times) < 0):
            raise ValidationError(
                f"asset {self.asset_id!r}: rescaled times must be non-decreasing"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "deltas", deltas)

    @property
    def n_returns(self) -> int:
        return self.deltas.size


@dataclass(frozen=True, eq=False)
class PanelTimes:
    """Per-asset rescaled time vectors sharing one global affine map.

    The map sends the global minimum timestamp to 0 and the global
    maximum to 2*pi; ``t_span`` is their difference on the original
    clock (in the input's units, typically seconds).
    """

    rescaled: dict[str, np.ndarray]
    t_min: float
    t_max: float

    @property
    def t_span(self) -> float:
        return self.t_max - self.t_min


def rescale_times(
    series: Iterable[EventSeries],
    t_min: float | None = None,
    t_max: float | None = None,
) -> PanelTimes:
    """Map every observation time onto [0, 2*pi] with one global affine map.

    Parameters
    ----------
    series : iterable of EventSeries
        The panel; the min/max are taken over all assets jointly.
    t_min, t_max : float, optional
        Pin the map to an externally fixed window instead of the panel
        extrema (used by resampling schemes that must keep the original
        span when events are removed).

    Returns
    -------
    PanelTimes
    """
    series = list(series)
    if not series:
        raise ValidationError("rescale_times needs at least one series")
    lo = min(s.times[0] for s in series) if t_min is None else float(t_min)
    hi = max(s.times[-1] for s in series) if t_max is None else float(t_max)
    if hi <= lo:
        raise DegenerateSpanError(
            f"degenerate time span: t_max ({hi}) must exceed t_min ({lo})"
        )
    scale = TWO_PI / (hi - lo)
    rescaled = {s.asset_id: _frozen_array((s.times - lo) * scale) for s in series}
    return PanelTimes(rescaled=rescaled, t_min=lo, t_max=hi)


def log_returns(series: EventSeries, panel: PanelTimes) -> ReturnSeries:
    """Form log-price increments attached to rescaled left endpoints."""
    try:
        rescaled = panel.rescaled[series.asset_id]
    except KeyError:
        raise ValidationError(
            f"asset {series.asset_id!r} is not part of the rescaled panel"
        ) from None
    if rescaled.size != series.times.size:
        raise ValidationError(
            f"asset {series.asset_id!r}: panel times do not match the series"
        )
    deltas = np.diff(np.log(series.prices))
    return ReturnSeries(series.asset_id, rescaled[:-1], deltas)


def nyquist_cutoff(returns: Iterable[ReturnSeries]) -> int:
    """Aliasing-free mode cutoff from the smallest rescaled gap.

    Per asset the highest resolvable rate is ``2*pi / dt0`` with ``dt0``
    the minimum consecutive gap; halving and flooring gives that asset's
    cutoff, and the panel cutoff is the minimum across assets.
    """
    cutoffs = []
    for rs in returns:
        if rs.times.size < 2:
            raise UnderpopulatedSeriesError(
                f"asset {rs.asset_id!r}: need >= 2 rescaled times for a cutoff"
            )
        dt0 = float(np.min(np.diff(rs.times)))
        if dt0 <= 0.0:
            raise DegenerateSpacingError(
                f"asset {rs.asset_id!r} has duplicate rescaled times"
            )
        cutoffs.append(int(math.floor((TWO_PI / dt0) / 2.0)))
    if not cutoffs:
        raise ValidationError("nyquist_cutoff needs at least one series")
    return min(cutoffs)


@dataclass
class IngestDiagnostics:
    """Counts collected while reading a trade table."""

    rows_read: int = 0
    observations: dict[str, int] = field(default_factory=dict)
    merged_duplicates: dict[str, int] = field(default_factory=dict)
    missing_cells: int = 0

    def as_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "observations": dict(self.observations),
            "merged_duplicates": dict(self.merged_duplicates),
            "missing_cells": self.missing_cells,
        }


LONG_HEADER = ["asset", "time", "price", "volume"]


def _parse_float(text: str, what: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"cannot parse {what} {text!r}", line) from None


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def ingest_taq(
    source,
    schema: str = "auto",
    return_diagnostics: bool = False,
):
    """Read a trade table and build validated :class:`EventSeries`.

    Two layouts are accepted. The long layout has header
    ``asset,time,price,volume``; rows of one asset sharing a timestamp
    are merged into a single observation at the volume-weighted average
    price. The wide layout has header ``time,<asset>,...`` with empty
    cells marking missing observations; duplicate timestamps there are
    merged with equal weights.

    Parameters
    ----------
    source : path, text stream or binary stream
        The CSV input (UTF-8).
    schema : {"auto", "long", "wide"}
        Layout selection; "auto" decides from the header row.
    return_diagnostics : bool
        Also return an :class:`IngestDiagnostics` with row, dedup and
        missing-cell counts.

    Returns
    -------
    list of EventSeries, ordered by first appearance in the file
    (long layout) or column order (wide layout).
    """
    if schema not in ("auto", "long", "wide"):
        raise ValidationError(f"unknown schema {schema!r}")
    fh = _open_text(source)
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input", 1) from None
    header = [h.strip() for h in header]
    if schema == "auto":
        schema = "long" if [h.lower() for h in header] == LONG_HEADER else "wide"
    diag = IngestDiagnostics()
    if schema == "long":
        series = _ingest_long(reader, header, diag)
    else:
        series = _ingest_wide(reader, header, diag)
    if return_diagnostics:
        return series, diag
    return series


def _ingest_long(reader, header, diag: IngestDiagnostics) -> list[EventSeries]:
    if [h.lower() for h in header] != LONG_HEADER:
        raise ParseError(f"expected header {','.join(LONG_HEADER)!r}", 1)
    # per asset: time -> [price*volume sum, volume sum]
    acc: dict[str, dict[float, list[float]]] = {}
    order: list[str] = []
    for line, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", line)
        asset = row[0].strip()
        if not asset:
            raise ParseError("empty asset id", line)
        t = _parse_float(row[1], "time", line)
        p = _parse_float(row[2], "price", line)
        v = _parse_float(row[3], "volume", line)
        if p <= 0:
            raise ValidationError(f"line {line}: non-positive price {p} for {asset!r}")
        if v <= 0:
            raise ValidationError(f"line {line}: non-positive volume {v} for {asset!r}")
        diag.rows_read += 1
        if asset not in acc:
            acc[asset] = {}
            order.append(asset)
        bucket = acc[asset]
        if t in bucket:
            bucket[t][0] += p * v
            bucket[t][1] += v
            diag.merged_duplicates[asset] = diag.merged_duplicates.get(asset, 0) + 1
        else:
            bucket[t] = [p * v, v]
    out = []
    for asset in order:
        bucket = acc[asset]
        times = np.array(sorted(bucket), dtype=np.float64)
        prices = np.array([bucket[t][0] / bucket[t][1] for t in times])
        diag.observations[asset] = times.size
        out.append(EventSeries(asset, times, prices))
    return out


def _ingest_wide(reader, header, diag: IngestDiagnostics) -> list[EventSeries]:
    if len(header) < 2 or header[0].lower() != "time":
        raise ParseError("wide layout needs header 'time,<asset>,...'", 1)
    assets = header[1:]
    if len(set(assets)) != len(assets):
        raise ParseError("duplicate asset columns", 1)
    acc: dict[str, dict[float, list[float]]] = {a: {} for a in assets}
    for line, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(row)}", line
            )
        t = _parse_float(row[0], "time", line)
        diag.rows_read += 1
        for asset, cell in zip(assets, row[1:]):
            cell = cell.strip()
            if not cell or cell.upper() in ("NAN", "NA"):
                diag.missing_cells += 1
                continue
            p = _parse_float(cell, "price", line)
            if p <= 0:
                raise ValidationError(
                    f"line {line}: non-positive price {p} for {asset!r}"
                )
            bucket = acc[asset]
            if t in bucket:
                bucket[t][0] += p
                bucket[t][1] += 1.0
                diag.merged_duplicates[asset] = diag.merged_duplicates.get(asset, 0) + 1
            else:
                bucket[t] = [p, 1.0]
    out = []
    for asset in assets:
        bucket = acc[asset]
        if len(bucket) < 2:
            raise UnderpopulatedSeriesError(
                f"asset {asset!r} has {len(bucket)} usable observations; need >= 2"
            )
        times = np.array(sorted(bucket), dtype=np.float64)
        prices = np.array([bucket[t][0] / bucket[t][1] for t in times])
        diag.observations[asset] = times.size
        out.append(EventSeries(asset, times, prices))
    return out
