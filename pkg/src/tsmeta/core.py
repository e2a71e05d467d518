"""Series container, validation, splitting and the error metric."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    BadHorizon,
    BadPeriod,
    DuplicateTimestamp,
    LengthMismatch,
    NonFiniteValue,
    NonUniformSpacing,
    TooShort,
    ValidationError,
    ZeroActual,
)

MIN_LENGTH = 5
# Shortest training prefix a split may leave behind (4-train / 1-test on n=5).
MIN_TRAIN = 4


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly spaced univariate series with a known seasonal period.

    Build through :func:`validate_series` or :meth:`from_values`; the
    constructor itself trusts its arguments so that slices can be shorter
    than the validation minimum.
    """

    id: str
    timestamps: np.ndarray
    values: np.ndarray
    period: int = 1

    def __post_init__(self):
        object.__setattr__(self, "timestamps", _frozen(self.timestamps))
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def seasonal_usable(self) -> bool:
        return self.period > 1 and self.n >= 2 * self.period + 1

    @property
    def effective_period(self) -> int:
        """Period used by seasonal machinery: 1 unless seasonality is usable."""
        return self.period if self.seasonal_usable else 1

    @classmethod
    def from_values(cls, values: Sequence[float], period: int = 1, id: str = "series") -> TimeSeries:
        values = np.asarray(values, dtype=float)
        return validate_series(list(zip(range(len(values)), values)), period, id=id)

    def slice(self, start: int | None = None, stop: int | None = None) -> TimeSeries:
        return TimeSeries(self.id, self.timestamps[start:stop], self.values[start:stop], self.period)

    def with_values(self, values: Sequence[float]) -> TimeSeries:
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise LengthMismatch("replacement values must keep the series length")
        return TimeSeries(self.id, self.timestamps, values, self.period)

    def pairs(self) -> list[tuple[Any, float]]:
        return [(t.item() if hasattr(t, "item") else t, float(v)) for t, v in zip(self.timestamps, self.values)]


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    point_forecasts: tuple[float, ...]
    model_id: Any
    params: Any
    fallback: bool = False

    def __post_init__(self):
        pf = tuple(float(v) for v in self.point_forecasts)
        if len(pf) != self.horizon:
            raise ValidationError(f"expected {self.horizon} forecasts, got {len(pf)}")
        if not all(math.isfinite(v) for v in pf):
            raise NonFiniteValue("forecasts must be finite")
        object.__setattr__(self, "point_forecasts", pf)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.point_forecasts)


@dataclass(frozen=True)
class SplitConfig:
    horizon: int

    def __post_init__(self):
        if not isinstance(self.horizon, (int, np.integer)) or self.horizon < 1:
            raise BadHorizon(f"horizon must be a positive integer, got {self.horizon!r}")

    def check(self, n: int) -> None:
        if self.horizon >= n or n - self.horizon < MIN_TRAIN:
            raise BadHorizon(f"horizon {self.horizon} leaves fewer than {MIN_TRAIN} training points of {n}")


def default_horizon(n: int, period: int) -> int:
    """A quarter of the series, capped at two seasonal cycles."""
    return max(1, min(int(0.25 * n), 2 * period))


def default_split(ts: TimeSeries) -> SplitConfig:
    return SplitConfig(default_horizon(ts.n, ts.period))


def _parse_instant(raw: Any):
    if isinstance(raw, (bool, np.bool_)):
        raise ValidationError(f"invalid timestamp {raw!r}")
    if isinstance(raw, (int, np.integer)):
        return int(raw)
    if isinstance(raw, (float, np.floating)) and float(raw).is_integer():
        return int(raw)
    if isinstance(raw, dt.datetime):
        return raw
    if isinstance(raw, dt.date):
        return dt.datetime(raw.year, raw.month, raw.day)
    if isinstance(raw, np.datetime64):
        return raw.astype("datetime64[us]").item()
    if isinstance(raw, str):
        text = raw.strip()
        try:
            return int(text, 10)
        except ValueError:
            pass
        try:
            return dt.datetime.fromisoformat(text.replace("Z", "+00:00"))
        except ValueError as exc:
            raise ValidationError(f"unparseable timestamp {raw!r}") from exc
    raise ValidationError(f"unsupported timestamp {raw!r}")


def _month_index(t: dt.datetime) -> int:
    return t.year * 12 + t.month - 1


def _check_spacing(instants: list) -> np.ndarray:
    kinds = {isinstance(t, int) for t in instants}
    if len(kinds) > 1:
        raise ValidationError("timestamps mix integers and dates")
    if isinstance(instants[0], int):
        stamps = np.asarray(instants, dtype=np.int64)
        steps = np.diff(stamps)
    else:
        stamps = np.asarray([np.datetime64(t.replace(tzinfo=None), "us") for t in instants])
        steps = np.diff(stamps).astype(np.int64)
    if len(steps) == 0:
        return stamps
    if np.any(steps == 0):
        raise DuplicateTimestamp("timestamps contain duplicates")
    if np.any(steps < 0):
        raise NonUniformSpacing("timestamps are not increasing")
    if np.all(steps == steps[0]):
        return stamps
    if not isinstance(instants[0], int):
        # calendar-monthly data: same day-of-month and time, constant month step
        months = np.diff([_month_index(t) for t in instants])
        same_anchor = len({(t.day, t.time()) for t in instants}) == 1
        if same_anchor and np.all(months == months[0]) and months[0] > 0:
            return stamps
    raise NonUniformSpacing("timestamps are not evenly spaced")


def validate_series(raw: Iterable[tuple[Any, float]], period: int = 1, id: str = "series") -> TimeSeries:
    """Check and normalise ``(instant, value)`` pairs into a :class:`TimeSeries`.

    Instants may be integers, ISO-8601 strings or datetime objects. Raises
    the specific :class:`~tsmeta.errors.ValidationError` subclass for the
    first violated invariant.
    """
    pairs = list(raw)
    if not pairs:
        raise TooShort("empty series")
    if not isinstance(period, (int, np.integer)) or isinstance(period, bool) or period < 1:
        raise BadPeriod(f"period must be a positive integer, got {period!r}")
    instants = [_parse_instant(t) for t, _ in pairs]
    try:
        values = np.asarray([float(v) for _, v in pairs], dtype=float)
    except (TypeError, ValueError) as exc:
        raise NonFiniteValue(f"non-numeric value in series {id}") from exc
    stamps = _check_spacing(instants)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"series {id} contains non-finite values")
    if len(values) < MIN_LENGTH:
        raise TooShort(f"series {id} has {len(values)} points, need at least {MIN_LENGTH}")
    return TimeSeries(id=str(id), timestamps=stamps, values=values, period=int(period))


def train_test_split(ts: TimeSeries, cfg: SplitConfig) -> tuple[TimeSeries, TimeSeries]:
    cfg.check(ts.n)
    cut = ts.n - cfg.horizon
    return ts.slice(None, cut), ts.slice(cut, None)


def mape(actual: Sequence[float], forecast: Sequence[float]) -> float:
    """Mean absolute percentage error as a fraction (0.1 == 10%)."""
    a = np.asarray(actual, dtype=float)
    f = np.asarray(forecast, dtype=float)
    if a.shape != f.shape or a.ndim != 1 or a.size == 0:
        raise LengthMismatch(f"actual {a.shape} and forecast {f.shape} must be equal non-empty vectors")
    if np.any(a == 0):
        raise ZeroActual("MAPE is undefined when an actual value is zero")
    return float(np.mean(np.abs(a - f) / np.abs(a)))


def read_series_csv(path: str | Path, period: int = 1) -> TimeSeries:
    """Load a ``timestamp,value`` CSV; the file stem becomes the series id."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TooShort(f"{path} is empty") from None
        if [h.strip().lower() for h in header] != ["timestamp", "value"]:
            raise ValidationError(f"{path}: header must be 'timestamp,value', got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 2 columns")
            rows.append((row[0], row[1]))
    return validate_series(rows, period, id=path.stem)


def write_series_csv(ts: TimeSeries, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value"])
        for t, v in zip(ts.timestamps, ts.values):
            stamp = str(t) if np.issubdtype(ts.timestamps.dtype, np.datetime64) else int(t)
            writer.writerow([stamp, repr(float(v))])
