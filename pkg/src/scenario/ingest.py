"""
Trip Ingestion
Aggregates raw trip records into hourly zone-to-zone trip rates over a daily time window
"""
import logging
import math
from dataclasses import dataclass
from datetime import datetime, time, timedelta
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..exceptions import IngestionError
from ..geometry.zone_grid import ZoneGrid
from ..models.scenario_models import TripRecord

logger = logging.getLogger(__name__)

TRIP_COLUMNS = ["pickup_zone", "pickup_x", "pickup_y", "dropoff_zone", "dropoff_x", "dropoff_y", "timestamp"]
# synthetic points keep this share of the zone side away from the zone edges
EDGE_MARGIN = 0.01


@dataclass(frozen=True)
class TimeWindow:
    """Daily interval [start, end) within one day"""
    start: time
    end: time

    def __post_init__(self):
        if self.hours <= 0:
            raise ValueError(f"time window {self} must have positive length")

    @classmethod
    def parse(cls, text: str) -> "TimeWindow":
        """'07:00-09:00'"""
        try:
            start, end = (part.strip() for part in text.split("-"))
            return cls(time.fromisoformat(start), time.fromisoformat(end))
        except ValueError as e:
            raise ValueError(f"time window '{text}' must look like HH:MM-HH:MM ({e})") from e

    @property
    def hours(self) -> float:
        return (_seconds(self.end) - _seconds(self.start)) / 3600.0

    def __str__(self) -> str:
        return f"{self.start.strftime('%H:%M')}-{self.end.strftime('%H:%M')}"


def _seconds(value: time) -> float:
    return value.hour * 3600 + value.minute * 60 + value.second + value.microsecond / 1e6


@dataclass
class IngestionSummary:
    """Counts of one ingestion pass; demand is trips/hr with row = origin"""
    demand: np.ndarray
    records: int = 0
    used: int = 0
    invalid: int = 0
    outside_grid: int = 0
    outside_window: int = 0

    @property
    def dropped(self) -> int:
        return self.invalid + self.outside_grid + self.outside_window

    def to_dict(self) -> Dict[str, Any]:
        return {
            "records": self.records,
            "used": self.used,
            "invalid": self.invalid,
            "outside_grid": self.outside_grid,
            "outside_window": self.outside_window,
            "total_rate": float(self.demand.sum()),
        }


def _validated_frame(records: Iterable[Union[TripRecord, Dict[str, Any]]]) -> Tuple[pd.DataFrame, int, int]:
    rows = []
    total = invalid = 0
    for record in records:
        total += 1
        if not isinstance(record, TripRecord):
            cleaned = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in dict(record).items()}
            try:
                record = TripRecord.model_validate(cleaned)
            except ValidationError as e:
                invalid += 1
                logger.debug(f"Skipping trip record {total}: {e.errors()[0]['msg']}")
                continue
        rows.append(record.model_dump())
    return pd.DataFrame(rows, columns=TRIP_COLUMNS), total, invalid


def _zones(frame: pd.DataFrame, end: str, grid: ZoneGrid) -> pd.Series:
    """Zone id of every pickup or dropoff; 0 outside the grid"""
    known = set(grid.zone_ids)

    def locate(row) -> int:
        zone = row[f"{end}_zone"]
        if zone is not None and not pd.isna(zone):
            return int(zone) if int(zone) in known else 0
        found = grid.zone_of_point(float(row[f"{end}_x"]), float(row[f"{end}_y"]))
        return found or 0

    if frame.empty:
        return pd.Series(dtype=int)
    return frame.apply(locate, axis=1).astype(int)


def ingest_trip_summary(
    records: Iterable[Union[TripRecord, Dict[str, Any]]],
    grid: ZoneGrid,
    window: TimeWindow,
    days: int,
) -> IngestionSummary:
    """Hourly trip rates of the records starting inside the window, with drop counts"""
    if days < 1:
        raise ValueError(f"days must be at least 1, got {days}")

    frame, total, invalid = _validated_frame(records)
    size = grid.size
    summary = IngestionSummary(demand=np.zeros((size, size)), records=total, invalid=invalid)
    if invalid:
        logger.warning(f"Skipped {invalid} unparseable trip record(s)")
    if frame.empty:
        raise IngestionError(f"none of {total} trip records could be used")

    frame["origin"] = _zones(frame, "pickup", grid)
    frame["destination"] = _zones(frame, "dropoff", grid)
    inside = (frame["origin"] > 0) & (frame["destination"] > 0)
    summary.outside_grid = int((~inside).sum())

    stamps = pd.to_datetime(frame["timestamp"])
    seconds = stamps.dt.hour * 3600 + stamps.dt.minute * 60 + stamps.dt.second + stamps.dt.microsecond / 1e6
    in_window = (seconds >= _seconds(window.start)) & (seconds < _seconds(window.end))
    summary.outside_window = int((inside & ~in_window).sum())
    if summary.outside_grid or summary.outside_window:
        logger.warning(
            f"Dropped {summary.outside_grid} record(s) outside the grid and "
            f"{summary.outside_window} outside {window}"
        )

    used = frame[inside & in_window]
    summary.used = int(len(used))
    if used.empty:
        raise IngestionError(f"all {total} trip records were dropped")

    counts = used.groupby(["origin", "destination"]).size()
    for (origin, destination), count in counts.items():
        summary.demand[origin - 1, destination - 1] = count
    summary.demand /= window.hours * days
    logger.info(
        f"Ingested {summary.used}/{total} trips over {days} day(s) of {window}: "
        f"{summary.demand.sum():.1f} trip/hr"
    )
    return summary


def ingest_trips(
    records: Iterable[Union[TripRecord, Dict[str, Any]]],
    grid: ZoneGrid,
    window: TimeWindow,
    days: int,
) -> np.ndarray:
    """K x K hourly trip rates, row = origin"""
    return ingest_trip_summary(records, grid, window, days).demand


def read_trips_csv(path: Union[str, Path]) -> Iterator[Dict[str, Any]]:
    """Raw rows of a trips CSV; validation happens during ingestion"""
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise IngestionError(f"file not found: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IngestionError(f"cannot parse {path}: {e}") from e
    if "timestamp" not in frame.columns:
        raise IngestionError(f"{path} has no timestamp column")
    for column in TRIP_COLUMNS:
        if column not in frame.columns:
            frame[column] = None
    frame = frame[TRIP_COLUMNS].astype(object).where(frame[TRIP_COLUMNS].notna(), None)
    return iter(frame.to_dict("records"))


def write_trips_csv(records: Iterable[TripRecord], path: Union[str, Path]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([r.model_dump() for r in records], columns=TRIP_COLUMNS)
    frame["timestamp"] = pd.to_datetime(frame["timestamp"]).dt.strftime("%Y-%m-%dT%H:%M:%S")
    frame.to_csv(path, index=False)
    return len(frame)


def synthetic_trip_stream(
    grid: ZoneGrid,
    demand: np.ndarray,
    window: TimeWindow,
    days: int = 1,
    seed: int = 0,
    first_day: Optional[datetime] = None,
) -> List[TripRecord]:
    """
    Coordinate-located trips whose ingestion gives back the demand matrix;
    each pair contributes round(rate * window hours * days) records
    """
    rng = np.random.default_rng(seed)
    demand = np.asarray(demand, dtype=float)
    first_day = first_day or datetime(2019, 1, 7)
    margin = EDGE_MARGIN * grid.phi
    span = grid.phi - 2 * margin
    window_seconds = window.hours * 3600.0

    records: List[TripRecord] = []
    for i in grid.zone_ids:
        ox, oy = grid.zone_origin(i)
        for j in grid.zone_ids:
            count = int(round(demand[i - 1, j - 1] * window.hours * days))
            if count == 0:
                continue
            dx, dy = grid.zone_origin(j)
            pickups = margin + span * rng.random((count, 2))
            dropoffs = margin + span * rng.random((count, 2))
            day = rng.integers(0, days, count)
            offset = rng.random(count) * window_seconds
            for n in range(count):
                start = datetime.combine(first_day.date() + timedelta(days=int(day[n])), window.start)
                records.append(
                    TripRecord(
                        pickup_x=ox + float(pickups[n, 0]),
                        pickup_y=oy + float(pickups[n, 1]),
                        dropoff_x=dx + float(dropoffs[n, 0]),
                        dropoff_y=dy + float(dropoffs[n, 1]),
                        timestamp=start + timedelta(seconds=float(offset[n])),
                    )
                )
    logger.info(f"Generated {len(records)} synthetic trips over {days} day(s) of {window}")
    return records
