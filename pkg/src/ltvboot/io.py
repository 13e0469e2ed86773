"""CSV reading and writing for daily series and plot data.

Daily input schema (header required, exactly as written)::

    group,day,avg_revenue[,weekday]

``day`` is a 1-based integer, ``avg_revenue`` a positive decimal, ``weekday``
an integer 0-6.  Rows may appear in any order; each (group, day) at most once.
"""

from __future__ import annotations

import csv
import math
from typing import Iterable, Optional

from .errors import DuplicateDay, LtvBootError, NonPositiveResponse, ParseError
from .model import DailySeries

DAILY_HEADER = ["group", "day", "avg_revenue"]
WEEKDAY_COLUMN = "weekday"
PLOT_HEADER = ["group", "day", "observed", "extrap_median", "extrap_p05", "extrap_p95"]


def _parse_row(row, line, has_weekday, log_offset):
    width = 4 if has_weekday else 3
    if len(row) != width:
        raise ParseError(f"expected {width} fields, got {len(row)}", line)
    group = row[0].strip()
    if not group:
        raise ParseError("empty group label", line)
    try:
        day = int(row[1])
    except ValueError:
        raise ParseError(f"day {row[1]!r} is not an integer", line) from None
    if day < 1:
        raise ParseError(f"day {day} must be >= 1", line)
    try:
        value = float(row[2])
    except ValueError:
        raise ParseError(f"avg_revenue {row[2]!r} is not a number", line) from None
    if not math.isfinite(value):
        raise ParseError(f"avg_revenue {row[2]!r} is not finite", line)
    if log_offset is not None:
        value += log_offset
    if value <= 0:
        raise NonPositiveResponse(
            f"line {line}: avg_revenue {value!r} for group {group!r} day {day} is not "
            "positive (see --log-offset)"
        )
    weekday = None
    if has_weekday:
        try:
            weekday = int(row[3])
        except ValueError:
            raise ParseError(f"weekday {row[3]!r} is not an integer", line) from None
        if not 0 <= weekday <= 6:
            raise ParseError(f"weekday {weekday} outside 0-6", line)
    return group, day, value, weekday


def load_daily_csv(path, log_offset: Optional[float] = None) -> list:
    """Read one :class:`DailySeries` per group, in order of first appearance.

    ``log_offset`` is added to every response before validation; it exists so
    that zero-revenue days can be admitted deliberately.
    """
    rows: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file", 1)
        header = [h.strip() for h in header]
        if header == DAILY_HEADER:
            has_weekday = False
        elif header == DAILY_HEADER + [WEEKDAY_COLUMN]:
            has_weekday = True
        else:
            raise ParseError(
                f"header must be {','.join(DAILY_HEADER)}[,{WEEKDAY_COLUMN}], got {','.join(header)}",
                1,
            )
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            group, day, value, weekday = _parse_row(row, line, has_weekday, log_offset)
            by_day = rows.setdefault(group, {})
            if day in by_day:
                raise DuplicateDay(
                    f"group {group!r} day {day} repeats line {by_day[day][2]}", line
                )
            by_day[day] = (value, weekday, line)

    out = []
    for group, by_day in rows.items():
        days = sorted(by_day)
        try:
            out.append(
                DailySeries(
                    group,
                    tuple(days),
                    tuple(by_day[d][0] for d in days),
                    tuple(by_day[d][1] for d in days) if has_weekday else None,
                )
            )
        except LtvBootError as exc:
            raise type(exc)(f"{path}: {exc}") from None
    return out


def write_daily_csv(series: Iterable[DailySeries], path) -> None:
    """Inverse of :func:`load_daily_csv`; floats are written with ``repr`` so they round-trip."""
    series = list(series)
    with_weekday = {s.weekday is not None for s in series}
    if len(with_weekday) > 1:
        raise ValueError("either every series carries weekdays or none does")
    has_weekday = with_weekday == {True}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DAILY_HEADER + ([WEEKDAY_COLUMN] if has_weekday else []))
        for s in series:
            for i, (d, v) in enumerate(zip(s.days, s.values)):
                row = [s.group_label, d, repr(float(v))]
                if has_weekday:
                    row.append(s.weekday[i])
                writer.writerow(row)


def write_plot_csv(bands: dict, observed: dict, path) -> None:
    """Write per-group extrapolation bands.

    ``bands[group]`` maps ``day``, ``median``, ``p05``, ``p95`` to equal-length
    sequences; ``observed[group]`` is the group's DailySeries.  The
    ``observed`` column is empty on days without an observation.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLOT_HEADER)
        for group, band in bands.items():
            seen = dict(zip(observed[group].days, observed[group].values))
            for i, day in enumerate(band["day"]):
                obs = seen.get(day)
                writer.writerow(
                    [
                        group,
                        day,
                        "" if obs is None else repr(obs),
                        repr(band["median"][i]),
                        repr(band["p05"][i]),
                        repr(band["p95"][i]),
                    ]
                )
