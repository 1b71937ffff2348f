"""Epoch-second timestamp helpers.

Timestamps are ISO-8601 UTC on disk and integer epoch seconds in memory.
Calendar arithmetic (midnight alignment, Monday boundaries) runs in a
configurable fixed "local" offset from UTC, default 0.
"""

from __future__ import annotations

from datetime import datetime, timezone

SECONDS_PER_MINUTE = 60
SECONDS_PER_HOUR = 3600
SECONDS_PER_DAY = 86400
SECONDS_PER_WEEK = 7 * SECONDS_PER_DAY

# Days per month, non-leap. Cumulative offsets computed once.
_DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def _is_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def _days_from_civil(year: int, month: int, day: int) -> int:
    """Days since 1970-01-01 (proleptic Gregorian, Howard Hinnant's algorithm)."""
    year -= month <= 2
    era = (year if year >= 0 else year - 399) // 400
    yoe = year - era * 400
    doy = (153 * (month + (-3 if month > 2 else 9)) + 2) // 5 + day - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * 146097 + doe - 719468


def parse_iso_utc(text: str) -> int:
    """Parse an ISO-8601 UTC timestamp ('...Z' or '+00:00') to epoch seconds.

    Raises ValueError on anything unparseable or with a non-UTC offset.
    """
    s = text.strip()
    # Fast path for the canonical form YYYY-MM-DDTHH:MM:SSZ.
    if (
        len(s) == 20
        and s[4] == "-"
        and s[7] == "-"
        and s[10] == "T"
        and s[13] == ":"
        and s[16] == ":"
        and s[19] == "Z"
    ):
        year = int(s[0:4])
        month = int(s[5:7])
        day = int(s[8:10])
        hour = int(s[11:13])
        minute = int(s[14:16])
        second = int(s[17:19])
        if not (1 <= month <= 12):
            raise ValueError(f"bad month in timestamp: {text!r}")
        dim = _DAYS_IN_MONTH[month - 1] + (1 if month == 2 and _is_leap(year) else 0)
        if not (1 <= day <= dim):
            raise ValueError(f"bad day in timestamp: {text!r}")
        if hour > 23 or minute > 59 or second > 59:
            raise ValueError(f"bad time in timestamp: {text!r}")
        return (
            _days_from_civil(year, month, day) * SECONDS_PER_DAY
            + hour * SECONDS_PER_HOUR
            + minute * SECONDS_PER_MINUTE
            + second
        )
    # General ISO forms; Python 3.10 fromisoformat cannot digest 'Z'.
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    elif dt.utcoffset() != timezone.utc.utcoffset(None):
        raise ValueError(f"non-UTC timestamp: {text!r}")
    return int(dt.timestamp())


def format_iso_utc(epoch: int) -> str:
    """Render epoch seconds as canonical 'YYYY-MM-DDTHH:MM:SSZ'."""
    dt = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def day_index(epoch: int, tz_offset: int = 0) -> int:
    """Calendar day number (local) since 1970-01-01."""
    return (epoch + tz_offset) // SECONDS_PER_DAY


def weekday(epoch: int, tz_offset: int = 0) -> int:
    """Local weekday, Monday=0 .. Sunday=6. 1970-01-01 was a Thursday."""
    return (day_index(epoch, tz_offset) + 3) % 7


def floor_to_midnight(epoch: int, tz_offset: int = 0) -> int:
    """Latest local midnight at or before `epoch`, as epoch seconds."""
    return day_index(epoch, tz_offset) * SECONDS_PER_DAY - tz_offset


def monday_on_or_before(epoch: int, tz_offset: int = 0) -> int:
    """Local Monday 00:00 at or before `epoch`, as epoch seconds."""
    d = day_index(epoch, tz_offset)
    return (d - (d + 3) % 7) * SECONDS_PER_DAY - tz_offset


def monday_on_or_after(epoch: int, tz_offset: int = 0) -> int:
    """Local Monday 00:00 at or after `epoch`, as epoch seconds."""
    m = monday_on_or_before(epoch, tz_offset)
    return m if m >= epoch else m + SECONDS_PER_WEEK
