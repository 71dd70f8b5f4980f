"""Parsing of delimited location logs into per-user trajectories.

Input records carry twelve columns (subscriber id, call metadata, start/end
times, region and location-area ids); only the subscriber id, start time,
roam-city id and location-area id feed the downstream math, the rest are
carried verbatim. Users with fewer than ``min_active_days`` distinct active
calendar dates are dropped before analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Mapping
from zoneinfo import ZoneInfo

CANONICAL_FIELDS = (
    "service_nbr",
    "call_type",
    "opposite_no",
    "tolltype_id",
    "roam_type",
    "start_time",
    "end_time",
    "duration",
    "city_id",
    "roam_city_id",
    "oppcity_id",
    "lac_id",
)

DEFAULT_MIN_ACTIVE_DAYS = 150

TRAJECTORY_HEADER = "user_id,timestamp,location_id"
_TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


def _resolve_tz(tz: str | ZoneInfo) -> ZoneInfo | timezone:
    if isinstance(tz, ZoneInfo):
        return tz
    if tz.upper() == "UTC":
        return timezone.utc
    return ZoneInfo(tz)


def parse_timestamp(text: str, tz: str | ZoneInfo = "UTC") -> float:
    """Parse epoch seconds or a wall-clock string into epoch seconds.

    Bare numbers are epoch seconds; otherwise ``YYYY-MM-DD HH:MM:SS`` (or any
    ISO-8601 form ``datetime.fromisoformat`` accepts). Naive wall-clock values
    are interpreted in ``tz``.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    try:
        return float(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=_resolve_tz(tz))
    return dt.timestamp()


def format_timestamp(epoch: float, tz: str | ZoneInfo = "UTC") -> str:
    dt = datetime.fromtimestamp(epoch, tz=_resolve_tz(tz))
    return dt.strftime(_TIME_FORMAT)


@dataclass(frozen=True)
class CdrRecord:
    """One parsed log line; raw column values plus the decoded start time."""

    service_nbr: str
    start_time: str
    roam_city_id: str
    lac_id: str
    timestamp: float
    extra: Mapping[str, str] = field(default_factory=dict)

    @property
    def user_id(self) -> str:
        return self.service_nbr

    @property
    def location_id(self) -> str:
        return self.lac_id


@dataclass(frozen=True)
class ParseFailure:
    """Diagnostic for a malformed input line; the stream continues past it."""

    line_number: int
    reason: str
    raw: str


@dataclass(frozen=True)
class FieldLayout:
    """Column layout of a delimited record file.

    ``columns`` maps canonical field names to zero-based column indices.
    ``from_header`` derives the mapping from a header row instead.
    """

    delimiter: str = ","
    columns: Mapping[str, int] | None = None

    @classmethod
    def positional(cls, delimiter: str = ",") -> "FieldLayout":
        return cls(delimiter=delimiter, columns={name: i for i, name in enumerate(CANONICAL_FIELDS)})

    @classmethod
    def from_header(cls, header_line: str, delimiter: str = ",") -> "FieldLayout":
        names = [c.strip().lower() for c in header_line.rstrip("\n").split(delimiter)]
        columns: dict[str, int] = {}
        for want in CANONICAL_FIELDS:
            if want in names:
                columns[want] = names.index(want)
        missing = [f for f in ("service_nbr", "start_time", "lac_id") if f not in columns]
        if missing:
            raise ValueError(f"header is missing required columns: {', '.join(missing)}")
        return cls(delimiter=delimiter, columns=columns)

    def require(self) -> Mapping[str, int]:
        if self.columns is None:
            raise ValueError("layout has no column mapping; use positional() or from_header()")
        return self.columns


def parse_records(
    lines: Iterable[str],
    layout: FieldLayout | None = None,
    tz: str | ZoneInfo = "UTC",
) -> Iterator[CdrRecord | ParseFailure]:
    """Parse delimited lines into records, yielding a diagnostic per bad line.

    Yields ``CdrRecord`` and ``ParseFailure`` items in input order. Blank
    lines are skipped.
    """
    layout = layout or FieldLayout.positional()
    columns = layout.require()
    width = max(columns.values()) + 1
    for line_number, line in enumerate(lines, start=1):
        raw = line.rstrip("\n")
        if not raw.strip():
            continue
        parts = raw.split(layout.delimiter)
        if len(parts) < width:
            yield ParseFailure(line_number, f"expected at least {width} fields, got {len(parts)}", raw)
            continue
        values = {name: parts[idx].strip() for name, idx in columns.items()}
        service_nbr = values.get("service_nbr", "")
        lac_id = values.get("lac_id", "")
        if not service_nbr or not lac_id:
            yield ParseFailure(line_number, "empty service_nbr or lac_id", raw)
            continue
        try:
            ts = parse_timestamp(values.get("start_time", ""), tz)
        except ValueError as exc:
            yield ParseFailure(line_number, str(exc), raw)
            continue
        extra = {k: v for k, v in values.items() if k not in ("service_nbr", "start_time", "roam_city_id", "lac_id")}
        yield CdrRecord(
            service_nbr=service_nbr,
            start_time=values.get("start_time", ""),
            roam_city_id=values.get("roam_city_id", ""),
            lac_id=lac_id,
            timestamp=ts,
            extra=extra,
        )


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered per-user location sequence.

    ``events`` is sorted non-decreasing by timestamp (ties keep input order);
    ``active_days`` counts distinct calendar dates among the events.
    """

    user_id: str
    events: tuple[tuple[float, str], ...]
    active_days: int

    def __len__(self) -> int:
        return len(self.events)

    @property
    def locations(self) -> tuple[str, ...]:
        return tuple(loc for _, loc in self.events)


def make_trajectory(
    user_id: str,
    events: Iterable[tuple[float, str]],
    tz: str | ZoneInfo = "UTC",
) -> Trajectory:
    """Sort events by time (stable) and derive the active-day count."""
    ordered = tuple(sorted(events, key=lambda ev: ev[0]))
    if not ordered:
        raise ValueError(f"user {user_id!r} has no events")
    zone = _resolve_tz(tz)
    if zone is timezone.utc:
        days = {int(ts // 86400) for ts, _ in ordered}
    else:
        days = {datetime.fromtimestamp(ts, tz=zone).date() for ts, _ in ordered}
    return Trajectory(user_id=user_id, events=ordered, active_days=len(days))


def build_trajectories(
    records: Iterable[CdrRecord],
    *,
    collapse_duplicates: bool = False,
    tz: str | ZoneInfo = "UTC",
    roam_city_id: str | None = None,
) -> list[Trajectory]:
    """Group records by user and order each user's events by start time.

    ``roam_city_id`` restricts to records carrying that region id;
    ``collapse_duplicates`` removes runs of consecutive identical locations
    after sorting.
    """
    by_user: dict[str, list[tuple[float, str]]] = {}
    for rec in records:
        if roam_city_id is not None and rec.roam_city_id != roam_city_id:
            continue
        by_user.setdefault(rec.user_id, []).append((rec.timestamp, rec.location_id))
    out = []
    for user_id, events in by_user.items():
        traj = make_trajectory(user_id, events, tz)
        if collapse_duplicates:
            kept = [traj.events[0]]
            for ev in traj.events[1:]:
                if ev[1] != kept[-1][1]:
                    kept.append(ev)
            traj = make_trajectory(user_id, kept, tz)
        out.append(traj)
    return out


def filter_active(
    trajectories: Iterable[Trajectory],
    min_active_days: int = DEFAULT_MIN_ACTIVE_DAYS,
) -> list[Trajectory]:
    """Keep users with at least ``min_active_days`` distinct active dates."""
    if min_active_days < 0:
        raise ValueError("min_active_days must be >= 0")
    return [t for t in trajectories if t.active_days >= min_active_days]


def trajectory_file_lines(trajectories: Iterable[Trajectory], tz: str | ZoneInfo = "UTC") -> Iterator[str]:
    """Render the canonical trajectory file: header then one line per event,
    sorted by (user_id, timestamp), byte-deterministic for given input."""
    yield TRAJECTORY_HEADER
    formatted: dict[float, str] = {}  # hourly grids repeat timestamps heavily
    for traj in sorted(trajectories, key=lambda t: t.user_id):
        user_id = traj.user_id
        for ts, loc in traj.events:
            text = formatted.get(ts)
            if text is None:
                text = formatted[ts] = format_timestamp(ts, tz)
            yield f"{user_id},{text},{loc}"


def read_trajectory_file(lines: Iterable[str], tz: str | ZoneInfo = "UTC") -> list[Trajectory]:
    """Parse the canonical trajectory file back into trajectories."""
    by_user: dict[str, list[tuple[float, str]]] = {}
    parsed: dict[str, float] = {}
    for line_number, line in enumerate(lines, start=1):
        raw = line.rstrip("\n")
        if not raw.strip():
            continue
        if line_number == 1 and raw == TRAJECTORY_HEADER:
            continue
        parts = raw.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {line_number}: expected 3 fields, got {len(parts)}")
        user_id, ts_text, loc = (p.strip() for p in parts)
        if not user_id or not loc:
            raise ValueError(f"line {line_number}: empty user_id or location_id")
        ts = parsed.get(ts_text)
        if ts is None:
            ts = parsed[ts_text] = parse_timestamp(ts_text, tz)
        by_user.setdefault(user_id, []).append((ts, loc))
    return [make_trajectory(user_id, events, tz) for user_id, events in by_user.items()]
