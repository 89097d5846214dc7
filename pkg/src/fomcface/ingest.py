"""Parsers and validators for the canonical input files.

Four record files feed the pipeline: frame emotion scores (JSONL), transcript
segments (JSONL), minute bars (CSV), and meeting metadata (CSV), plus plain
keyword lexicon files. Every parser validates record invariants, normalizes
timestamps to UTC, and returns records in a canonical sort order so parsing is
independent of on-disk row order. Serializers emit the canonical normal form
(UTC timestamps, stable ordering) used by the round-trip tests.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence
from zoneinfo import ZoneInfo

DEFAULT_TZ = "US/Eastern"

EMOTIONS = ("angry", "disgust", "fear", "happy", "sad", "surprise", "neutral")

INSTRUMENTS = ("SPY", "VIX", "EUR", "JPY")

CHAIRS = ("Bernanke", "Yellen", "Powell")

SPEAKERS = ("chair", "journalist", "other")

LEXICON_NAMES = ("hawkish", "dovish", "statement_related")

# FER softmax rows printed at finite precision do not sum to exactly 100
SCORE_SUM_RANGE = (99.0, 101.0)


class IngestError(ValueError):
    """Base class for everything the parsers can reject."""


class ParseError(IngestError):
    """A line could not be decoded at all."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class ValidationError(IngestError):
    """A decoded record violates a type invariant."""

    def __init__(self, message: str, record=None):
        self.record = record
        if record is not None:
            message = f"{message} (record: {record})"
        super().__init__(message)


# ---------------------------------------------------------------------------
# domain records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameScore:
    """One video frame's seven emotion intensities plus face metadata."""

    meeting_id: str
    t: datetime
    face_detected: bool
    angry: Optional[float] = None
    disgust: Optional[float] = None
    fear: Optional[float] = None
    happy: Optional[float] = None
    sad: Optional[float] = None
    surprise: Optional[float] = None
    neutral: Optional[float] = None
    chair_similarity: Optional[float] = None
    embedding_id: Optional[str] = None

    def scores(self) -> tuple:
        return tuple(getattr(self, e) for e in EMOTIONS)


@dataclass(frozen=True)
class TranscriptSegment:
    """A timestamped sentence with speaker flag and external sentiment scores."""

    meeting_id: str
    t_start: datetime
    t_end: datetime
    text: str
    speaker: str
    sentiment_negative: float
    sentiment_positive: float
    sentiment_neutral: float
    fls_flag: bool


@dataclass(frozen=True)
class MinuteBar:
    """One instrument-minute of price/volume/tick data."""

    instrument: str
    t: datetime
    price: float
    volume: Optional[float] = None
    tick_count: Optional[int] = None


@dataclass(frozen=True)
class MeetingMeta:
    """Per-conference metadata: chair, tenure count, anchors, daily controls."""

    meeting_id: str
    date: date
    chair: str
    conference_count: int
    press_conf_start: datetime
    statement_release: datetime
    has_intro_statement: bool = True
    testimony_dates: tuple = ()
    ffr_change: float = 0.0
    mpu: float = 0.0
    public_interest: Optional[float] = None


@dataclass(frozen=True)
class Lexicon:
    """A named list of lowercase multi-word phrases."""

    name: str
    phrases: tuple

    def __len__(self) -> int:
        return len(self.phrases)


# ---------------------------------------------------------------------------
# timestamp handling
# ---------------------------------------------------------------------------


def _read_header_tz(lines: Sequence[str], path="<input>") -> tuple[ZoneInfo, int]:
    """Return (file timezone, number of leading directive lines).

    Files may start with ``#tz=<zone>``; the default is US/Eastern.
    """
    tz = ZoneInfo(DEFAULT_TZ)
    skip = 0
    for line in lines:
        stripped = line.strip()
        if not stripped.startswith("#"):
            break
        skip += 1
        if stripped.startswith("#tz="):
            try:
                tz = ZoneInfo(stripped[4:].strip())
            except Exception as exc:  # unknown zone name
                raise ParseError(path, skip, f"unknown timezone {stripped[4:]!r}") from exc
    return tz, skip


def parse_timestamp(raw: str, tz: ZoneInfo) -> datetime:
    """Parse an ISO timestamp; naive values are localized to the file tz."""
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=tz)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat()


def _fmt(value) -> str:
    """Shortest round-trip decimal representation, '' for absent."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# frame scores
# ---------------------------------------------------------------------------


def _validate_frame(rec: FrameScore) -> None:
    present = [s for s in rec.scores() if s is not None]
    if rec.face_detected:
        if len(present) != len(EMOTIONS):
            raise ValidationError("face_detected frame is missing emotion scores", rec)
        for name, score in zip(EMOTIONS, rec.scores()):
            if not (0.0 <= score <= 100.0):
                raise ValidationError(f"score out of range: {name}={score}", rec)
        total = sum(present)
        if not (SCORE_SUM_RANGE[0] <= total <= SCORE_SUM_RANGE[1]):
            raise ValidationError(f"emotion scores sum to {total:.4f}, outside {SCORE_SUM_RANGE}", rec)
    elif present:
        raise ValidationError("scores present although face_detected is false", rec)
    if rec.chair_similarity is not None and not (0.0 <= rec.chair_similarity <= 1.0):
        raise ValidationError(f"chair_similarity out of [0,1]: {rec.chair_similarity}", rec)
    if rec.t.microsecond != 0:
        raise ValidationError("frame timestamp carries sub-second precision", rec)


def parse_frame_scores(path) -> list[FrameScore]:
    """Parse frame_scores.jsonl into validated, (meeting_id, t)-sorted records."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    tz, skip = _read_header_tz(lines, path)
    records: list[FrameScore] = []
    for line_no, line in enumerate(lines, start=1):
        if line_no <= skip or not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ParseError(path, line_no, "record is not a JSON object")
        try:
            rec = FrameScore(
                meeting_id=str(obj["meeting_id"]),
                t=parse_timestamp(obj["t"], tz),
                face_detected=bool(obj["face_detected"]),
                chair_similarity=(None if obj.get("chair_similarity") is None
                                  else float(obj["chair_similarity"])),
                embedding_id=obj.get("embedding_id"),
                **{e: (None if obj.get(e) is None else float(obj[e])) for e in EMOTIONS},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, line_no, f"malformed frame record: {exc}") from exc
        _validate_frame(rec)
        records.append(rec)
    records.sort(key=lambda r: (r.meeting_id, r.t))
    _check_frame_sequence(records)
    return records


def _check_frame_sequence(records: Sequence[FrameScore]) -> None:
    prev: Optional[FrameScore] = None
    first_in_meeting: dict[str, datetime] = {}
    for rec in records:
        first = first_in_meeting.setdefault(rec.meeting_id, rec.t)
        if (rec.t - first) % timedelta(seconds=2):
            raise ValidationError("frame timestamp off the meeting's 2-second grid", rec)
        if prev is not None and prev.meeting_id == rec.meeting_id and rec.t <= prev.t:
            raise ValidationError("frame timestamps not strictly increasing within meeting", rec)
        prev = rec


def serialize_frame_scores(records: Iterable[FrameScore]) -> str:
    """Canonical normal form: UTC header, sorted records, fixed key order."""
    out = ["#tz=UTC"]
    for rec in sorted(records, key=lambda r: (r.meeting_id, r.t)):
        obj = {"meeting_id": rec.meeting_id, "t": format_timestamp(rec.t),
               "face_detected": rec.face_detected}
        if rec.face_detected:
            obj.update({e: getattr(rec, e) for e in EMOTIONS})
        if rec.chair_similarity is not None:
            obj["chair_similarity"] = rec.chair_similarity
        if rec.embedding_id is not None:
            obj["embedding_id"] = rec.embedding_id
        out.append(json.dumps(obj))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# transcript
# ---------------------------------------------------------------------------


def _validate_segment(rec: TranscriptSegment) -> None:
    if rec.t_start >= rec.t_end:
        raise ValidationError("segment must satisfy t_start < t_end", rec)
    if rec.speaker not in SPEAKERS:
        raise ValidationError(f"unknown speaker {rec.speaker!r}", rec)
    for name in ("sentiment_negative", "sentiment_positive", "sentiment_neutral"):
        v = getattr(rec, name)
        if not (0.0 <= v <= 1.0):
            raise ValidationError(f"{name} out of [0,1]: {v}", rec)


def parse_transcript(path) -> list[TranscriptSegment]:
    """Parse transcript.jsonl into sorted, non-overlapping segments."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    tz, skip = _read_header_tz(lines, path)
    records: list[TranscriptSegment] = []
    for line_no, line in enumerate(lines, start=1):
        if line_no <= skip or not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from exc
        try:
            rec = TranscriptSegment(
                meeting_id=str(obj["meeting_id"]),
                t_start=parse_timestamp(obj["t_start"], tz),
                t_end=parse_timestamp(obj["t_end"], tz),
                text=str(obj["text"]),
                speaker=str(obj["speaker"]),
                sentiment_negative=float(obj["sentiment_negative"]),
                sentiment_positive=float(obj["sentiment_positive"]),
                sentiment_neutral=float(obj["sentiment_neutral"]),
                fls_flag=bool(obj["fls_flag"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, line_no, f"malformed transcript record: {exc}") from exc
        _validate_segment(rec)
        records.append(rec)
    records.sort(key=lambda r: (r.meeting_id, r.t_start, r.t_end))
    prev: Optional[TranscriptSegment] = None
    for rec in records:
        if prev is not None and prev.meeting_id == rec.meeting_id and rec.t_start < prev.t_end:
            raise ValidationError("segments overlap within meeting", rec)
        prev = rec
    return records


def serialize_transcript(records: Iterable[TranscriptSegment]) -> str:
    out = ["#tz=UTC"]
    for rec in sorted(records, key=lambda r: (r.meeting_id, r.t_start, r.t_end)):
        out.append(json.dumps({
            "meeting_id": rec.meeting_id,
            "t_start": format_timestamp(rec.t_start),
            "t_end": format_timestamp(rec.t_end),
            "text": rec.text,
            "speaker": rec.speaker,
            "sentiment_negative": rec.sentiment_negative,
            "sentiment_positive": rec.sentiment_positive,
            "sentiment_neutral": rec.sentiment_neutral,
            "fls_flag": rec.fls_flag,
        }))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# minute bars
# ---------------------------------------------------------------------------

BARS_HEADER = ["instrument", "t", "price", "volume", "tick_count"]


def parse_minute_bars(path) -> list[MinuteBar]:
    """Parse bars.csv; one bar per (instrument, minute)."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    tz, skip = _read_header_tz(lines, path)
    rows = list(csv.reader(lines[skip:]))
    if not rows or [c.strip() for c in rows[0]] != BARS_HEADER:
        raise ParseError(path, skip + 1, f"expected header {','.join(BARS_HEADER)}")
    records: list[MinuteBar] = []
    for offset, row in enumerate(rows[1:], start=skip + 2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(BARS_HEADER):
            raise ParseError(path, offset, f"expected {len(BARS_HEADER)} fields, got {len(row)}")
        instrument, t_raw, price_raw, volume_raw, tick_raw = (c.strip() for c in row)
        try:
            rec = MinuteBar(
                instrument=instrument,
                t=parse_timestamp(t_raw, tz),
                price=float(price_raw),
                volume=float(volume_raw) if volume_raw else None,
                tick_count=int(tick_raw) if tick_raw else None,
            )
        except ValueError as exc:
            raise ParseError(path, offset, f"malformed bar: {exc}") from exc
        if rec.instrument not in INSTRUMENTS:
            raise ValidationError(f"unknown instrument {rec.instrument!r}", rec)
        if not (rec.price > 0 and math.isfinite(rec.price)):
            raise ValidationError(f"price must be positive: {rec.price}", rec)
        if rec.volume is not None and rec.volume < 0:
            raise ValidationError(f"volume must be non-negative: {rec.volume}", rec)
        if rec.tick_count is not None and rec.tick_count < 0:
            raise ValidationError(f"tick_count must be non-negative: {rec.tick_count}", rec)
        if rec.t.second or rec.t.microsecond:
            raise ValidationError("bar timestamp must be on the minute", rec)
        records.append(rec)
    records.sort(key=lambda r: (r.instrument, r.t))
    prev: Optional[MinuteBar] = None
    for rec in records:
        if prev is not None and prev.instrument == rec.instrument and prev.t == rec.t:
            raise ValidationError("duplicate (instrument, minute) bar", rec)
        prev = rec
    return records


def serialize_minute_bars(records: Iterable[MinuteBar]) -> str:
    out = ["#tz=UTC", ",".join(BARS_HEADER)]
    for rec in sorted(records, key=lambda r: (r.instrument, r.t)):
        out.append(",".join([
            rec.instrument,
            format_timestamp(rec.t),
            _fmt(rec.price),
            _fmt(rec.volume),
            _fmt(rec.tick_count),
        ]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# meeting metadata
# ---------------------------------------------------------------------------

MEETINGS_HEADER = [
    "meeting_id", "date", "chair", "conference_count", "press_conf_start",
    "statement_release", "has_intro_statement", "testimony_dates",
    "ffr_change", "mpu", "public_interest",
]

DEFAULT_STATEMENT_RELEASE = "14:00"
DEFAULT_CONF_START = "14:30"


def _parse_anchor(raw: str, day: date, tz: ZoneInfo, default: str) -> datetime:
    """An anchor is a local HH:MM[:SS] time-of-day or a full ISO timestamp."""
    raw = raw.strip() or default
    if "T" in raw or " " in raw or "-" in raw[:5]:
        return parse_timestamp(raw, tz)
    parts = [int(p) for p in raw.split(":")]
    local = datetime(day.year, day.month, day.day, *parts, tzinfo=tz)
    return local.astimezone(timezone.utc)


def _parse_bool(raw: str) -> bool:
    raw = raw.strip().lower()
    if raw in ("true", "1", "yes"):
        return True
    if raw in ("false", "0", "no", ""):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_meeting_meta(path) -> list[MeetingMeta]:
    """Parse meetings.csv; meeting_id unique, conference_count unique per chair."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    tz, skip = _read_header_tz(lines, path)
    rows = list(csv.reader(lines[skip:]))
    if not rows or [c.strip() for c in rows[0]] != MEETINGS_HEADER:
        raise ParseError(path, skip + 1, f"expected header {','.join(MEETINGS_HEADER)}")
    records: list[MeetingMeta] = []
    for offset, row in enumerate(rows[1:], start=skip + 2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(MEETINGS_HEADER):
            raise ParseError(path, offset, f"expected {len(MEETINGS_HEADER)} fields, got {len(row)}")
        vals = dict(zip(MEETINGS_HEADER, (c.strip() for c in row)))
        try:
            day = date.fromisoformat(vals["date"])
            rec = MeetingMeta(
                meeting_id=vals["meeting_id"],
                date=day,
                chair=vals["chair"],
                conference_count=int(vals["conference_count"]),
                press_conf_start=_parse_anchor(vals["press_conf_start"], day, tz, DEFAULT_CONF_START),
                statement_release=_parse_anchor(vals["statement_release"], day, tz,
                                                DEFAULT_STATEMENT_RELEASE),
                has_intro_statement=_parse_bool(vals["has_intro_statement"]),
                testimony_dates=tuple(sorted(
                    date.fromisoformat(d) for d in vals["testimony_dates"].split(";") if d
                )),
                ffr_change=float(vals["ffr_change"]) if vals["ffr_change"] else 0.0,
                mpu=float(vals["mpu"]) if vals["mpu"] else 0.0,
                public_interest=float(vals["public_interest"]) if vals["public_interest"] else None,
            )
        except ValueError as exc:
            raise ParseError(path, offset, f"malformed meeting record: {exc}") from exc
        if rec.chair not in CHAIRS:
            raise ValidationError(f"unknown chair {rec.chair!r}", rec)
        if rec.conference_count < 1:
            raise ValidationError("conference_count must be positive", rec)
        if not rec.statement_release < rec.press_conf_start:
            raise ValidationError("statement_release must precede press_conf_start", rec)
        records.append(rec)
    records.sort(key=lambda r: (r.date, r.meeting_id))
    seen_ids: set = set()
    seen_counts: set = set()
    for rec in records:
        if rec.meeting_id in seen_ids:
            raise ValidationError("duplicate meeting_id", rec)
        seen_ids.add(rec.meeting_id)
        key = (rec.chair, rec.conference_count)
        if key in seen_counts:
            raise ValidationError("conference_count not unique within chair", rec)
        seen_counts.add(key)
    return records


def serialize_meeting_meta(records: Iterable[MeetingMeta]) -> str:
    out = ["#tz=UTC", ",".join(MEETINGS_HEADER)]
    for rec in sorted(records, key=lambda r: (r.date, r.meeting_id)):
        out.append(",".join([
            rec.meeting_id,
            rec.date.isoformat(),
            rec.chair,
            str(rec.conference_count),
            format_timestamp(rec.press_conf_start),
            format_timestamp(rec.statement_release),
            str(rec.has_intro_statement).lower(),
            ";".join(d.isoformat() for d in rec.testimony_dates),
            _fmt(rec.ffr_change),
            _fmt(rec.mpu),
            _fmt(rec.public_interest),
        ]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# lexicons
# ---------------------------------------------------------------------------


def parse_lexicon(path, name: Optional[str] = None) -> Lexicon:
    """Parse a one-phrase-per-line lexicon file."""
    path = Path(path)
    if name is None:
        name = path.stem
    phrases: list[str] = []
    seen: set = set()
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        phrase = line.strip().lower()
        if not phrase or phrase.startswith("#"):
            continue
        if phrase in seen:
            raise ParseError(path, line_no, f"duplicate phrase: {phrase!r}")
        seen.add(phrase)
        phrases.append(phrase)
    if not phrases:
        raise ValidationError(f"lexicon {name!r} is empty")
    return Lexicon(name=name, phrases=tuple(phrases))


def bundled_lexicon_path(name: str) -> Path:
    """Path of a lexicon shipped with the package (hawkish, dovish, statement_related)."""
    if name not in LEXICON_NAMES:
        raise ValueError(f"no bundled lexicon named {name!r}; choose from {LEXICON_NAMES}")
    return Path(__file__).parent / "lexicons" / f"{name}.txt"


def load_bundled_lexicon(name: str) -> Lexicon:
    return parse_lexicon(bundled_lexicon_path(name), name=name)
