"""Minute-level analysis panel.

Joins the facial, language, and market minute tables on (meeting_id, minute),
attaches meeting-level context (chair, tenure quartile, congressional-
testimony flags, daily controls), lags the facial ratios by one minute, and
builds interaction columns. Rows need a market observation to enter the
panel; language features may be absent (NaN) and are only dropped later by
the regression's listwise deletion, so sample sizes vary across
specifications exactly as the inputs dictate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .facefeat import FACIAL_COLUMNS
from .ingest import MeetingMeta
from .market import MARKET_COLUMNS
from .textfeat import NLP_RATIO_COLUMNS, NLP_RAW_COLUMNS

MEETING_COLUMNS = ("chair", "date", "conference_count", "cfquart", "congre30",
                   "congre10", "ffr_change", "mpu", "public_interest",
                   "has_intro_statement")

DEFAULT_INTERACTIONS = (
    ("negative_facial_lag", "negative_sentiment"),
    ("negative_facial_lag", "conference_count"),
    ("negative_facial_lag", "cfquart"),
    ("negative_facial_lag", "congre30"),
    ("negative_facial_lag", "congre10"),
)


def cfquart(count: int, total: int) -> int:
    """Tenure quartile of a conference: ceil(4*count/total), clamped to 1..4.

    ``count`` is the 1-based index of this conference within the chair's
    tenure, ``total`` the chair's full conference count (e.g. the 7th of 16
    falls in quartile 2).
    """
    if count < 1 or total < 1:
        raise ValueError(f"count and total must be positive, got {count}/{total}")
    if count > total:
        raise ValueError(f"conference index {count} exceeds chair total {total}")
    return min(4, max(1, math.ceil(4 * count / total)))


def congress_flag(meeting_date: date, testimony_dates: Sequence[date], days: int) -> bool:
    """True iff a testimony falls within the ``days`` calendar days before the
    meeting — window [meeting_date - days, meeting_date), the meeting day
    itself excluded."""
    lo = meeting_date - timedelta(days=days)
    return any(lo <= d < meeting_date for d in testimony_dates)


def add_lags(facial: pd.DataFrame, columns: Sequence[str] = FACIAL_COLUMNS,
             minutes: int = 1) -> pd.DataFrame:
    """Append ``<col>_lag`` columns holding the value at minute - 1.

    The lag comes from the actual row one minute earlier within the same
    meeting; if that minute is absent the lag is NaN (first minutes included).
    """
    df = facial.sort_values(["meeting_id", "minute"]).reset_index(drop=True)
    shifted = df[["meeting_id", "minute", *columns]].copy()
    shifted["minute"] = shifted["minute"] + pd.Timedelta(minutes=minutes)
    shifted = shifted.rename(columns={c: f"{c}_lag" for c in columns})
    return df.merge(shifted, on=["meeting_id", "minute"], how="left")


def interactions(df: pd.DataFrame,
                 pairs: Sequence[Tuple[str, str]] = DEFAULT_INTERACTIONS) -> pd.DataFrame:
    """Append product columns named ``<a>_x_<b>`` for each (a, b) pair."""
    out = df.copy()
    for a, b in pairs:
        for col in (a, b):
            if col not in out.columns:
                raise KeyError(f"interaction needs column {col!r}, not in panel")
        out[f"{a}_x_{b}"] = out[a].astype(float) * out[b].astype(float)
    return out


@dataclass(frozen=True)
class PanelAudit:
    """Row counts at each assembly stage, for drop accounting."""

    stages: Tuple[Tuple[str, int], ...]

    def as_dict(self) -> Dict[str, int]:
        return dict(self.stages)


def build_panel(
    facial: pd.DataFrame,
    nlp: pd.DataFrame,
    market: pd.DataFrame,
    meetings: Sequence[MeetingMeta],
    interaction_pairs: Sequence[Tuple[str, str]] = DEFAULT_INTERACTIONS,
    frame_counts: Optional[Tuple[int, int]] = None,
) -> Tuple[pd.DataFrame, PanelAudit]:
    """Assemble the minute panel; returns (panel, audit).

    ``frame_counts`` is an optional (total, kept) pair from the frame filter,
    prepended to the audit so the full funnel is recorded in one place.
    """
    meta = {m.meeting_id: m for m in meetings}
    for source_name, df in (("facial", facial), ("nlp", nlp), ("market", market)):
        unknown = set(df["meeting_id"]) - set(meta)
        if unknown:
            raise ValueError(f"{source_name} rows reference meetings missing from "
                             f"metadata: {sorted(unknown)}")

    stages: List[Tuple[str, int]] = []
    if frame_counts is not None:
        total, kept = frame_counts
        if kept > total:
            raise ValueError("kept frames exceed total frames")
        stages += [("frames_total", total), ("frames_kept", kept)]

    stages.append(("facial_minute_rows", len(facial)))
    nonempty = facial[facial["frames_in_window"] > 0].copy()
    stages.append(("facial_nonempty", len(nonempty)))

    lagged = add_lags(nonempty)
    nlp_cols = ["meeting_id", "minute", "chair_speech",
                *NLP_RAW_COLUMNS, *NLP_RATIO_COLUMNS]
    joined = lagged.merge(nlp[nlp_cols], on=["meeting_id", "minute"], how="left")
    joined = joined.merge(market, on=["meeting_id", "minute"], how="inner")
    stages.append(("panel_rows", len(joined)))

    for (a, an), (b, bn) in zip(stages, stages[1:]):
        comparable = not (a == "frames_kept" and b == "facial_minute_rows")
        if comparable and bn > an:
            raise ValueError(f"audit stage {b!r} ({bn}) exceeds {a!r} ({an})")

    chair_totals: Dict[str, int] = {}
    for m in meetings:
        chair_totals[m.chair] = max(chair_totals.get(m.chair, 0), m.conference_count)

    def meeting_field(fn):
        return joined["meeting_id"].map(lambda mid: fn(meta[mid]))

    joined["chair"] = meeting_field(lambda m: m.chair)
    joined["date"] = meeting_field(lambda m: m.date.isoformat())
    joined["conference_count"] = meeting_field(lambda m: m.conference_count)
    joined["cfquart"] = meeting_field(
        lambda m: cfquart(m.conference_count, chair_totals[m.chair]))
    joined["congre30"] = meeting_field(
        lambda m: int(congress_flag(m.date, m.testimony_dates, 30)))
    joined["congre10"] = meeting_field(
        lambda m: int(congress_flag(m.date, m.testimony_dates, 10)))
    joined["ffr_change"] = meeting_field(lambda m: m.ffr_change)
    joined["mpu"] = meeting_field(lambda m: m.mpu)
    joined["public_interest"] = meeting_field(
        lambda m: np.nan if m.public_interest is None else m.public_interest)
    joined["has_intro_statement"] = meeting_field(lambda m: int(m.has_intro_statement))

    joined = interactions(joined, interaction_pairs)
    joined = joined.sort_values(["meeting_id", "minute"]).reset_index(drop=True)
    return joined, PanelAudit(stages=tuple(stages))


_LABELS = {
    "negative_facial": "Negative facial ratio",
    "transparent_facial": "Transparent facial ratio",
    "negative_facial_lag": "Negative facial ratio (t-1)",
    "transparent_facial_lag": "Transparent facial ratio (t-1)",
    "negative_sentiment": "Negative speech sentiment",
    "hawkish": "Hawkish language",
    "statement_related": "Statement references",
    "fls_ratio": "Forward-looking statements",
    "abs_pct_spy": "|1-min % change| SPY",
    "abs_pct_vix": "|1-min % change| VIX",
    "abs_pct_eur": "|1-min % change| EURUSD",
    "abs_pct_jpy": "|1-min % change| USDJPY",
    "volume_spy": "SPY volume (day-normalized)",
    "ticks_spy": "SPY tick count",
    "predrift_spy": "Pre-conference drift SPY",
    "predrift_vix": "Pre-conference drift VIX",
    "predrift_eur": "Pre-conference drift EURUSD",
    "predrift_jpy": "Pre-conference drift USDJPY",
    "conference_count": "Conference number in tenure",
    "cfquart": "Tenure quartile",
    "congre30": "Testimony within 30 days",
    "congre10": "Testimony within 10 days",
    "ffr_change": "Rate-target change",
    "mpu": "Policy-uncertainty index",
    "public_interest": "Public attention index",
    "has_intro_statement": "Has opening statement",
    "const": "Constant",
}


def _stage_of(name: str) -> str:
    if name in ("meeting_id", "minute"):
        return "key"
    if name in FACIAL_COLUMNS or name.endswith("_facial_lag") or name in (
            "frames_in_window", "low_support"):
        return "facial"
    if name in NLP_RATIO_COLUMNS or name in NLP_RAW_COLUMNS or name == "chair_speech":
        return "language"
    if name in MARKET_COLUMNS:
        return "market"
    if "_x_" in name:
        return "interaction"
    return "meeting"


def display_label(name: str) -> str:
    if name in _LABELS:
        return _LABELS[name]
    if name.endswith("_lag") and name[:-4] in _LABELS:
        return f"{_LABELS[name[:-4]]} (t-1)"
    if "_x_" in name:
        a, b = name.split("_x_", 1)
        return f"{display_label(a)} x {display_label(b)}"
    if name.endswith("_facial"):
        return f"{name[:-7].capitalize()} facial ratio"
    return name


def column_catalog(df: pd.DataFrame) -> List[Dict[str, str]]:
    """One entry per panel column: name, pipeline stage, dtype, display label."""
    return [{
        "name": c,
        "stage": _stage_of(c),
        "dtype": str(df[c].dtype),
        "display_label": display_label(c),
    } for c in df.columns]
