"""Minute-level market reactions around each press conference.

For every meeting the builder emits one row per minute strictly after the
conference start, carrying one-minute absolute percent price changes per
instrument, SPY volume (normalized by that day's mean minute volume) and tick
counts, and the pre-conference drift from the statement release to the
conference start. Missing bars never fabricate values — the affected cell is
left absent and the gap is logged.
"""

from __future__ import annotations

from datetime import datetime, timedelta
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .ingest import INSTRUMENTS, MeetingMeta, MinuteBar

ANCHOR_SLACK = timedelta(minutes=2)

UNIT_SCALE = {"pct": 1.0, "bps": 100.0}

MARKET_COLUMNS = (
    tuple(f"abs_pct_{i.lower()}" for i in INSTRUMENTS)
    + ("volume_spy", "volume_spy_raw", "ticks_spy")
    + tuple(f"predrift_{i.lower()}" for i in INSTRUMENTS)
)


def pct_change(p_now: float, p_prev: float) -> float:
    """Percent change 100 * (p_now - p_prev) / p_prev."""
    if p_prev <= 0:
        raise ValueError(f"previous price must be positive, got {p_prev}")
    return 100.0 * (p_now - p_prev) / p_prev


def abs_pct_change_1min(price_by_minute: Dict[datetime, float],
                        minute: datetime) -> Optional[float]:
    """|percent change| from the bar one minute earlier; None if either bar is absent."""
    p_now = price_by_minute.get(minute)
    p_prev = price_by_minute.get(minute - timedelta(minutes=1))
    if p_now is None or p_prev is None:
        return None
    return abs(pct_change(p_now, p_prev))


def price_at_or_before(bars: Sequence[MinuteBar], anchor: datetime,
                       slack: timedelta = ANCHOR_SLACK) -> Optional[float]:
    """Price of the latest bar at or before ``anchor``, if within ``slack``."""
    best: Optional[MinuteBar] = None
    for bar in bars:
        if bar.t <= anchor and (best is None or bar.t > best.t):
            best = bar
    if best is None or anchor - best.t > slack:
        return None
    return best.price


def predrift(bars: Sequence[MinuteBar], statement_release: datetime,
             conf_start: datetime, slack: timedelta = ANCHOR_SLACK) -> Optional[float]:
    """Percent change from the statement release to the conference start.

    Both anchor prices are the nearest bar at or before the anchor within
    ``slack``; if either is missing the drift is undefined (None).
    """
    p0 = price_at_or_before(bars, statement_release, slack)
    p1 = price_at_or_before(bars, conf_start, slack)
    if p0 is None or p1 is None:
        return None
    return pct_change(p1, p0)


class MarketFeatureBuilder(BaseEstimator, TransformerMixin):
    """fit(bars, meetings=...) indexes bars by meeting day; transform emits rows.

    Parameters
    ----------
    units : "pct" (default) or "bps" — scales percent-change columns by 100.
    normalize_ticks : divide SPY tick counts by the day-mean when True
        (default False keeps raw counts).

    After transform, ``gap_log_`` holds one dict per skipped cell:
    {meeting_id, instrument, minute, reason}.
    """

    def __init__(self, units: str = "pct", normalize_ticks: bool = False,
                 anchor_slack_minutes: float = 2.0):
        self.units = units
        self.normalize_ticks = normalize_ticks
        self.anchor_slack_minutes = anchor_slack_minutes

    def fit(self, X: Sequence[MinuteBar], y=None, *, meetings: Sequence[MeetingMeta]):
        if self.units not in UNIT_SCALE:
            raise ValueError(f"units must be one of {sorted(UNIT_SCALE)}, got {self.units!r}")
        self.meetings_ = list(meetings)
        return self

    def transform(self, X: Sequence[MinuteBar]) -> pd.DataFrame:
        if not hasattr(self, "meetings_"):
            raise ValueError("MarketFeatureBuilder must be fitted before transform")
        scale = UNIT_SCALE[self.units]
        slack = timedelta(minutes=self.anchor_slack_minutes)
        self.gap_log_: List[dict] = []

        # bars keyed by (instrument, local-naive date of the bar in UTC? use date of t in UTC)
        by_day_inst: Dict[Tuple, List[MinuteBar]] = {}
        for bar in X:
            by_day_inst.setdefault((bar.t.date(), bar.instrument), []).append(bar)

        rows = []
        for meeting in sorted(self.meetings_, key=lambda m: (m.date, m.meeting_id)):
            day_bars = {
                inst: sorted(by_day_inst.get((meeting.press_conf_start.date(), inst), []),
                             key=lambda b: b.t)
                for inst in INSTRUMENTS
            }
            prices = {inst: {b.t: b.price for b in bars}
                      for inst, bars in day_bars.items()}

            drifts = {}
            for inst in INSTRUMENTS:
                d = predrift(day_bars[inst], meeting.statement_release,
                             meeting.press_conf_start, slack)
                if d is None and day_bars[inst]:
                    self.gap_log_.append({
                        "meeting_id": meeting.meeting_id, "instrument": inst,
                        "minute": None, "reason": "predrift_anchor_missing"})
                drifts[inst] = None if d is None else d * scale

            spy = day_bars["SPY"]
            day_mean_volume = (np.mean([b.volume for b in spy if b.volume is not None])
                               if any(b.volume is not None for b in spy) else None)
            day_mean_ticks = (np.mean([b.tick_count for b in spy if b.tick_count is not None])
                              if any(b.tick_count is not None for b in spy) else None)

            marks = sorted({b.t for bars in day_bars.values() for b in bars
                            if b.t > meeting.press_conf_start})
            spy_by_minute = {b.t: b for b in spy}
            for mark in marks:
                row: Dict = {"meeting_id": meeting.meeting_id, "minute": mark}
                for inst in INSTRUMENTS:
                    change = abs_pct_change_1min(prices[inst], mark)
                    col = f"abs_pct_{inst.lower()}"
                    if change is None:
                        row[col] = np.nan
                        reason = ("missing_bar" if mark not in prices[inst]
                                  else "missing_prior_bar")
                        self.gap_log_.append({
                            "meeting_id": meeting.meeting_id, "instrument": inst,
                            "minute": mark.isoformat(), "reason": reason})
                    else:
                        row[col] = change * scale
                bar = spy_by_minute.get(mark)
                raw_volume = bar.volume if bar is not None else None
                row["volume_spy_raw"] = np.nan if raw_volume is None else raw_volume
                row["volume_spy"] = (
                    raw_volume / day_mean_volume
                    if raw_volume is not None and day_mean_volume else np.nan)
                ticks = bar.tick_count if bar is not None else None
                if ticks is None:
                    row["ticks_spy"] = np.nan
                elif self.normalize_ticks:
                    row["ticks_spy"] = (ticks / day_mean_ticks
                                        if day_mean_ticks else np.nan)
                else:
                    row["ticks_spy"] = float(ticks)
                for inst in INSTRUMENTS:
                    d = drifts[inst]
                    row[f"predrift_{inst.lower()}"] = np.nan if d is None else d
                rows.append(row)

        return pd.DataFrame(rows, columns=["meeting_id", "minute", *MARKET_COLUMNS])
