"""Facial feature construction.

Per-minute features are trailing 3-minute emotion averages divided by the
chair's lifetime average of the same emotions, so each chair is measured
against their own long-run expressive style:

    negative    = window_avg(angry + fear + disgust) / lifetime_avg(angry + fear + disgust)
    transparent = window_avg(happy + neutral)        / lifetime_avg(happy + neutral)

plus the analogous single-emotion ratios. A value of 1 means "as expressive
as this chair usually is"; the ratios are invariant to rescaling all scores
by a common factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Dict, Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .ingest import EMOTIONS, FrameScore, MeetingMeta

NEGATIVE_EMOTIONS = ("angry", "fear", "disgust")
TRANSPARENT_EMOTIONS = ("happy", "neutral")

FACIAL_COLUMNS = ("negative_facial", "transparent_facial") + tuple(
    f"{e}_facial" for e in EMOTIONS)

DEFAULT_WINDOW = timedelta(minutes=3)
DEFAULT_MIN_FRAMES = 5


def emotion_matrix(frames: Sequence[FrameScore]) -> np.ndarray:
    """Stack frame scores into an (n_frames, 7) array in EMOTIONS order."""
    if not frames:
        return np.empty((0, len(EMOTIONS)))
    for f in frames:
        if not f.face_detected:
            raise ValueError("emotion_matrix requires face_detected frames only")
    return np.array([[getattr(f, e) for e in EMOTIONS] for f in frames], dtype=float)


def chair_lifetime_baseline(frames: Sequence[FrameScore]) -> np.ndarray:
    """Mean score per emotion over every kept frame of one chair's tenure."""
    mat = emotion_matrix(frames)
    if mat.shape[0] == 0:
        raise ValueError("cannot compute a baseline from zero frames")
    return mat.mean(axis=0)


def rolling_emotion_average(
    frames: Sequence[FrameScore],
    at: datetime,
    window: timedelta = DEFAULT_WINDOW,
) -> tuple[Optional[np.ndarray], int]:
    """Mean emotion vector over frames with t in (at - window, at].

    The window is trailing and right-closed: the frame exactly at ``at``
    counts, the frame exactly at ``at - window`` does not. Returns
    (mean vector or None, frame count).
    """
    lo = at - window
    rows = [f for f in frames if lo < f.t <= at]
    if not rows:
        return None, 0
    return emotion_matrix(rows).mean(axis=0), len(rows)


def _group_ratio(window_avg: np.ndarray, baseline: np.ndarray,
                 emotions: Sequence[str]) -> float:
    idx = [EMOTIONS.index(e) for e in emotions]
    den = float(np.sum(baseline[list(idx)]))
    if den <= 0.0:
        raise ValueError(f"lifetime average of {'+'.join(emotions)} is zero; ratio undefined")
    num = float(np.sum(window_avg[list(idx)]))
    return num / den


def negative_facial(window_avg: np.ndarray, baseline: np.ndarray) -> float:
    """(angry+fear+disgust) window average over the chair's lifetime average."""
    return _group_ratio(window_avg, baseline, NEGATIVE_EMOTIONS)


def transparent_facial(window_avg: np.ndarray, baseline: np.ndarray) -> float:
    """(happy+neutral) window average over the chair's lifetime average."""
    return _group_ratio(window_avg, baseline, TRANSPARENT_EMOTIONS)


def single_emotion_ratio(window_avg: np.ndarray, baseline: np.ndarray,
                         emotion: str) -> float:
    if emotion not in EMOTIONS:
        raise ValueError(f"unknown emotion {emotion!r}")
    return _group_ratio(window_avg, baseline, (emotion,))


def ceil_to_minute(dt: datetime) -> datetime:
    floored = dt.replace(second=0, microsecond=0)
    return floored if floored == dt else floored + timedelta(minutes=1)


def minmax_deepfake_deltas(
    original: Sequence[FrameScore],
    swapped: Sequence[FrameScore],
) -> tuple[Dict[str, float], bool]:
    """Per-emotion |mean difference| between a clip and its face-swapped twin,
    min-max rescaled across the seven emotions to [0, 1].

    Returns (deltas, degenerate). When all raw deltas are equal the rescale
    is undefined; every emotion maps to 0.0 and degenerate is True.
    """
    mean_orig = emotion_matrix(original).mean(axis=0) if original else None
    mean_swap = emotion_matrix(swapped).mean(axis=0) if swapped else None
    if mean_orig is None or mean_swap is None:
        raise ValueError("both clips must contain at least one scored frame")
    raw = np.abs(mean_orig - mean_swap)
    lo, hi = float(raw.min()), float(raw.max())
    if hi == lo:
        return {e: 0.0 for e in EMOTIONS}, True
    scaled = (raw - lo) / (hi - lo)
    return {e: float(s) for e, s in zip(EMOTIONS, scaled)}, False


class FacialFeatureBuilder(BaseEstimator, TransformerMixin):
    """fit() learns per-chair lifetime baselines; transform() emits minute rows.

    fit(X, meetings=...) expects chair-filtered frames covering each chair's
    full sample — the baseline denominators. transform(X) walks each meeting's
    minute marks from the first frame's ceil-minute to the last frame's
    ceil-minute and computes the trailing-window ratios at each mark.

    Output columns: meeting_id, minute, frames_in_window, low_support,
    negative_facial, transparent_facial, <emotion>_facial x7. Rows where the
    window is empty carry NaN features. ``low_support`` flags windows with
    fewer than ``min_frames`` frames.
    """

    def __init__(self, window_minutes: float = 3.0, min_frames: int = DEFAULT_MIN_FRAMES):
        self.window_minutes = window_minutes
        self.min_frames = min_frames

    def fit(self, X: Sequence[FrameScore], y=None, *, meetings: Sequence[MeetingMeta]):
        if self.window_minutes <= 0:
            raise ValueError("window_minutes must be positive")
        self.meeting_to_chair_ = {m.meeting_id: m.chair for m in meetings}
        by_chair: Dict[str, list] = {}
        for f in X:
            chair = self.meeting_to_chair_.get(f.meeting_id)
            if chair is None:
                raise ValueError(f"frame references unknown meeting {f.meeting_id!r}")
            by_chair.setdefault(chair, []).append(f)
        self.baselines_ = {chair: chair_lifetime_baseline(fr)
                           for chair, fr in by_chair.items()}
        return self

    def transform(self, X: Sequence[FrameScore]) -> pd.DataFrame:
        if not hasattr(self, "baselines_"):
            raise ValueError("FacialFeatureBuilder must be fitted before transform")
        window = timedelta(minutes=self.window_minutes)
        by_meeting: Dict[str, list] = {}
        for f in X:
            by_meeting.setdefault(f.meeting_id, []).append(f)
        rows = []
        for meeting_id in sorted(by_meeting):
            frames = sorted(by_meeting[meeting_id], key=lambda f: f.t)
            chair = self.meeting_to_chair_.get(meeting_id)
            if chair is None:
                raise ValueError(f"frame references unknown meeting {meeting_id!r}")
            baseline = self.baselines_.get(chair)
            if baseline is None:
                raise ValueError(f"no baseline learned for chair {chair!r}")
            ts = np.array([f.t.timestamp() for f in frames])
            mat = emotion_matrix(frames)
            mark = ceil_to_minute(frames[0].t)
            last = ceil_to_minute(frames[-1].t)
            while mark <= last:
                lo = (mark - window).timestamp()
                start = int(np.searchsorted(ts, lo, side="right"))
                end = int(np.searchsorted(ts, mark.timestamp(), side="right"))
                count = end - start
                row = {
                    "meeting_id": meeting_id,
                    "minute": mark,
                    "frames_in_window": count,
                    "low_support": count < self.min_frames,
                }
                if count == 0:
                    row.update({c: np.nan for c in FACIAL_COLUMNS})
                else:
                    avg = mat[start:end].mean(axis=0)
                    row["negative_facial"] = negative_facial(avg, baseline)
                    row["transparent_facial"] = transparent_facial(avg, baseline)
                    for e in EMOTIONS:
                        row[f"{e}_facial"] = single_emotion_ratio(avg, baseline, e)
                rows.append(row)
                mark += timedelta(minutes=1)
        columns = ["meeting_id", "minute", "frames_in_window", "low_support",
                   *FACIAL_COLUMNS]
        return pd.DataFrame(rows, columns=columns)
