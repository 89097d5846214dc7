"""Text features from press-conference transcripts.

Minute-level language measures are self-normalized: each minute's raw value
is divided by the same measure's average over all chair-speech minutes of the
same conference, so the mean of each emitted ratio over those minutes is 1 by
construction. Only the chair's segments contribute; journalist questions are
ignored.
"""

from __future__ import annotations

import string
import unicodedata
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .facefeat import ceil_to_minute
from .ingest import Lexicon, TranscriptSegment, load_bundled_lexicon

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)

NLP_RATIO_COLUMNS = ("negative_sentiment", "hawkish", "statement_related", "fls_ratio")

NLP_RAW_COLUMNS = ("negative_sentiment_raw", "hawkish_count", "dovish_count",
                   "hawkish_net", "statement_related_count", "fls_count")


def tokenize(text: str) -> List[str]:
    """Lowercase, ASCII-fold, strip punctuation characters, split on whitespace.

    Punctuation is deleted rather than replaced, so contractions collapse
    ("today's" -> "todays") and hyphenated words join ("re-emphasize" ->
    "reemphasize"); the bundled lexicons are stored in the same normal form.
    """
    text = unicodedata.normalize("NFKD", text)
    text = text.encode("ascii", "ignore").decode("ascii")
    return text.lower().translate(_PUNCT_TABLE).split()


def phrase_count(tokens: Sequence[str], phrase: Sequence[str]) -> int:
    """Number of start positions where ``phrase`` occurs as a contiguous run."""
    if not phrase:
        raise ValueError("empty phrase")
    n, m = len(tokens), len(phrase)
    return sum(1 for i in range(n - m + 1) if tuple(tokens[i:i + m]) == tuple(phrase))


class LexiconCounter:
    """Pre-tokenized lexicon matcher.

    ``count`` sums occurrences over all phrases; a token span matching two
    distinct phrases is counted once for each.
    """

    def __init__(self, lexicon: Lexicon):
        self.name = lexicon.name
        self.phrases = []
        for raw in lexicon.phrases:
            toks = tuple(tokenize(raw))
            if not toks:
                raise ValueError(f"lexicon {lexicon.name!r} phrase tokenizes to nothing: {raw!r}")
            self.phrases.append(toks)

    def count(self, text: str) -> int:
        tokens = tokenize(text)
        return sum(phrase_count(tokens, p) for p in self.phrases)


def contributing_segments(
    segments: Sequence[TranscriptSegment], minute: datetime
) -> List[TranscriptSegment]:
    """Segments overlapping the minute window (minute-60s, minute].

    A segment [t_start, t_end) contributes iff t_start <= minute and
    t_end > minute - 60s.
    """
    lo = minute - timedelta(seconds=60)
    return [s for s in segments if s.t_start <= minute and s.t_end > lo]


def minute_span(segments: Sequence[TranscriptSegment]) -> List[datetime]:
    """Minute marks from the first segment's start to the last segment's end."""
    if not segments:
        return []
    first = ceil_to_minute(min(s.t_start for s in segments))
    last = ceil_to_minute(max(s.t_end for s in segments))
    marks = []
    mark = first
    while mark <= last:
        marks.append(mark)
        mark += timedelta(minutes=1)
    return marks


def build_nlp_minutes(
    segments: Sequence[TranscriptSegment],
    hawkish: Lexicon,
    dovish: Lexicon,
    statement_related: Lexicon,
    fls_lexicon: Optional[Lexicon] = None,
) -> pd.DataFrame:
    """Minute rows for one meeting's transcript.

    Raw measures per minute (chair segments only):
      * negative_sentiment_raw — mean segment negative-sentiment score
      * hawkish_count / dovish_count — lexicon phrase occurrences
      * hawkish_net — hawkish_count - dovish_count (signed)
      * statement_related_count — statement-reference phrase occurrences
      * fls_count — forward-looking segments (flag, or flag/lexicon if given)

    Ratio features divide by the measure's mean over chair-speech minutes;
    the hawkish ratio uses max(hawkish_net, 0) on both sides so one-sided
    dovish minutes do not produce negative ratios. Minutes without chair
    speech carry NaN ratios; a zero day-mean makes that ratio NaN everywhere.
    """
    meeting_ids = {s.meeting_id for s in segments}
    if len(meeting_ids) > 1:
        raise ValueError(f"segments span multiple meetings: {sorted(meeting_ids)}")
    hawk = LexiconCounter(hawkish)
    dove = LexiconCounter(dovish)
    stmt = LexiconCounter(statement_related)
    fls = LexiconCounter(fls_lexicon) if fls_lexicon is not None else None

    marks = minute_span(segments)
    rows = []
    for mark in marks:
        here = contributing_segments(segments, mark)
        chair_here = [s for s in here if s.speaker == "chair"]
        row: Dict = {
            "meeting_id": next(iter(meeting_ids)) if meeting_ids else None,
            "minute": mark,
            "chair_speech": bool(chair_here),
            "segments_in_window": len(here),
        }
        if chair_here:
            row["negative_sentiment_raw"] = float(
                np.mean([s.sentiment_negative for s in chair_here]))
            hc = sum(hawk.count(s.text) for s in chair_here)
            dc = sum(dove.count(s.text) for s in chair_here)
            row["hawkish_count"] = hc
            row["dovish_count"] = dc
            row["hawkish_net"] = hc - dc
            row["statement_related_count"] = sum(stmt.count(s.text) for s in chair_here)
            row["fls_count"] = sum(
                1 for s in chair_here
                if s.fls_flag or (fls is not None and fls.count(s.text) > 0))
        else:
            row.update({c: np.nan for c in NLP_RAW_COLUMNS})
        rows.append(row)

    df = pd.DataFrame(rows, columns=["meeting_id", "minute", "chair_speech",
                                     "segments_in_window", *NLP_RAW_COLUMNS])
    speech = df["chair_speech"].to_numpy(dtype=bool)

    def ratio(numer: pd.Series) -> pd.Series:
        day_mean = numer[speech].mean()
        out = pd.Series(np.nan, index=df.index, dtype=float)
        if speech.any() and day_mean and not np.isnan(day_mean):
            out[speech] = numer[speech] / day_mean
        return out

    df["negative_sentiment"] = ratio(df["negative_sentiment_raw"])
    floored = df["hawkish_net"].clip(lower=0)
    df["hawkish"] = ratio(floored)
    df["statement_related"] = ratio(df["statement_related_count"].astype(float))
    df["fls_ratio"] = ratio(df["fls_count"].astype(float))
    return df


class NlpFeatureBuilder(BaseEstimator, TransformerMixin):
    """Transformer facade over :func:`build_nlp_minutes`.

    fit() loads the phrase lists (bundled ones unless overridden); transform()
    accepts segments from any number of meetings and concatenates the
    per-meeting minute tables.
    """

    def __init__(self, hawkish: Optional[Lexicon] = None,
                 dovish: Optional[Lexicon] = None,
                 statement_related: Optional[Lexicon] = None,
                 fls_lexicon: Optional[Lexicon] = None):
        self.hawkish = hawkish
        self.dovish = dovish
        self.statement_related = statement_related
        self.fls_lexicon = fls_lexicon

    def fit(self, X: Sequence[TranscriptSegment] = (), y=None):
        self.hawkish_ = self.hawkish or load_bundled_lexicon("hawkish")
        self.dovish_ = self.dovish or load_bundled_lexicon("dovish")
        self.statement_related_ = self.statement_related or load_bundled_lexicon("statement_related")
        return self

    def transform(self, X: Sequence[TranscriptSegment]) -> pd.DataFrame:
        if not hasattr(self, "hawkish_"):
            raise ValueError("NlpFeatureBuilder must be fitted before transform")
        by_meeting: Dict[str, list] = {}
        for s in X:
            by_meeting.setdefault(s.meeting_id, []).append(s)
        parts = [
            build_nlp_minutes(by_meeting[mid], self.hawkish_, self.dovish_,
                              self.statement_related_, self.fls_lexicon)
            for mid in sorted(by_meeting)
        ]
        if not parts:
            return build_nlp_minutes([], self.hawkish_, self.dovish_,
                                     self.statement_related_, self.fls_lexicon)
        return pd.concat(parts, ignore_index=True)
