"""Deterministic synthetic data generators.

Two generators back the test suite and the demo workflow:

* :func:`make_corpus` writes a complete, internally consistent input corpus
  (frame scores, transcript, minute bars, meeting metadata) so the full
  pipeline can run without any proprietary data.
* :func:`make_planted_panel` draws a ready-made analysis panel whose
  dependent variable embeds a known facial-expression coefficient with
  meeting-level noise, for recovery checks of the regression stack.

Everything is driven by a single integer seed; the same seed always yields
byte-identical files.
"""

from __future__ import annotations

import json
import math
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
from zoneinfo import ZoneInfo

import numpy as np
import pandas as pd

from .ingest import CHAIRS, EMOTIONS, INSTRUMENTS, load_bundled_lexicon
from .panel import DEFAULT_INTERACTIONS, cfquart, interactions

ET = ZoneInfo("US/Eastern")

# baseline emotion mixes (percent, sum 100) — each chair gets a distinct style
_CHAIR_MIX = {
    "Bernanke": np.array([4.0, 1.0, 10.0, 14.0, 28.0, 1.0, 42.0]),
    "Yellen":   np.array([6.0, 2.0, 16.0, 6.0, 30.0, 2.0, 38.0]),
    "Powell":   np.array([2.0, 0.5, 4.0, 6.0, 12.0, 0.5, 75.0]),
}

_FILLER = ("we", "will", "continue", "to", "monitor", "incoming", "data",
           "and", "assess", "the", "outlook", "for", "activity", "prices",
           "as", "committee", "judges", "appropriate", "path", "of", "policy")


def _meeting_dates(n: int, start: date = date(2011, 4, 27)) -> List[date]:
    step = timedelta(days=49)
    return [start + i * step for i in range(n)]


def _scores_row(rng: np.random.Generator, mix: np.ndarray) -> np.ndarray:
    """A random positive 7-vector near ``mix`` rescaled to sum exactly 100."""
    jitter = rng.gamma(shape=4.0, scale=0.25, size=len(mix))
    raw = np.maximum(mix * jitter, 1e-3)
    return raw * (100.0 / raw.sum())


def _sentence(rng: np.random.Generator, phrases: Sequence[str]) -> str:
    words = list(rng.choice(_FILLER, size=rng.integers(6, 14)))
    if phrases and rng.random() < 0.55:
        phrase = phrases[int(rng.integers(0, len(phrases)))]
        pos = int(rng.integers(0, len(words) + 1))
        words[pos:pos] = phrase.split()
    return " ".join(words)


def make_corpus(out_dir, seed: int = 0, n_meetings: int = 6,
                minutes: int = 35) -> Dict[str, Path]:
    """Write the four canonical input files; returns {name: path}.

    Timestamps are written as naive local times under a ``#tz=US/Eastern``
    header, exercising the parsers' timezone normalization.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    hawk = load_bundled_lexicon("hawkish").phrases
    dove = load_bundled_lexicon("dovish").phrases
    stmt = load_bundled_lexicon("statement_related").phrases

    dates = _meeting_dates(n_meetings)
    chairs = [CHAIRS[i * len(CHAIRS) // n_meetings] for i in range(n_meetings)]
    counts: Dict[str, int] = {}
    meetings = []
    for day, chair in zip(dates, chairs):
        counts[chair] = counts.get(chair, 0) + 1
        meetings.append({
            "meeting_id": day.isoformat(),
            "date": day,
            "chair": chair,
            "conference_count": counts[chair],
            "start_local": datetime(day.year, day.month, day.day, 14, 30),
            "release_local": datetime(day.year, day.month, day.day, 14, 0),
        })

    frame_lines = ["#tz=US/Eastern"]
    transcript_lines = ["#tz=US/Eastern"]
    for m in meetings:
        mix = _CHAIR_MIX[m["chair"]]
        start = m["start_local"]
        n_frames = minutes * 30  # one frame every 2 seconds
        for i in range(n_frames):
            t = start + timedelta(seconds=2 * i)
            rec: Dict = {"meeting_id": m["meeting_id"],
                         "t": t.isoformat(), "face_detected": True}
            u = rng.random()
            if u < 0.06:
                rec["face_detected"] = False
            else:
                scores = _scores_row(rng, mix)
                rec.update({e: round(float(s), 3) for e, s in zip(EMOTIONS, scores)})
                total = sum(rec[e] for e in EMOTIONS)
                rec["neutral"] = round(rec["neutral"] + (100.0 - total), 3)
                v = rng.random()
                if v < 0.02:
                    pass  # similarity missing — embedding failed
                elif v < 0.07:
                    rec["chair_similarity"] = round(float(rng.uniform(0.1, 0.45)), 4)
                else:
                    rec["chair_similarity"] = round(float(rng.uniform(0.55, 0.98)), 4)
            frame_lines.append(json.dumps(rec))

        cursor = start
        end = start + timedelta(minutes=minutes)
        speaker_chair = True
        while cursor < end:
            dur = timedelta(seconds=int(rng.integers(8, 35)))
            seg_end = min(cursor + dur, end)
            if speaker_chair:
                pool = hawk if rng.random() < 0.5 else dove
                if rng.random() < 0.25:
                    pool = stmt
                text = _sentence(rng, pool)
                speaker = "chair"
            else:
                text = _sentence(rng, ())
                speaker = "journalist"
            neg = float(np.clip(rng.beta(2.0, 6.0), 0.0, 1.0))
            pos = float(np.clip(rng.beta(2.0, 6.0), 0.0, 1.0 - neg))
            transcript_lines.append(json.dumps({
                "meeting_id": m["meeting_id"],
                "t_start": cursor.isoformat(),
                "t_end": seg_end.isoformat(),
                "text": text,
                "speaker": speaker,
                "sentiment_negative": round(neg, 4),
                "sentiment_positive": round(pos, 4),
                "sentiment_neutral": round(1.0 - neg - pos, 4),
                "fls_flag": bool(speaker == "chair" and rng.random() < 0.2),
            }))
            cursor = seg_end
            speaker_chair = not speaker_chair or rng.random() < 0.3

    bar_lines = ["#tz=US/Eastern", "instrument,t,price,volume,tick_count"]
    levels = {"SPY": 210.0, "VIX": 16.0, "EUR": 1.10, "JPY": 110.0}
    for m in meetings:
        first = m["release_local"] - timedelta(minutes=5)
        last = m["start_local"] + timedelta(minutes=minutes + 5)
        n_bars = int((last - first).total_seconds() // 60) + 1
        for inst in INSTRUMENTS:
            price = levels[inst] * float(rng.uniform(0.9, 1.1))
            for i in range(n_bars):
                t = first + timedelta(minutes=i)
                price *= math.exp(float(rng.normal(0.0, 2.5e-4)))
                if inst == "SPY":
                    volume = float(np.round(rng.lognormal(10.0, 0.4), 1))
                    ticks = int(rng.poisson(240))
                    bar_lines.append(f"SPY,{t.isoformat()},{price:.4f},{volume},{ticks}")
                else:
                    bar_lines.append(f"{inst},{t.isoformat()},{price:.6f},,")

    meeting_lines = ["#tz=US/Eastern",
                     "meeting_id,date,chair,conference_count,press_conf_start,"
                     "statement_release,has_intro_statement,testimony_dates,"
                     "ffr_change,mpu,public_interest"]
    for m in meetings:
        testimony = []
        if rng.random() < 0.5:
            testimony.append((m["date"] - timedelta(days=int(rng.integers(1, 30)))).isoformat())
        if rng.random() < 0.25:
            testimony.append((m["date"] - timedelta(days=int(rng.integers(31, 90)))).isoformat())
        ffr = float(rng.choice([-0.25, 0.0, 0.0, 0.25]))
        meeting_lines.append(",".join([
            m["meeting_id"], m["date"].isoformat(), m["chair"],
            str(m["conference_count"]), "14:30", "14:00", "true",
            ";".join(sorted(testimony)),
            f"{ffr}", f"{float(rng.uniform(50, 150)):.2f}",
            f"{float(rng.uniform(0, 100)):.2f}",
        ]))

    paths = {
        "frame_scores": out / "frame_scores.jsonl",
        "transcript": out / "transcript.jsonl",
        "bars": out / "bars.csv",
        "meetings": out / "meetings.csv",
    }
    paths["frame_scores"].write_text("\n".join(frame_lines) + "\n", encoding="utf-8")
    paths["transcript"].write_text("\n".join(transcript_lines) + "\n", encoding="utf-8")
    paths["bars"].write_text("\n".join(bar_lines) + "\n", encoding="utf-8")
    paths["meetings"].write_text("\n".join(meeting_lines) + "\n", encoding="utf-8")
    return paths


# ---------------------------------------------------------------------------
# planted-coefficient panel
# ---------------------------------------------------------------------------

PLANTED_BETA = -0.007

# target sample moments for the planted draws
_MOMENTS = {
    "negative_facial_lag": (1.206, 0.481),
    "transparent_facial_lag": (1.786, 0.849),
    "negative_sentiment": (0.700, 0.726),
}

_CHAIR_MEETINGS = (("Bernanke", 12), ("Yellen", 16), ("Powell", 18))


def _gamma_with_moments(rng: np.random.Generator, mean: float, sd: float,
                        size: int) -> np.ndarray:
    shape = (mean / sd) ** 2
    scale = sd ** 2 / mean
    return rng.gamma(shape=shape, scale=scale, size=size)


def make_planted_panel(seed: int = 0, minutes_per_meeting: int = 60,
                       beta: float = PLANTED_BETA,
                       meeting_sd: float = 0.012,
                       noise_sd: float = 0.035) -> pd.DataFrame:
    """A 46-meeting minute panel with a known lagged-facial coefficient.

    The dependent |1-min % change| equals
        intercept + beta * negative_facial_lag + meeting effect + noise
    with the intercept chosen so the unconditional mean is 0.039. Regressor
    draws match the observed moments of the corresponding features; all other
    covariates carry zero true effect.
    """
    rng = np.random.default_rng(seed)
    rows = []
    dates = _meeting_dates(46)
    i_date = 0
    for chair, total in _CHAIR_MEETINGS:
        for count in range(1, total + 1):
            day = dates[i_date]
            i_date += 1
            rows.append({
                "meeting_id": day.isoformat(),
                "chair": chair,
                "date": day.isoformat(),
                "conference_count": count,
                "cfquart": cfquart(count, total),
                "congre30": int(rng.random() < 0.35),
                "congre10": int(rng.random() < 0.15),
                "ffr_change": float(rng.choice([-0.25, 0.0, 0.0, 0.25])),
                "mpu": float(rng.uniform(50, 150)),
                "public_interest": float(rng.uniform(0, 100)),
                "predrift_spy": float(rng.normal(0.0, 0.15)),
                "meeting_effect": float(rng.normal(0.0, meeting_sd)),
            })
    meetings = pd.DataFrame(rows)

    n = len(meetings) * minutes_per_meeting
    panel = meetings.loc[meetings.index.repeat(minutes_per_meeting)].reset_index(drop=True)
    panel["minute"] = np.tile(np.arange(1, minutes_per_meeting + 1), len(meetings))

    mu, sd = _MOMENTS["negative_facial_lag"]
    panel["negative_facial_lag"] = np.clip(rng.normal(mu, sd, size=n), 0.0, None)
    mu, sd = _MOMENTS["transparent_facial_lag"]
    panel["transparent_facial_lag"] = np.clip(rng.normal(mu, sd, size=n), 0.0, None)
    mu, sd = _MOMENTS["negative_sentiment"]
    panel["negative_sentiment"] = _gamma_with_moments(rng, mu, sd, n)
    panel["statement_related"] = _gamma_with_moments(rng, 1.0, 1.0, n)
    panel["fls_ratio"] = _gamma_with_moments(rng, 1.0, 1.0, n)
    panel["hawkish"] = _gamma_with_moments(rng, 1.0, 1.2, n)
    panel["volume_spy"] = _gamma_with_moments(rng, 1.0, 0.5, n)
    panel["ticks_spy"] = rng.poisson(240, size=n).astype(float)

    intercept = 0.039 - beta * _MOMENTS["negative_facial_lag"][0]
    noise = rng.normal(0.0, noise_sd, size=n)
    panel["abs_pct_spy"] = (intercept + beta * panel["negative_facial_lag"]
                            + panel["meeting_effect"] + noise)
    for inst in ("vix", "eur", "jpy"):
        panel[f"abs_pct_{inst}"] = np.abs(rng.normal(0.0, 0.05, size=n))
        panel[f"predrift_{inst}"] = panel["predrift_spy"] * float(rng.uniform(0.3, 0.9))

    panel = panel.drop(columns=["meeting_effect"])
    return interactions(panel, DEFAULT_INTERACTIONS)
