"""Facial-expression, speech, and market-reaction pipeline for central-bank
press conferences: parse scored video frames and transcripts, build
per-minute features normalized against each chair's own baseline, join them
with minute bars, and estimate fixed-effects regressions with robust errors.
"""

from .econ import (FixedEffectsOLS, RegressionResult, RegressionSpec,
                   classical_vcov, cluster_robust_vcov, hc_robust_vcov,
                   load_table_spec, ols_fit, render_table, run_regression,
                   run_table, significance_stars, within_transform)
from .facefeat import (FacialFeatureBuilder, chair_lifetime_baseline,
                       minmax_deepfake_deltas, negative_facial,
                       rolling_emotion_average, single_emotion_ratio,
                       transparent_facial)
from .frames import ChairFrameFilter, FilterReport, cosine_similarity, filter_chair_frames
from .ingest import (CHAIRS, EMOTIONS, INSTRUMENTS, FrameScore, IngestError,
                     Lexicon, MeetingMeta, MinuteBar, ParseError,
                     TranscriptSegment, ValidationError, load_bundled_lexicon,
                     parse_frame_scores, parse_lexicon, parse_meeting_meta,
                     parse_minute_bars, parse_transcript)
from .market import MarketFeatureBuilder, abs_pct_change_1min, pct_change, predrift
from .panel import build_panel, cfquart, column_catalog, congress_flag, interactions
from .select import (components_for_variance, meeting_profiles, pca,
                     representative_index, representative_meeting)
from .synth import make_corpus, make_planted_panel
from .textfeat import LexiconCounter, NlpFeatureBuilder, build_nlp_minutes, phrase_count, tokenize

__version__ = "0.1.0"

__all__ = [
    "CHAIRS", "EMOTIONS", "INSTRUMENTS",
    "ChairFrameFilter", "FacialFeatureBuilder", "FilterReport",
    "FixedEffectsOLS", "FrameScore", "IngestError", "Lexicon",
    "LexiconCounter", "MarketFeatureBuilder", "MeetingMeta", "MinuteBar",
    "NlpFeatureBuilder", "ParseError", "RegressionResult", "RegressionSpec",
    "TranscriptSegment", "ValidationError",
    "abs_pct_change_1min", "build_nlp_minutes", "build_panel", "cfquart",
    "chair_lifetime_baseline", "classical_vcov", "cluster_robust_vcov",
    "column_catalog", "components_for_variance", "congress_flag",
    "cosine_similarity", "filter_chair_frames", "hc_robust_vcov",
    "interactions", "load_bundled_lexicon", "load_table_spec", "make_corpus",
    "make_planted_panel", "meeting_profiles", "minmax_deepfake_deltas",
    "negative_facial",
    "ols_fit", "parse_frame_scores", "parse_lexicon", "parse_meeting_meta",
    "parse_minute_bars", "parse_transcript", "pca", "pct_change", "predrift",
    "render_table", "representative_index", "representative_meeting",
    "rolling_emotion_average", "run_regression", "run_table",
    "significance_stars", "single_emotion_ratio", "tokenize",
    "transparent_facial", "within_transform",
]
