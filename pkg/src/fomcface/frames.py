"""Chair-identity filtering of video frames.

Frames carry a precomputed cosine similarity between the detected face's
embedding and the chair's reference embedding. Only frames with a detected
face and similarity at or above the threshold enter the facial-feature stage.
The filter reports how many frames each rule dropped so that
kept + dropped == total always holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .ingest import FrameScore

DEFAULT_SIMILARITY_THRESHOLD = 0.5


def cosine_similarity(u, v) -> float:
    """Cosine similarity of two equal-length vectors.

    Raises ValueError on a length mismatch or a zero vector — a zero
    embedding means the upstream encoder failed, and silently returning 0
    would let such frames through the threshold comparison.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape:
        raise ValueError(f"vectors must be 1-d and equal length, got {u.shape} and {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity undefined for zero vectors")
    return float(np.dot(u, v) / (nu * nv))


@dataclass(frozen=True)
class FilterReport:
    """Accounting of one filter pass. kept + sum(drops) == total."""

    total: int
    kept: int
    dropped_no_face: int
    dropped_missing_similarity: int
    dropped_low_similarity: int

    def __post_init__(self):
        drops = (self.dropped_no_face + self.dropped_missing_similarity
                 + self.dropped_low_similarity)
        if self.kept + drops != self.total:
            raise ValueError("filter report does not balance")


def filter_chair_frames(
    frames: Sequence[FrameScore],
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
    require_face: bool = True,
) -> tuple[list[FrameScore], FilterReport]:
    """Keep frames showing the chair; return (kept, report).

    A frame is kept iff a face was detected, a similarity is present, and the
    similarity is >= the threshold (frames exactly at the threshold stay).
    Drop reasons are assigned with precedence no_face > missing_similarity >
    low_similarity so every dropped frame is counted exactly once.
    """
    kept: list[FrameScore] = []
    no_face = missing = low = 0
    for frame in frames:
        if require_face and not frame.face_detected:
            no_face += 1
            continue
        if frame.chair_similarity is None:
            missing += 1
            continue
        if frame.chair_similarity < similarity_threshold:
            low += 1
            continue
        kept.append(frame)
    report = FilterReport(
        total=len(frames),
        kept=len(kept),
        dropped_no_face=no_face,
        dropped_missing_similarity=missing,
        dropped_low_similarity=low,
    )
    return kept, report


class ChairFrameFilter(BaseEstimator, TransformerMixin):
    """Transformer wrapper around :func:`filter_chair_frames`.

    Stateless — ``fit`` only validates parameters. After ``transform`` the
    accounting of the last pass is available as ``report_``.
    """

    def __init__(self, similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
                 require_face: bool = True):
        self.similarity_threshold = similarity_threshold
        self.require_face = require_face

    def fit(self, X: Sequence[FrameScore], y=None):
        if not (0.0 <= self.similarity_threshold <= 1.0):
            raise ValueError(f"similarity_threshold must be in [0,1], "
                             f"got {self.similarity_threshold}")
        return self

    def transform(self, X: Sequence[FrameScore]) -> list[FrameScore]:
        self.fit(X)
        kept, report = filter_chair_frames(
            X, similarity_threshold=self.similarity_threshold,
            require_face=self.require_face)
        self.report_ = report
        return kept
