"""Representative-meeting selection via principal components.

Each meeting is summarized by its mean emotion vector; meetings are projected
onto the leading principal components (enough to cover a target share of
variance) and the meeting closest to the centroid of the projections is the
chair's representative conference. All tie-breaks are deterministic:
eigenvalues sorted descending, component signs fixed by their largest-
magnitude loading, distance ties resolved to the earliest date.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .facefeat import emotion_matrix
from .ingest import FrameScore, MeetingMeta


@dataclass
class PcaResult:
    mean: np.ndarray                      # (d,)
    components: np.ndarray                # (m, d) rows, unit norm
    explained_variance: np.ndarray        # (m,) descending
    explained_variance_ratio: np.ndarray  # (m,) sums to 1 unless degenerate
    scores: np.ndarray                    # (n, m) centered projections
    degenerate: bool                      # all rows identical — zero variance


def pca(X: np.ndarray, n_components: Optional[int] = None) -> PcaResult:
    """Principal components of the rows of X via the covariance eigenproblem.

    Components are sorted by descending eigenvalue; each component's sign is
    chosen so its largest-|loading| coordinate is positive (argmax of the
    absolute loadings, first index on ties), making the decomposition unique.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-d, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least two observations for principal components")
    m = d if n_components is None else int(n_components)
    if not (1 <= m <= d):
        raise ValueError(f"n_components must be in [1, {d}], got {m}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = (centered.T @ centered) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:m]
    values = np.clip(eigvals[order], 0.0, None)
    comps = eigvecs[:, order].T.copy()
    for i in range(comps.shape[0]):
        pivot = int(np.argmax(np.abs(comps[i])))
        if comps[i, pivot] < 0:
            comps[i] = -comps[i]
    total = float(np.clip(eigvals, 0.0, None).sum())
    degenerate = total <= 0.0
    ratio = values / total if not degenerate else np.zeros_like(values)
    scores = centered @ comps.T
    return PcaResult(mean=mean, components=comps, explained_variance=values,
                     explained_variance_ratio=ratio, scores=scores,
                     degenerate=degenerate)


def components_for_variance(ratio: np.ndarray, target: float) -> int:
    """Smallest component count whose cumulative variance share >= target."""
    if not (0.0 < target <= 1.0):
        raise ValueError(f"variance target must be in (0, 1], got {target}")
    cum = np.cumsum(ratio)
    hits = np.nonzero(cum >= target - 1e-12)[0]
    return int(hits[0]) + 1 if hits.size else len(ratio)


def representative_index(profiles: np.ndarray, variance_target: float = 0.95) -> int:
    """Index of the row nearest the centroid in the reduced component space.

    Ties go to the smallest index, so callers should order rows by date.
    A zero-variance profile set makes every distance zero; index 0 wins.
    """
    result = pca(profiles)
    if result.degenerate:
        return 0
    m = components_for_variance(result.explained_variance_ratio, variance_target)
    reduced = result.scores[:, :m]
    centroid = reduced.mean(axis=0)
    distances = np.linalg.norm(reduced - centroid, axis=1)
    return int(np.argmin(distances))


def meeting_profiles(frames: Sequence[FrameScore]) -> Tuple[List[str], np.ndarray]:
    """Per-meeting mean emotion vectors, meetings sorted by id."""
    by_meeting: Dict[str, list] = {}
    for f in frames:
        by_meeting.setdefault(f.meeting_id, []).append(f)
    ids = sorted(by_meeting)
    if not ids:
        raise ValueError("no frames to profile")
    rows = [emotion_matrix(by_meeting[mid]).mean(axis=0) for mid in ids]
    return ids, np.vstack(rows)


def representative_meeting(
    frames: Sequence[FrameScore],
    meetings: Sequence[MeetingMeta],
    chair: str,
    variance_target: float = 0.95,
) -> str:
    """The chair's conference whose emotion profile sits closest to their norm."""
    chair_meetings = sorted((m for m in meetings if m.chair == chair),
                            key=lambda m: (m.date, m.meeting_id))
    if not chair_meetings:
        raise ValueError(f"no meetings on record for chair {chair!r}")
    wanted = {m.meeting_id: m.date for m in chair_meetings}
    chair_frames = [f for f in frames if f.meeting_id in wanted]
    ids, profiles = meeting_profiles(chair_frames)
    order = sorted(range(len(ids)), key=lambda i: (wanted[ids[i]], ids[i]))
    ids = [ids[i] for i in order]
    profiles = profiles[order]
    if len(ids) < 2:
        return ids[0]
    return ids[representative_index(profiles, variance_target)]
