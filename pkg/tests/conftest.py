import json
from datetime import datetime, timedelta, timezone

import pytest

from fomcface import make_corpus

EMOTIONS = ("angry", "disgust", "fear", "happy", "sad", "surprise", "neutral")


def frame_line(meeting_id, t, scores=None, face=True, similarity=0.9, **extra):
    rec = {"meeting_id": meeting_id, "t": t, "face_detected": face}
    if scores is not None:
        rec.update(dict(zip(EMOTIONS, scores)))
    if similarity is not None:
        rec["chair_similarity"] = similarity
    rec.update(extra)
    return json.dumps(rec)


def segment_line(meeting_id, t_start, t_end, text, speaker="chair",
                 neg=0.1, pos=0.2, fls=False):
    return json.dumps({
        "meeting_id": meeting_id, "t_start": t_start, "t_end": t_end,
        "text": text, "speaker": speaker, "sentiment_negative": neg,
        "sentiment_positive": pos, "sentiment_neutral": max(0.0, 1.0 - neg - pos),
        "fls_flag": fls,
    })


def write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# seven scores summing to exactly 100, far from every bound
BALANCED = (0.722, 0.036, 21.992, 0.057, 58.435, 0.021, 18.737)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    make_corpus(out, seed=11, n_meetings=6, minutes=18)
    return out
