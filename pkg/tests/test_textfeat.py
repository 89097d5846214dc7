from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from fomcface import (Lexicon, LexiconCounter, TranscriptSegment,
                      build_nlp_minutes, load_bundled_lexicon, phrase_count,
                      tokenize)
from fomcface.textfeat import NLP_RATIO_COLUMNS, contributing_segments, minute_span

T0 = datetime(2015, 12, 16, 19, 30, tzinfo=timezone.utc)


def seg(start_s, end_s, text, speaker="chair", neg=0.1, fls=False, mid="m1"):
    return TranscriptSegment(
        meeting_id=mid, t_start=T0 + timedelta(seconds=start_s),
        t_end=T0 + timedelta(seconds=end_s), text=text, speaker=speaker,
        sentiment_negative=neg, sentiment_positive=0.2,
        sentiment_neutral=0.7, fls_flag=fls)


# ---------------------------------------------------------------------------
# tokenization and phrase matching
# ---------------------------------------------------------------------------


def test_tokenize_folds_case_punctuation_and_accents():
    assert tokenize("Today's FOMC statement!") == ["todays", "fomc", "statement"]
    assert tokenize("re-emphasize the café rules") == ["reemphasize", "the", "cafe", "rules"]
    assert tokenize("  lots   of	whitespace ") == ["lots", "of", "whitespace"]
    assert tokenize("") == []


def test_phrase_count_counts_every_start_position():
    tokens = "a b a b a".split()
    assert phrase_count(tokens, ["a", "b", "a"]) == 2  # overlapping occurrences
    assert phrase_count(tokens, ["a"]) == 3
    assert phrase_count(tokens, ["b", "a"]) == 2
    assert phrase_count(tokens, ["a", "a"]) == 0
    assert phrase_count([], ["a"]) == 0


def test_phrase_count_rejects_empty_phrase():
    with pytest.raises(ValueError, match="empty"):
        phrase_count(["a"], [])


def brute_force_count(tokens, phrases):
    """Independent oracle: scan every start offset for every phrase."""
    total = 0
    for phrase in phrases:
        p = phrase.split()
        for i in range(len(tokens)):
            if tokens[i:i + len(p)] == p:
                total += 1
    return total


def test_counter_matches_brute_force_on_labeled_sentences():
    lex = Lexicon(name="toy", phrases=(
        "raise rates", "rates", "lower for longer", "inflation", "raise"))
    counter = LexiconCounter(lex)
    rng = np.random.default_rng(41)
    vocabulary = ("we", "will", "raise", "rates", "lower", "for", "longer",
                  "inflation", "stays", "muted", "policy")
    # 50 random sentences, expected counts computed by the oracle
    for _ in range(50):
        words = list(rng.choice(vocabulary, size=int(rng.integers(3, 25))))
        sentence = " ".join(words)
        expected = brute_force_count(tokenize(sentence),
                                     [" ".join(tokenize(p)) for p in lex.phrases])
        assert counter.count(sentence) == expected


def test_every_bundled_phrase_matches_inside_a_carrier_sentence():
    for name in ("hawkish", "dovish", "statement_related"):
        lex = load_bundled_lexicon(name)
        counter = LexiconCounter(lex)
        for phrase in lex.phrases:
            assert counter.count(f"we believe {phrase} going forward") >= 1, \
                f"{name} phrase failed to match: {phrase!r}"


def test_distinct_phrases_can_share_tokens():
    lex = Lexicon(name="toy", phrases=("raise rates", "rates now"))
    counter = LexiconCounter(lex)
    assert counter.count("raise rates now") == 2


# ---------------------------------------------------------------------------
# minute windows
# ---------------------------------------------------------------------------


def test_contribution_window_edges():
    m = T0 + timedelta(minutes=2)
    inside = seg(61, 90, "x")          # ends after m-60s
    ends_at_edge = seg(30, 60, "x")    # t_end == m-60s -> out
    starts_at_mark = seg(120, 150, "x")  # t_start == m -> in
    starts_after = seg(121, 150, "x")  # t_start > m -> out
    got = contributing_segments([inside, ends_at_edge, starts_at_mark, starts_after], m)
    assert inside in got and starts_at_mark in got
    assert ends_at_edge not in got and starts_after not in got


def test_minute_span_covers_transcript():
    segments = [seg(10, 50, "a"), seg(50, 200, "b")]
    marks = minute_span(segments)
    assert marks[0] == T0 + timedelta(minutes=1)
    assert marks[-1] == T0 + timedelta(minutes=4)  # ceil of T0+200s


def lexicons():
    return (load_bundled_lexicon("hawkish"), load_bundled_lexicon("dovish"),
            load_bundled_lexicon("statement_related"))


def test_minute_table_counts_and_ratios():
    hawk, dove, stmt = lexicons()
    h0, h1 = hawk.phrases[0], hawk.phrases[1]
    d0 = dove.phrases[0]
    segments = [
        seg(1, 55, f"we think {h0} and {h1} matter", neg=0.4),
        seg(65, 115, f"whereas {d0} dominates", neg=0.2),
        seg(125, 175, "nothing topical here", neg=0.3),
    ]
    df = build_nlp_minutes(segments, hawk, dove, stmt)
    by_minute = df.set_index("minute")
    m1 = by_minute.loc[T0 + timedelta(minutes=1)]
    m2 = by_minute.loc[T0 + timedelta(minutes=2)]
    m3 = by_minute.loc[T0 + timedelta(minutes=3)]
    assert m1["hawkish_count"] == 2 and m1["dovish_count"] == 0
    assert m2["hawkish_count"] == 0 and m2["dovish_count"] == 1
    assert m2["hawkish_net"] == -1
    assert m3["hawkish_count"] == 0 and m3["dovish_count"] == 0
    # ratio uses max(net, 0): raw values (2, 0, 0), day mean 2/3
    assert m1["hawkish"] == pytest.approx(3.0, abs=1e-12)
    assert m2["hawkish"] == pytest.approx(0.0, abs=1e-12)
    # negative sentiment ratio: raw (0.4, 0.2, 0.3), day mean 0.3
    assert m1["negative_sentiment"] == pytest.approx(0.4 / 0.3, abs=1e-12)
    assert m3["negative_sentiment"] == pytest.approx(1.0, abs=1e-12)


def test_ratio_means_are_one_over_chair_minutes():
    hawk, dove, stmt = lexicons()
    rng = np.random.default_rng(47)
    phrases = hawk.phrases + dove.phrases + stmt.phrases
    segments = []
    cursor = 0
    for i in range(40):
        length = int(rng.integers(20, 60))
        text_bits = ["we", "see", "it"]
        for _ in range(int(rng.integers(0, 4))):
            text_bits.append(phrases[int(rng.integers(0, len(phrases)))])
        segments.append(seg(cursor, cursor + length, " ".join(text_bits),
                            speaker="chair" if i % 3 else "journalist",
                            neg=float(rng.uniform(0.05, 0.9)),
                            fls=bool(rng.random() < 0.3)))
        cursor += length
    df = build_nlp_minutes(segments, hawk, dove, stmt)
    speech = df["chair_speech"]
    assert speech.any()
    for col in NLP_RATIO_COLUMNS:
        values = df.loc[speech, col]
        if values.notna().all():
            assert abs(values.mean() - 1.0) < 1e-12, col


def test_journalist_segments_never_contribute():
    hawk, dove, stmt = lexicons()
    h0 = hawk.phrases[0]
    segments = [
        seg(0, 50, f"asking about {h0} twice, {h0}", speaker="journalist", neg=0.9),
        seg(55, 115, "the chair replies blandly", neg=0.2),
    ]
    df = build_nlp_minutes(segments, hawk, dove, stmt)
    first = df.iloc[0]
    assert first["chair_speech"] == False  # noqa: E712  (journalist-only minute)
    assert np.isnan(first["negative_sentiment_raw"])
    assert df["hawkish_count"].fillna(0).sum() == 0


def test_minutes_without_chair_speech_carry_nan_ratios():
    hawk, dove, stmt = lexicons()
    segments = [seg(0, 50, "hello"), seg(240, 290, "again")]
    df = build_nlp_minutes(segments, hawk, dove, stmt)
    gap = df[~df["chair_speech"]]
    assert len(gap) > 0
    for col in NLP_RATIO_COLUMNS:
        assert gap[col].isna().all()


def test_fls_flag_and_lexicon_fallback():
    hawk, dove, stmt = lexicons()
    fls_lex = Lexicon(name="fls", phrases=("will continue", "expect"))
    segments = [
        seg(1, 50, "we will continue purchases"),            # lexicon match
        seg(65, 115, "rates stay here", fls=True),           # explicit flag
        seg(125, 175, "nothing forward looking"),
    ]
    df = build_nlp_minutes(segments, hawk, dove, stmt, fls_lexicon=fls_lex)
    assert list(df["fls_count"][:3]) == [1, 1, 0]
    no_fallback = build_nlp_minutes(segments, hawk, dove, stmt)
    assert list(no_fallback["fls_count"][:3]) == [0, 1, 0]


def test_mixed_meetings_rejected():
    hawk, dove, stmt = lexicons()
    segments = [seg(0, 50, "a"), seg(60, 100, "b", mid="m2")]
    with pytest.raises(ValueError, match="multiple meetings"):
        build_nlp_minutes(segments, hawk, dove, stmt)
