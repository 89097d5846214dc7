from datetime import date, datetime, timedelta, timezone

import numpy as np
import pandas as pd
import pytest

from fomcface import MeetingMeta, build_panel, cfquart, congress_flag, interactions
from fomcface.facefeat import FACIAL_COLUMNS
from fomcface.panel import PanelAudit, add_lags, column_catalog, display_label
from fomcface.textfeat import NLP_RATIO_COLUMNS, NLP_RAW_COLUMNS

T0 = datetime(2015, 12, 16, 19, 30, tzinfo=timezone.utc)


def minute(i):
    return T0 + timedelta(minutes=i)


def facial_frame(mid, minutes, values, empty=()):
    rows = []
    for i, v in zip(minutes, values):
        row = {"meeting_id": mid, "minute": minute(i),
               "frames_in_window": 0 if i in empty else 30,
               "low_support": i in empty}
        for c in FACIAL_COLUMNS:
            row[c] = np.nan if i in empty else v
        rows.append(row)
    return pd.DataFrame(rows)


def nlp_frame(mid, minutes):
    rows = []
    for i in minutes:
        row = {"meeting_id": mid, "minute": minute(i), "chair_speech": True,
               "segments_in_window": 2}
        for c in NLP_RAW_COLUMNS + NLP_RATIO_COLUMNS:
            row[c] = 1.0
        rows.append(row)
    return pd.DataFrame(rows)


def market_frame(mid, minutes):
    return pd.DataFrame([{
        "meeting_id": mid, "minute": minute(i),
        "abs_pct_spy": 0.05, "abs_pct_vix": 0.5, "abs_pct_eur": 0.01,
        "abs_pct_jpy": 0.01, "volume_spy": 1.0, "volume_spy_raw": 1000.0,
        "ticks_spy": 200.0, "predrift_spy": 0.1, "predrift_vix": -0.5,
        "predrift_eur": 0.0, "predrift_jpy": 0.0,
    } for i in minutes])


def meeting(mid="m1", chair="Yellen", count=7, testimony=()):
    return MeetingMeta(meeting_id=mid, date=date(2015, 12, 16), chair=chair,
                       conference_count=count,
                       press_conf_start=T0,
                       statement_release=T0 - timedelta(minutes=30),
                       testimony_dates=tuple(testimony))


def test_cfquart_values():
    assert cfquart(7, 16) == 2          # ceil(28/16)
    assert cfquart(1, 16) == 1
    assert cfquart(4, 16) == 1
    assert cfquart(5, 16) == 2
    assert cfquart(16, 16) == 4
    assert cfquart(1, 1) == 4
    assert cfquart(12, 12) == 4


def test_cfquart_rejects_impossible_counts():
    with pytest.raises(ValueError, match="exceeds"):
        cfquart(17, 16)
    with pytest.raises(ValueError, match="positive"):
        cfquart(0, 16)


def test_congress_flag_window_edges():
    d = date(2015, 12, 16)
    assert congress_flag(d, [date(2015, 12, 15)], 30)      # 1 day before
    assert congress_flag(d, [date(2015, 11, 16)], 30)      # exactly 30 days
    assert not congress_flag(d, [date(2015, 11, 15)], 30)  # 31 days
    assert not congress_flag(d, [d], 30)                   # meeting day excluded
    assert not congress_flag(d, [date(2015, 12, 20)], 30)  # future
    assert congress_flag(d, [date(2015, 12, 7)], 10)
    assert not congress_flag(d, [date(2015, 12, 5)], 10)   # 11 days


def test_add_lags_uses_previous_minute_row():
    facial = facial_frame("m1", [1, 2, 4], [1.1, 1.2, 1.4])
    lagged = add_lags(facial)
    assert np.isnan(lagged["negative_facial_lag"].iloc[0])       # no minute 0
    assert lagged["negative_facial_lag"].iloc[1] == 1.1
    assert np.isnan(lagged["negative_facial_lag"].iloc[2])       # minute 3 absent


def test_interactions_names_and_nan_propagation():
    df = pd.DataFrame({"a": [1.0, np.nan], "b": [2.0, 3.0]})
    out = interactions(df, [("a", "b")])
    assert "a_x_b" in out.columns
    assert out["a_x_b"].iloc[0] == 2.0
    assert np.isnan(out["a_x_b"].iloc[1])
    with pytest.raises(KeyError, match="missing_col"):
        interactions(df, [("a", "missing_col")])


def assemble(testimony=(), empty=()):
    facial = facial_frame("m1", [0, 1, 2, 3], [1.0, 1.1, 1.2, 1.3], empty=empty)
    nlp = nlp_frame("m1", [0, 1, 2, 3])
    market = market_frame("m1", [1, 2, 3])
    return build_panel(facial, nlp, market, [meeting(testimony=testimony)],
                       frame_counts=(200, 150))


def test_build_panel_joins_and_lags():
    panel, audit = assemble()
    assert len(panel) == 3
    assert audit.as_dict() == {"frames_total": 200, "frames_kept": 150,
                               "facial_minute_rows": 4, "facial_nonempty": 4,
                               "panel_rows": 3}
    # lag of minute 1 row comes from the (market-less) minute 0 facial row
    assert panel["negative_facial_lag"].iloc[0] == 1.0
    assert panel["negative_facial_lag"].iloc[2] == 1.2


def test_build_panel_drops_empty_windows_before_lagging():
    panel, audit = assemble(empty=(2,))
    stages = audit.as_dict()
    assert stages["facial_nonempty"] == 3
    # minute-3 row survives (market join) but its lag source was dropped
    row3 = panel[panel["minute"] == minute(3)].iloc[0]
    assert np.isnan(row3["negative_facial_lag"])
    assert minute(2) not in set(panel["minute"])


def test_build_panel_meeting_level_columns():
    panel, _ = assemble(testimony=[date(2015, 12, 1)])
    assert set(panel["chair"]) == {"Yellen"}
    assert set(panel["conference_count"]) == {7}
    assert set(panel["cfquart"]) == {4}     # single meeting -> total 7 -> ceil(4) = 4
    assert set(panel["congre30"]) == {1}
    assert set(panel["congre10"]) == {0}
    assert "negative_facial_lag_x_negative_sentiment" in panel.columns
    assert "negative_facial_lag_x_congre30" in panel.columns


def test_build_panel_rejects_unknown_meeting():
    facial = facial_frame("ghost", [1], [1.0])
    nlp = nlp_frame("ghost", [1])
    market = market_frame("ghost", [1])
    with pytest.raises(ValueError, match="missing from"):
        build_panel(facial, nlp, market, [meeting()])


def test_build_panel_rejects_impossible_frame_counts():
    facial = facial_frame("m1", [1], [1.0])
    with pytest.raises(ValueError, match="exceed"):
        build_panel(facial, nlp_frame("m1", [1]), market_frame("m1", [1]),
                    [meeting()], frame_counts=(10, 20))


def test_nlp_gaps_are_kept_as_nan_rows():
    facial = facial_frame("m1", [1, 2], [1.0, 1.1])
    nlp = nlp_frame("m1", [1])  # minute 2 has no language row at all
    market = market_frame("m1", [1, 2])
    panel, _ = build_panel(facial, nlp, market, [meeting()])
    assert len(panel) == 2
    assert np.isnan(panel["negative_sentiment"].iloc[1])


def test_column_catalog_covers_every_column():
    panel, _ = assemble()
    catalog = column_catalog(panel)
    assert len(catalog) == len(panel.columns)
    by_name = {c["name"]: c for c in catalog}
    assert by_name["negative_facial_lag"]["display_label"] == "Negative facial ratio (t-1)"
    assert by_name["negative_facial_lag"]["stage"] == "facial"
    assert by_name["abs_pct_spy"]["stage"] == "market"
    assert by_name["cfquart"]["stage"] == "meeting"
    assert all(c["display_label"] for c in catalog)


def test_display_label_composes_interactions():
    got = display_label("negative_facial_lag_x_congre30")
    assert "Negative facial ratio (t-1)" in got
    assert "Testimony within 30 days" in got


def test_audit_stage_monotonicity_enforced():
    facial = facial_frame("m1", [1], [1.0])
    nlp = nlp_frame("m1", [1])
    # market has extra minutes the facial table lacks -> inner join still <= facial
    market = market_frame("m1", [1, 2, 3])
    panel, audit = build_panel(facial, nlp, market, [meeting()])
    counts = [n for _, n in audit.stages]
    assert counts == sorted(counts, reverse=True)
    assert audit.as_dict()["panel_rows"] == 1
