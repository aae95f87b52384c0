import json
import math

import pytest

import iaffect


def test_auc_counts_ties_as_half():
    assert iaffect.auc([0.1, 0.4, 0.35, 0.8], [False, False, True, True]) == 0.75
    assert iaffect.auc([0.5, 0.5], [True, False]) == 0.5


def test_single_class_auc_raises():
    with pytest.raises(iaffect.Error):
        iaffect.auc([0.1, 0.2], [True, True])


def test_welch_matches_closed_form():
    a = [1.0, 2.0, 3.0, 4.0]
    b = [2.0, 4.0, 6.0, 8.0, 10.0]
    t, df = iaffect.welch_t(a, b)
    va, vb = 5.0 / 3.0, 10.0
    qa, qb = va / 4, vb / 5
    assert t == pytest.approx((2.5 - 6.0) / math.sqrt(qa + qb), rel=1e-12)
    assert df == pytest.approx((qa + qb) ** 2 / (qa**2 / 3 + qb**2 / 4), rel=1e-12)
    assert iaffect.t_sf_two_sided(0.0, 5.0) == pytest.approx(1.0)


def test_synth_session_is_seeded():
    a = iaffect.synth_session(seed=3, infant_index=1, session_s=30.0)
    b = iaffect.synth_session(seed=3, infant_index=1, session_s=30.0)
    assert a == b
    assert len(a["bin_states"]) == 120
    assert set(a["bin_states"]) <= {"alert", "fussy"}


def test_run_synth_train_and_inspect(tmp_path):
    config = {
        "seed": 5,
        "out": "data",
        "manifest": "data/manifest.json",
        "folds": 3,
        "window": {"long_face_s": 4, "long_body_s": 2, "max_long_s": 8},
        "synth": {"n_infants": 5, "session_s": 60, "dwell_alert_s": 10, "dwell_fussy_s": 5},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config))
    assert "train" in iaffect.commands

    result = iaffect.run("synth", str(path))
    assert result["code"] == 0, result["error"]
    sessions = iaffect.load_sessions(str(tmp_path / "data" / "manifest.json"))
    assert len(sessions) == 5
    assert all(s["bins"] == 240 for s in sessions)

    result = iaffect.run("train", str(path), jobs=1)
    assert result["code"] == 0, result["error"]
    info = iaffect.model_info(str(tmp_path / "data" / "model_joint.iafm"))
    assert info["groups"][0] == "face_distances"
    assert info["hidden"] == 16


def test_run_reports_errors(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"manifest": "missing.json"}))
    result = iaffect.run("evaluate", str(path))
    assert result["code"] == 1
    assert result["error"].startswith("error: ")
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(iaffect.Error):
        iaffect.run("evaluate", str(path))
