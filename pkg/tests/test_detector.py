"""Dominance inconsistency, regret risk, and suspect items."""

import pytest

from ctxchoice import (
    Catalog,
    ChoiceLog,
    Observation,
    flag_inconsistency,
    pairwise_stats,
    regret_risk,
    suspect_items,
)
from ctxchoice.config import EngineConfig
from ctxchoice.detector import constellation_record, detector_report, flagged_indices
from ctxchoice.errors import ValidationError
from ctxchoice.simulate import DetectorPlant

CAT = Catalog(("P", "Q", "T", "X"))


def _obs(space, chosen, at="2026-01-01T00:00:00", retracted=False):
    return Observation(space=frozenset(space), chosen=chosen, at=at, retracted=retracted)


def _dominance_log(n=10, p="P", q="Q", user="u"):
    log = ChoiceLog(user)
    for i in range(n):
        log.append(_obs({p, q}, p, at=f"2026-01-01T00:00:{i:02d}"))
    return log


class TestPairwiseStats:
    def test_always_p(self):
        stats = pairwise_stats(_dominance_log(10), "P", "Q")
        assert (stats.n_together, stats.share_p) == (10, 1.0)

    def test_neither_chosen_does_not_count(self):
        log = ChoiceLog("u")
        for i in range(5):
            log.append(_obs({"P", "Q", "T"}, "T", at=f"2026-01-01T00:00:{i:02d}"))
        stats = pairwise_stats(log, "P", "Q")
        assert (stats.n_together, stats.share_p) == (0, 0.0)

    def test_partial_share(self):
        log = ChoiceLog("u")
        for i in range(6):
            log.append(_obs({"P", "Q"}, "P", at=f"2026-01-01T00:00:{i:02d}"))
        for i in range(4):
            log.append(_obs({"P", "Q"}, "Q", at=f"2026-01-01T00:01:{i:02d}"))
        stats = pairwise_stats(log, "P", "Q")
        assert (stats.n_together, stats.share_p) == (10, 0.6)

    def test_retracted_excluded(self):
        log = _dominance_log(10)
        log.retract(0)
        assert pairwise_stats(log, "P", "Q").n_together == 9

    def test_same_item_rejected(self):
        with pytest.raises(ValidationError):
            pairwise_stats(_dominance_log(), "P", "P")


class TestFlagInconsistency:
    def test_dominance_violation_flagged(self):
        log = _dominance_log(10)
        flag = flag_inconsistency(log, _obs({"P", "Q", "T"}, "Q"), CAT)
        assert flag is not None
        assert flag.dominant == "P"
        assert flag.chosen == "Q"
        assert flag.stats.n_together == 10
        assert flag.stats.share_p == 1.0

    def test_below_theta_not_flagged(self):
        log = ChoiceLog("u")
        for i in range(6):
            log.append(_obs({"P", "Q"}, "P", at=f"2026-01-01T00:00:{i:02d}"))
        for i in range(4):
            log.append(_obs({"P", "Q"}, "Q", at=f"2026-01-01T00:01:{i:02d}"))
        assert flag_inconsistency(log, _obs({"P", "Q"}, "Q"), CAT, theta=0.9) is None

    def test_insufficient_support_not_flagged(self):
        log = _dominance_log(2)
        assert (
            flag_inconsistency(log, _obs({"P", "Q"}, "Q"), CAT, min_support=5) is None
        )

    def test_consistent_choice_never_flagged(self):
        log = _dominance_log(10)
        assert flag_inconsistency(log, _obs({"P", "Q"}, "P"), CAT) is None

    def test_highest_share_wins_then_catalog_order(self):
        log = ChoiceLog("u")
        t = 0
        for _ in range(10):  # P beats Q 10/10
            log.append(_obs({"P", "Q"}, "P", at=f"2026-01-01T00:{t // 60:02d}:{t % 60:02d}"))
            t += 1
        for _ in range(10):  # T beats Q 10/10 as well
            log.append(_obs({"T", "Q"}, "T", at=f"2026-01-01T00:{t // 60:02d}:{t % 60:02d}"))
            t += 1
        flag = flag_inconsistency(log, _obs({"P", "Q", "T"}, "Q"), CAT)
        assert flag.dominant == "P"  # equal shares, P first in the catalog


class TestRegretRisk:
    def test_smoothed_rate(self):
        log = ChoiceLog("u")
        for i in range(4):
            log.append(
                _obs({"P", "Q"}, "P", at=f"2026-01-01T00:00:{i:02d}", retracted=i < 3)
            )
        assert regret_risk(log, {"P", "Q"}) == pytest.approx(4 / 6)

    def test_empty_log_prior(self):
        assert regret_risk(ChoiceLog("u"), {"P", "Q"}) == 0.5

    def test_pairwise_backoff(self):
        log = ChoiceLog("u")
        # {P,Q,T} never seen exactly, but the {P,Q} pair has retraction history
        for i in range(4):
            log.append(
                _obs({"P", "Q"}, "P", at=f"2026-01-01T00:00:{i:02d}", retracted=True)
            )
        risk = regret_risk(log, {"P", "Q", "T"})
        # pairs: PQ rate 5/6, PT and QT unseen 1/2 each
        assert risk == pytest.approx((5 / 6 + 0.5 + 0.5) / 3)

    def test_monotone_in_retractions(self):
        def risk_with(retracted_count):
            log = ChoiceLog("u")
            for i in range(6):
                log.append(
                    _obs(
                        {"P", "Q"},
                        "P",
                        at=f"2026-01-01T00:00:{i:02d}",
                        retracted=i < retracted_count,
                    )
                )
            return regret_risk(log, {"P", "Q"})

        risks = [risk_with(k) for k in range(7)]
        assert risks == sorted(risks)
        assert all(0 < r < 1 for r in risks)

    def test_retraction_raises_risk_on_reoffer(self):
        log = ChoiceLog("u")
        log.append(_obs({"P", "Q", "T"}, "Q", at="2026-01-01T00:00:00"))
        before = regret_risk(log, {"P", "Q", "T"})
        log.retract(0)
        after = regret_risk(log, {"P", "Q", "T"})
        assert after > before


class TestConstellationRecord:
    def test_counts(self):
        log = ChoiceLog("u")
        for i in range(4):
            log.append(
                _obs({"P", "Q"}, "P", at=f"2026-01-01T00:00:{i:02d}", retracted=i < 3)
            )
        rec = constellation_record(log, {"Q", "P"})
        assert rec.fingerprint == ("P", "Q")
        assert (rec.n_seen, rec.n_retracted) == (4, 3)


def _plant_logs(users=5, repeats=10, violation=True):
    plant = DetectorPlant(
        catalog=CAT,
        users=users,
        dominant="P",
        runner_up="Q",
        dominance_repeats=repeats,
        violation_space=frozenset({"P", "Q", "T"}) if violation else None,
    )
    return plant.build_logs()


class TestSuspectItems:
    def test_planted_suspect_found_and_verified_by_hand(self):
        logs, _ = _plant_logs(users=5)
        reports = suspect_items(logs, CAT, min_users=3, min_lift=2.0)
        assert reports and reports[0].item == "T"
        assert reports[0].n_users == 5

        # independent recomputation of the lift from raw counts
        total_obs = sum(len(log) for log in logs.values())
        flagged_total = 5  # exactly one planted violation per user
        n_with_t = 5  # T appears only in the violation spaces
        f_with_t = 5
        rate_with = (f_with_t + 1) / (n_with_t + 2)
        rate_without = (flagged_total - f_with_t + 1) / (total_obs - n_with_t + 2)
        assert reports[0].lift == pytest.approx(rate_with / rate_without)

    def test_single_user_yields_nothing(self):
        logs, _ = _plant_logs(users=1)
        assert suspect_items(logs, CAT, min_users=3) == []

    def test_item_with_no_lift_excluded(self):
        # X present in every observation, flagged and unflagged alike
        logs = {}
        for u in range(3):
            log = ChoiceLog(f"u{u}")
            t = 0
            for _ in range(10):
                log.append(_obs({"P", "Q", "X"}, "P", at=f"2026-01-01T00:00:{t:02d}"))
                t += 1
            log.append(_obs({"P", "Q", "X"}, "Q", at=f"2026-01-01T00:01:00"))
            logs[f"u{u}"] = log
        reports = suspect_items(logs, CAT, min_users=2, min_lift=2.0)
        assert all(r.item != "X" for r in reports) or not reports

    def test_fewer_users_than_threshold_empty(self):
        logs, _ = _plant_logs(users=2)
        assert suspect_items(logs, CAT, min_users=3) == []


class TestFlaggedIndices:
    def test_prefix_judgement(self):
        # the violation is flagged against history before it, and early
        # observations are never flagged retroactively
        logs, planted = _plant_logs(users=1)
        (log,) = logs.values()
        flagged = flagged_indices(log, CAT)
        assert set(flagged) == set(planted["user1"])
        assert all(why == "inconsistency" for why in flagged.values())

    def test_retraction_counts_as_flagged(self):
        log = _dominance_log(3)
        log.retract(1)
        flagged = flagged_indices(log, CAT)
        assert flagged == {1: "retraction"}


class TestDetectorReport:
    def test_document_shape_and_determinism(self):
        logs, _ = _plant_logs(users=3)
        cfg = EngineConfig(min_users=2)
        a = detector_report(logs, CAT, cfg)
        b = detector_report(logs, CAT, cfg)
        assert a == b
        assert {f["type"] for f in a["flags"]} == {"PREVALENT_INCONSISTENCY"}
        assert a["suspects"][0]["item"] == "T"
        assert 0 < a["regret_risk"] < 1

    def test_zero_false_positives_on_consistent_logs(self):
        logs, _ = _plant_logs(users=4, violation=False)
        report = detector_report(logs, CAT, EngineConfig())
        assert report["flags"] == []
        assert report["suspects"] == []
