"""Constraint generation, the max-margin estimate, and choice prediction."""

import itertools

import numpy as np
import pytest

from ctxchoice import (
    Catalog,
    ChoiceLog,
    ChooserModel,
    MatrixEstimate,
    Observation,
    UtilityMatrix,
    best_choice,
    constraints_from_log,
    constraints_from_observation,
    estimate_matrix,
    frequency_equalities,
    ingest_rating,
    predict_choice,
    sample_matrix,
    scale_matrix,
    simulate_session,
)
from ctxchoice.config import EngineConfig
from ctxchoice.errors import ValidationError
from ctxchoice.learner import Relation, default_estimate
from ctxchoice.simulate import random_spaces


def _obs(space, chosen, at="2026-01-01T00:00:00", **kw):
    return Observation(space=frozenset(space), chosen=chosen, at=at, **kw)


class TestConstraintsFromObservation:
    def test_pair_choice_inequality(self):
        cat = Catalog(("c1", "c2"))
        cons = constraints_from_observation(_obs({"c1", "c2"}, "c1"), cat)
        assert len(cons) == 1
        c = cons[0]
        assert c.relation is Relation.GREATER
        assert dict(c.coefficients) == {
            (0, 0): 1.0,
            (0, 1): 1.0,
            (1, 0): -1.0,
            (1, 1): -1.0,
        }
        assert c.rhs == 0.0

    def test_triple_choice_two_inequalities(self):
        cat = Catalog(("c1", "c2", "c3"))
        cons = constraints_from_observation(_obs({"c1", "c2", "c3"}, "c2"), cat)
        assert len(cons) == 2
        beaten = {c.provenance["over"] for c in cons}
        assert beaten == {"c1", "c3"}
        # chosen row summed over the whole space, including its diagonal
        against_c1 = next(c for c in cons if c.provenance["over"] == "c1")
        coeffs = dict(against_c1.coefficients)
        assert coeffs == {
            (1, 0): 1.0,
            (1, 1): 1.0,
            (1, 2): 1.0,
            (0, 0): -1.0,
            (0, 1): -1.0,
            (0, 2): -1.0,
        }

    def test_singleton_yields_nothing(self):
        cat = Catalog(("x",))
        assert constraints_from_observation(_obs({"x"}, "x"), cat) == []

    def test_count_is_space_size_minus_one(self):
        cat = Catalog(tuple(f"i{j}" for j in range(8)))
        rng = np.random.default_rng(0)
        for _ in range(50):
            size = int(rng.integers(1, 9))
            space = set(rng.choice(cat.items, size=size, replace=False))
            chosen = sorted(space)[0]
            cons = constraints_from_observation(_obs(space, chosen), cat)
            assert len(cons) == size - 1
            assert all(c.relation is Relation.GREATER for c in cons)

    def test_retracted_rejected(self):
        cat = Catalog(("a", "b"))
        with pytest.raises(ValidationError):
            constraints_from_observation(_obs({"a", "b"}, "a", retracted=True), cat)

    def test_rating_appends_diagonal_band(self):
        cat = Catalog(("a", "b"))
        cons = constraints_from_observation(
            _obs({"a", "b"}, "b", context_free_rating=4.0), cat, anchor_rating=8.0
        )
        assert len(cons) == 2
        band = cons[-1]
        assert band.relation is Relation.EQUAL_WITHIN
        assert dict(band.coefficients) == {(1, 1): 1.0}
        assert band.rhs == 0.5


class TestIngestRating:
    def test_anchor_normalizes_itself(self):
        cat = Catalog(("c1", "c2"))
        c = ingest_rating(_obs({"c1"}, "c1", context_free_rating=8.0), cat, anchor_rating=8.0)
        assert c.rhs == 1.0
        assert dict(c.coefficients) == {(0, 0): 1.0}

    def test_ratio(self):
        cat = Catalog(("c1", "c2"))
        c = ingest_rating(_obs({"c2"}, "c2", context_free_rating=4.0), cat, anchor_rating=8.0)
        assert c.rhs == 0.5

    def test_non_positive_rejected(self):
        cat = Catalog(("c1",))
        with pytest.raises(ValidationError):
            ingest_rating(_obs({"c1"}, "c1", context_free_rating=0.0), cat, anchor_rating=8.0)

    def test_low_rating_forces_cross_terms(self):
        # the appealing-in-context book: chosen from {A, B, C} but rated
        # low afterwards, so its appeal must come from the cross terms
        cat = Catalog(("A", "B", "C"))
        log = ChoiceLog("reader")
        log.append(_obs({"A"}, "A", at="2026-01-01T00:00:00", context_free_rating=8.0))
        log.append(_obs({"A", "B", "C"}, "B", at="2026-01-01T00:01:00"))
        log.append(_obs({"B"}, "B", at="2026-01-01T00:02:00", context_free_rating=1.0))
        est = estimate_matrix(constraints_from_log(log, cat), cat)
        assert est.margin > 0
        b = cat.index("B")
        diag_b = est.matrix.entries[b, b]
        assert diag_b <= 0.125 + 0.1 + 1e-6  # pinned near 1/8
        cross = est.matrix.entries[b, cat.index("A")] + est.matrix.entries[b, cat.index("C")]
        assert cross > 0  # the context supplied the appeal


class TestFrequencyEqualities:
    def _log_with_shares(self, wins_a: int, wins_b: int):
        log = ChoiceLog("u")
        t = 0
        for _ in range(wins_a):
            log.append(_obs({"A", "B"}, "A", at=f"2026-01-01T00:{t // 60:02d}:{t % 60:02d}"))
            t += 1
        for _ in range(wins_b):
            log.append(_obs({"A", "B"}, "B", at=f"2026-01-01T00:{t // 60:02d}:{t % 60:02d}"))
            t += 1
        return log

    def test_lopsided_shares_stay_strict(self):
        cat = Catalog(("A", "B"))
        log = self._log_with_shares(97, 3)
        assert frequency_equalities(log, cat, min_support=20) == []

    def test_near_tie_becomes_equality(self):
        cat = Catalog(("A", "B"))
        log = self._log_with_shares(51, 49)
        eqs = frequency_equalities(log, cat, min_support=20)
        assert len(eqs) == 1
        eq = eqs[0]
        assert eq.relation is Relation.EQUAL_WITHIN
        assert eq.provenance["items"] == ["A", "B"]
        # difference of the two in-space utilities, bounded by epsilon
        assert dict(eq.coefficients) == {
            (0, 0): 1.0,
            (0, 1): 1.0,
            (1, 0): -1.0,
            (1, 1): -1.0,
        }

    def test_below_support_ignored(self):
        cat = Catalog(("A", "B"))
        log = self._log_with_shares(2, 1)
        assert frequency_equalities(log, cat, min_support=5) == []

    def test_equalities_supersede_mutual_stricts(self):
        cat = Catalog(("A", "B"))
        log = self._log_with_shares(51, 49)
        cfg = EngineConfig(freq_min_support=20)
        cons = constraints_from_log(log, cat, cfg)
        # without superseding, the 51 A>B and 49 B>A strict constraints
        # would be jointly infeasible; the equality replaces them all
        kinds = [c.relation for c in cons]
        assert kinds == [Relation.EQUAL_WITHIN]
        est = estimate_matrix(cons, cat)
        assert est.margin > 0


class TestEstimateMatrix:
    def test_replay_of_fixture_choices(self, table1):
        spaces = [set(s) for r in range(1, 4) for s in itertools.combinations("HRF", r)]
        log = simulate_session(ChooserModel(truth=table1, seed=0), spaces)
        cons = constraints_from_log(log, table1.catalog)
        # the rescaled truth satisfies every constraint it generated
        rescaled = scale_matrix(table1, 1.0 / table1.entries[0, 0])
        for c in cons:
            assert c.satisfied(rescaled.entries)
        est = estimate_matrix(cons, table1.catalog)
        assert est.margin > 0
        for space in spaces:
            assert predict_choice(est, space)[0] == best_choice(table1, space)

    def test_empty_constraints_default_prior(self):
        cat = Catalog(("a", "b", "c"))
        est = estimate_matrix([], cat, bounds=100.0)
        assert est.margin == 100.0
        assert np.array_equal(est.matrix.entries, np.eye(3))
        assert est.violated == ()

    def test_contradiction_reports_both_sides(self):
        cat = Catalog(("a", "b"))
        cons = constraints_from_observation(_obs({"a", "b"}, "a"), cat)
        cons += constraints_from_observation(_obs({"a", "b"}, "b"), cat)
        est = estimate_matrix(cons, cat)
        assert est.margin <= 0
        assert len(est.violated) == 2

    def test_normalization_pins_first_diagonal(self):
        for seed in (1, 5, 9):
            truth = sample_matrix(4, seed=seed, sparsity=0.3)
            log = simulate_session(
                ChooserModel(truth=truth, seed=seed),
                random_spaces(truth.catalog, 40, seed=seed),
            )
            est = estimate_matrix(constraints_from_log(log, truth.catalog), truth.catalog)
            assert est.matrix.entries[0, 0] == pytest.approx(1.0, abs=1e-9)

    def test_feasibility_of_truth_random(self):
        # constraints generated by a deterministic maximizer are always
        # satisfied by the (rescaled) matrix that generated them
        for seed in range(1, 21):
            n = 2 + seed % 4  # 2..5
            truth = sample_matrix(n, seed=seed, sparsity=0.3)
            spaces = random_spaces(truth.catalog, 60, seed=seed)
            log = simulate_session(ChooserModel(truth=truth, seed=seed), spaces)
            cons = constraints_from_log(log, truth.catalog)
            rescaled = scale_matrix(truth, 1.0 / truth.entries[0, 0])
            assert all(c.satisfied(rescaled.entries) for c in cons)

    def test_monotone_narrowing(self):
        truth = sample_matrix(4, seed=2, sparsity=0.2)
        spaces = random_spaces(truth.catalog, 60, seed=2)
        log = simulate_session(ChooserModel(truth=truth, seed=2), spaces)
        cons = constraints_from_log(log, truth.catalog)
        margins = [
            estimate_matrix(cons[:k], truth.catalog).margin
            for k in (0, 5, 15, 30, len(cons))
        ]
        for earlier, later in zip(margins, margins[1:]):
            assert later <= earlier + 1e-7

    def test_scaling_preserves_feasibility_status(self):
        # the constraint set cares about proportions only: a matrix
        # satisfies it iff any positive multiple does
        truth = sample_matrix(3, seed=7, sparsity=0.2)
        spaces = random_spaces(truth.catalog, 30, seed=7)
        log = simulate_session(ChooserModel(truth=truth, seed=7), spaces)
        cons = [
            c
            for c in constraints_from_log(log, truth.catalog)
            if c.relation is Relation.GREATER
        ]
        for c_factor in (0.25, 1.0, 8.0):
            scaled = scale_matrix(truth, c_factor)
            assert all(c.satisfied(scaled.entries) for c in cons)

    def test_infeasible_equalities_fall_back_to_least_violation(self):
        cat = Catalog(("a", "b"))
        one = ingest_rating(
            _obs({"a"}, "a", context_free_rating=8.0), cat, anchor_rating=8.0, epsilon=0.05
        )
        # same diagonal pinned to an incompatible value
        other = ingest_rating(
            _obs({"a"}, "a", context_free_rating=40.0), cat, anchor_rating=8.0, epsilon=0.05
        )
        est = estimate_matrix([one, other], cat)
        assert est.margin < 0
        assert est.violated  # at least one band cannot hold


class TestPredictChoice:
    def test_fixture_prediction(self, table1):
        est = MatrixEstimate(matrix=table1, margin=1.0)
        item, confidence = predict_choice(est, {"H", "R", "F"})
        assert item == "H"
        assert confidence > 0

    def test_forced_tie_gives_zero_confidence(self):
        cat = Catalog(("a", "b"))
        est = MatrixEstimate(matrix=UtilityMatrix(cat, np.eye(2)), margin=1.0)
        item, confidence = predict_choice(est, {"a", "b"})
        assert item == "a"  # catalog order breaks the tie
        assert confidence == 0.0

    def test_singleton_full_confidence(self, table1):
        est = MatrixEstimate(matrix=table1, margin=1.0)
        assert predict_choice(est, {"R"}) == ("R", 1.0)


class TestChoiceLogIO:
    def test_jsonl_round_trip(self, tmp_path):
        log = ChoiceLog("u1")
        log.append(_obs({"a", "b"}, "a", at="2026-01-01T10:00:00"))
        log.append(
            _obs({"a", "b", "c"}, "c", at="2026-01-01T10:05:00", context_free_rating=7.0)
        )
        log.retract(1)
        path = tmp_path / "u1.jsonl"
        log.save(path)
        again = ChoiceLog.load(path)
        assert again.user == "u1"
        assert [o.to_dict() for o in again] == [o.to_dict() for o in log]

    def test_timestamps_must_not_decrease(self):
        log = ChoiceLog("u")
        log.append(_obs({"a"}, "a", at="2026-01-01T10:00:00"))
        with pytest.raises(ValidationError):
            log.append(_obs({"a"}, "a", at="2026-01-01T09:00:00"))

    def test_double_retraction_rejected(self):
        log = ChoiceLog("u")
        log.append(_obs({"a"}, "a"))
        log.retract(0)
        with pytest.raises(ValidationError):
            log.retract(0)

    def test_chosen_must_be_in_space(self):
        with pytest.raises(ValidationError):
            _obs({"a", "b"}, "z")


def test_default_estimate_shape():
    cat = Catalog(("a", "b"))
    est = default_estimate(cat, bounds=50.0)
    assert est.margin == 50.0
    assert est.matrix.entries[0, 0] == 1.0
