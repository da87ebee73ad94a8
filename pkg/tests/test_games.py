"""Game protocol, sampled asymptotic constants, and branch extraction."""

import math

import pytest

from banachkit.analysis import LpReference, equivalence_constant
from banachkit.blockseq import (
    BlockSequence,
    interleave_array,
    subsequence_tree,
    tree_from_array,
)
from banachkit.games import (
    ProtocolViolationError,
    Strategy,
    asymptotic_lp_verdict,
    good_branch_extract,
    play,
    stabilized_constant,
    strategy_from_name,
    subspace_constant,
    subspace_tail,
    vector_nccb,
    vector_unit,
)
from banachkit.spaces import Interleave, Lp, SparseVector, make_example_space, norm


def unit(i):
    return SparseVector.unit(i)


def interleave_space():
    return Interleave(Lp(1.0), Lp(2.0), "max")


class TestPlay:
    def test_unit_player_outcome(self):
        t = play(Lp(2.0), subspace_tail(1), vector_unit(), 4)
        assert [m for m, _ in t.moves] == [1, 2, 3, 4]
        assert [y.support() for _, y in t.moves] == [(1,), (2,), (3,), (4,)]
        outcome = t.outcome
        assert len(outcome) == 4

    def test_constant_cutoff_leaves_play_free(self):
        t = play(Lp(2.0), subspace_constant(1), vector_nccb(2), 3)
        for m, y in t.moves:
            assert m == 1
            assert y.min_index() >= 1
            assert abs(norm(Lp(2.0), y) - 1.0) <= 1e-9

    def test_cutoffs_respected(self):
        t = play(Lp(2.0), subspace_constant(5), vector_unit(), 2)
        assert all(y.min_index() >= 5 for _, y in t.moves)

    def test_outcome_is_equivalent_to_lp(self):
        t = play(Lp(2.0), subspace_tail(3), vector_unit(), 3)
        report = equivalence_constant(Lp(2.0), list(t.outcome), LpReference(2.0, 3))
        assert report.constant <= 1 + 1e-9

    def test_cutoffs_past_segments_tighten_the_outcome(self):
        spec = make_example_space(2.0, 3, [1.0, 1.5, 1.8])
        t = play(spec, subspace_constant(68), vector_unit(), 3)  # segment 3 starts at 68
        report = equivalence_constant(spec, list(t.outcome), LpReference(2.0, 3))
        assert report.constant <= 3 ** (1 / 1.8 - 1 / 2) + 1e-9

    def test_vector_player_violations_are_named(self):
        before_cutoff = Strategy("vector-player", "bad", lambda r, c, s: unit(1))
        with pytest.raises(ProtocolViolationError) as err:
            play(Lp(2.0), subspace_constant(5), before_cutoff, 1)
        assert err.value.offender == "vector-player"

        unnormalized = Strategy("vector-player", "big", lambda r, c, s: SparseVector({c: 2.0}))
        with pytest.raises(ProtocolViolationError) as err:
            play(Lp(2.0), subspace_constant(1), unnormalized, 1)
        assert err.value.offender == "vector-player"

        stuck = Strategy("vector-player", "stuck", lambda r, c, s: unit(max(c, 1)))
        with pytest.raises(ProtocolViolationError) as err:
            play(Lp(2.0), subspace_constant(2), stuck, 2)
        assert err.value.offender == "vector-player"
        assert "after the previous" in str(err.value)

    def test_subspace_player_violations_are_named(self):
        bad_cutoff = Strategy("subspace-player", "zero", lambda r, s: 0)
        with pytest.raises(ProtocolViolationError) as err:
            play(Lp(2.0), bad_cutoff, vector_unit(), 1)
        assert err.value.offender == "subspace-player"

    def test_wrong_role_rejected(self):
        with pytest.raises(ProtocolViolationError):
            play(Lp(2.0), vector_unit(), vector_unit(), 1)

    def test_transcript_serializes(self):
        t = play(Lp(2.0), subspace_tail(1), vector_unit(), 2)
        doc = t.to_doc()
        assert len(doc["moves"]) == 2 and len(doc["outcome"]) == 2

    def test_net_player_moves_are_legal(self):
        from banachkit.games import vector_net

        for pick in (0, 3, 11):
            t = play(Lp(2.0), subspace_tail(1), vector_net(pick=pick), 3)
            for _, y in t.moves:
                assert abs(norm(Lp(2.0), y) - 1.0) <= 1e-9

    def test_strategy_registry(self):
        assert strategy_from_name("constant:4", "subspace-player").name == "constant:4"
        assert strategy_from_name("tail:2", "subspace-player").name == "tail:2"
        assert strategy_from_name("unit", "vector-player").name == "unit"
        assert strategy_from_name("nccb:3", "vector-player").name == "nccb:3"
        assert strategy_from_name("net:6:2", "vector-player").name == "net:6:2"
        with pytest.raises(ValueError):
            strategy_from_name("alphabeta", "vector-player")


class TestStabilizedConstant:
    def test_lp_is_isometric_at_every_cutoff(self):
        for N in (1, 10, 100):
            report = stabilized_constant(Lp(2.0), 2.0, 3, N, window=16, samples=20)
            assert report.constant == pytest.approx(1.0, abs=1e-9)
            assert report.N == N

    def test_interleave_pair_certificate(self):
        spec = interleave_space()
        for N in (1, 5, 20):
            report = stabilized_constant(spec, 2.0, 2, N, window=16, samples=20)
            assert report.constant >= math.sqrt(2) - 1e-6

    def test_certificate_reproduces_constant(self):
        spec = interleave_space()
        report = stabilized_constant(spec, 2.0, 2, 3, window=12, samples=15)
        again = equivalence_constant(
            spec, list(report.certificate), LpReference(2.0, 2), net=report.net
        )
        assert again.constant == pytest.approx(report.constant, abs=1e-9)

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            stabilized_constant(Lp(2.0), 2.0, 4, 1, window=2, samples=5)


class TestAsymptoticVerdict:
    def test_lp_consistent(self):
        verdict = asymptotic_lp_verdict(Lp(2.0), 2.0, 2, [1, 10, 100], epsilon=0.01, samples=20)
        assert verdict.verdict == "consistent-with-stabilized-1-asymptotic-lp"
        assert all(c == pytest.approx(1.0, abs=1e-9) for c in verdict.constants())

    def test_interleave_not_consistent(self):
        verdict = asymptotic_lp_verdict(
            interleave_space(), 2.0, 2, [1, 8, 20], epsilon=0.25, samples=20
        )
        assert verdict.verdict == "not-consistent"
        assert all(c >= math.sqrt(2) - 1e-6 for c in verdict.constants())

    def test_example_space_nonincreasing_to_segment_bound(self):
        spec = make_example_space(2.0, 3, [1.0, 1.5, 1.8])
        verdict = asymptotic_lp_verdict(spec, 2.0, 2, [1, 3, 68], epsilon=0.05, window=16, samples=20)
        constants = verdict.constants()
        assert all(b <= a + 1e-12 for a, b in zip(constants, constants[1:]))
        bound = 2 ** (1 / 1.8 - 1 / 2)
        assert constants[-1] <= bound + verdict.rows[-1].certificate_report.net_error + 1e-9
        assert verdict.empirical

    def test_reports_carry_pool_parameters(self):
        verdict = asymptotic_lp_verdict(Lp(1.0), 1.0, 2, [1, 4], epsilon=0.1, samples=10)
        for row in verdict.rows:
            assert row.pool_size > 0
            assert row.net.to_doc()["size"] > 0


class TestGoodBranchExtract:
    def test_lp_tree_certifies(self):
        tree = subsequence_tree([unit(i) for i in range(1, 25)], depth=8, width=3)
        result = good_branch_extract(tree, Lp(2.0), 2.0)
        assert result.complete
        assert result.certified
        assert result.goodness.verdict == "good-within-tolerance"
        assert len(result.branch) == 8

    def test_one_spreading_tree_certifies_at_every_epsilon(self):
        tree = subsequence_tree([unit(i) for i in range(1, 25)], depth=8, width=2)
        for rule in (lambda n: 1.0 / n, lambda n: 0.01, lambda n: 1e-6):
            result = good_branch_extract(tree, Lp(1.0), 1.0, eps_rule=rule)
            assert result.certified

    def test_interleave_tree_flags_failure(self):
        odd = BlockSequence([unit(2 * i - 1) for i in range(1, 30)])
        even = BlockSequence([unit(2 * i) for i in range(1, 30)])
        arr = interleave_array(odd, even, m=2, rows=8)
        tree = tree_from_array(arr, depth=8, width=2)
        result = good_branch_extract(tree, interleave_space(), 2.0)
        assert not result.certified
        assert result.goodness.verdict == "oscillating"
        assert result.metadata["cutoff_rule"] == "stabilized-constant-lead"

    def test_exhausted_tree_flags_partial(self):
        tree = subsequence_tree([unit(i) for i in range(1, 5)], depth=6, width=1)
        result = good_branch_extract(tree, Lp(2.0), 2.0)
        assert not result.complete
        assert len(result.branch) < 6

    def test_example_space_branch_oscillation_shrinks(self):
        from banachkit.analysis import ScalarNet, goodness_test

        spec = make_example_space(2.0, 3, [1.0, 1.5, 1.8])
        tree = subsequence_tree([unit(i) for i in range(1, 41)], depth=12, width=3)
        result = good_branch_extract(tree, spec, 2.0)
        assert result.complete
        net = ScalarNet.grid(0.5, 2)
        early = goodness_test(spec, list(result.branch), net, K=1, H=5, epsilon=1e-9)
        late = goodness_test(spec, list(result.branch), net, K=7, H=5, epsilon=1e-9)
        assert late.max_oscillation() < early.max_oscillation()
