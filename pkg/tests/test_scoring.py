import numpy as np
import pytest

from ranklab import scoring


class TestWeights:
    def test_normalize_scales_to_unit_sum(self):
        w = scoring.normalize_weights([2.0, 2.0, 4.0])
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert w == pytest.approx([0.25, 0.25, 0.5])

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            scoring.normalize_weights([1.0, -0.5])
        with pytest.raises(ValueError):
            scoring.check_weights([0.6, -0.1, 0.5])

    def test_check_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            scoring.check_weights([0.5, 0.6])

    def test_uniform(self):
        assert scoring.uniform_weights(4) == pytest.approx([0.25] * 4)


class TestScoreArithmetic:
    def test_symmetric_instance(self):
        s = scoring.score_arithmetic([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
        assert s == pytest.approx([0.5, 0.5])

    def test_degenerate_weight_picks_column(self):
        a = np.array([[0.3, 0.9], [0.7, 0.1]])
        s = scoring.score_arithmetic(a, [1.0, 0.0])
        assert s == pytest.approx(a[:, 0])

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(17)
        a = rng.uniform(size=(5, 3))
        w = scoring.normalize_weights(rng.uniform(size=3))
        s = scoring.score_arithmetic(a, w)
        for i in range(5):
            expected = 0.0
            for j in range(3):
                expected += w[j] * a[i, j]
            assert abs(s[i] - expected) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            scoring.score_arithmetic([[1.0, 0.0]], [1.0])


class TestScoreGeometric:
    def test_constant_rows_score_the_constant(self):
        a = np.full((3, 4), 0.37)
        w = scoring.normalize_weights([1.0, 2.0, 3.0, 4.0])
        s = scoring.score_geometric(a, w)
        assert s == pytest.approx([0.37] * 3, abs=1e-12)

    def test_closed_form_two_attributes(self):
        s = scoring.score_geometric([[0.25, 1.0]], [0.5, 0.5])
        assert s[0] == pytest.approx(0.5, abs=1e-12)

    def test_zero_attribute_floored(self):
        s = scoring.score_geometric([[0.0, 1.0]], [0.5, 0.5])
        assert np.isfinite(s[0])
        assert s[0] == pytest.approx(np.exp(0.5 * np.log(1e-6)), abs=1e-12)


class TestRankByScore:
    def test_basic_order_and_ranks(self):
        r = scoring.rank_by_score([0.2, 0.9, 0.5])
        assert list(r.order) == [1, 2, 0]
        assert list(r.ranks) == [3, 1, 2]

    def test_all_equal_scores_keep_input_order(self):
        r = scoring.rank_by_score([0.5, 0.5, 0.5, 0.5])
        assert list(r.order) == [0, 1, 2, 3]

    def test_ranks_are_a_permutation(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            s = rng.normal(size=rng.integers(1, 30))
            r = scoring.rank_by_score(s)
            assert sorted(r.ranks) == list(range(1, s.size + 1))

    def test_labels_attach(self):
        r = scoring.rank_by_score([0.1, 0.7], labels=["a", "b"])
        assert r.label_at(0) == "b"

    def test_inconsistent_ranking_rejected(self):
        with pytest.raises(ValueError):
            scoring.Ranking(order=np.array([0, 1]), ranks=np.array([2, 2]))


class TestDomination:
    def test_componentwise_cases(self):
        assert scoring.strictly_dominates([1.0, 1.0], [0.0, 1.0])
        assert not scoring.strictly_dominates([1.0, 0.0], [0.0, 1.0])
        assert scoring.strictly_dominates([0.4, 0.6], [0.4, 0.6])

    def test_domination_implies_score_dominance(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            m = int(rng.integers(1, 6))
            y = rng.uniform(size=m)
            x = y + rng.uniform(0.0, 0.5, size=m)
            w = scoring.normalize_weights(rng.uniform(0.01, 1.0, size=m))
            a = np.vstack([x, y])
            sa = scoring.score_arithmetic(a, w)
            sg = scoring.score_geometric(a, w)
            assert sa[0] >= sa[1] - 1e-12
            assert sg[0] >= sg[1] - 1e-12

    def test_partial_domination_has_separating_weights(self):
        rng = np.random.default_rng(21)
        found = 0
        while found < 50:
            m = int(rng.integers(2, 7))
            x, y = rng.uniform(size=m), rng.uniform(size=m)
            if scoring.strictly_dominates(y, x):
                continue
            found += 1
            j = int(np.argmax(x - y))
            delta = 1e-6
            w = np.full(m, delta)
            w[j] = 1.0 - (m - 1) * delta
            s = scoring.score_arithmetic(np.vstack([x, y]), w)
            assert s[0] > s[1]


class TestInvariances:
    def test_weight_rescaling_keeps_order(self):
        rng = np.random.default_rng(5)
        a = rng.uniform(size=(12, 4))
        raw = rng.uniform(0.1, 1.0, size=4)
        base = scoring.rank_by_score(scoring.score_arithmetic(a, scoring.normalize_weights(raw)))
        again = scoring.rank_by_score(scoring.score_arithmetic(a, scoring.normalize_weights(raw * 7.3)))
        assert np.array_equal(base.order, again.order)

    def test_row_permutation_relabels_ranking(self):
        rng = np.random.default_rng(6)
        a = rng.uniform(size=(9, 3))
        w = scoring.uniform_weights(3)
        perm = rng.permutation(9)
        base = scoring.rank_by_score(scoring.score_arithmetic(a, w))
        permuted = scoring.rank_by_score(scoring.score_arithmetic(a[perm], w))
        # row i of the permuted matrix is original row perm[i]
        assert np.array_equal(permuted.ranks, base.ranks[perm])
