"""Classifier memory bank vs a direct transliteration of its update rule."""

import numpy as np
import pytest

from pvbf.dcwr import ClassifierMemoryBank
from pvbf.mlp import MLP


class BankOracle:
    """Independent reimplementation of the per-step consolidation loop."""

    def __init__(self, num_classes, row_dim):
        self.m_s = np.zeros((num_classes, row_dim))
        self.m_c = np.zeros((num_classes, row_dim))
        self.m_l = np.zeros((num_classes, row_dim))
        self.p = np.zeros(num_classes, dtype=np.int64)

    def step(self, rows, labels, prob, rng):
        labels = np.asarray(labels)
        class_set = sorted(set(int(v) for v in labels))
        mean_row = sum(rows[j] for j in class_set) / len(class_set)
        for j in class_set:
            self.m_s[j] = rows[j] - mean_row
            u = int(np.sum(labels == j))
            eta_c = self.p[j] / u
            eta_l = np.sqrt(self.p[j] / u)
            if rng.random() < prob:
                self.m_c[j] = (self.m_c[j] * eta_c + self.m_s[j]) / (eta_c + 1)
            self.m_l[j] = (self.m_l[j] * eta_l + self.m_c[j]) / (eta_l + 1)
            self.p[j] += u


class TestSensory:
    def test_single_class_gives_zero_vector(self):
        bank = ClassifierMemoryBank(4, 3)
        rows = np.random.default_rng(0).normal(size=(4, 3))
        out = bank.sensory(rows, [2])
        np.testing.assert_array_equal(out, np.zeros((1, 3)))

    def test_two_class_hand_values(self):
        bank = ClassifierMemoryBank(2, 2)
        rows = np.array([[2.0, 4.0], [0.0, 0.0]])
        out = bank.sensory(rows, [0, 1])
        np.testing.assert_array_equal(out, [[1.0, 2.0], [-1.0, -2.0]])

    def test_traces_sum_to_zero(self):
        rng = np.random.default_rng(1)
        bank = ClassifierMemoryBank(8, 5)
        rows = rng.normal(size=(8, 5))
        classes = [1, 3, 4, 7]
        bank.sensory(rows, classes)
        total = bank.sensory_mem[classes].sum(axis=0)
        np.testing.assert_allclose(total, 0.0, atol=1e-12)

    def test_absent_classes_untouched(self):
        bank = ClassifierMemoryBank(5, 3)
        bank.sensory_mem[4] = 9.0
        bank.sensory(np.ones((5, 3)), [0, 1])
        np.testing.assert_array_equal(bank.sensory_mem[4], np.full(3, 9.0))


class TestConsolidate:
    def test_first_occurrence_copies_through(self):
        # zero retention coefficients force m_c = m_s and m_l = m_c
        bank = ClassifierMemoryBank(3, 2)
        rows = np.random.default_rng(2).normal(size=(3, 2))
        bank.sensory(rows, [0, 1])
        bank.consolidate([0, 1], [4, 4], p=1.0, rng=np.random.default_rng(3))
        np.testing.assert_array_equal(bank.short_term[0], bank.sensory_mem[0])
        np.testing.assert_array_equal(bank.long_term[0], bank.short_term[0])

    def test_equal_counts_hand_blend(self):
        bank = ClassifierMemoryBank(1, 2)
        bank.occurrences[0] = 4
        bank.short_term[0] = np.array([2.0, 0.0])
        bank.long_term[0] = np.array([4.0, 4.0])
        bank.sensory_mem[0] = np.array([0.0, 2.0])
        bank.consolidate([0], [4], p=1.0, rng=np.random.default_rng(4))
        # retention 1: short = (prev + sensory)/2, long = (prev + short)/2
        np.testing.assert_array_equal(bank.short_term[0], [1.0, 1.0])
        np.testing.assert_array_equal(bank.long_term[0], [2.5, 2.5])
        assert bank.occurrences[0] == 8

    def test_skip_branch_keeps_short_term_but_reblends_long_term(self):
        bank = ClassifierMemoryBank(1, 2)
        bank.occurrences[0] = 2
        bank.short_term[0] = np.array([3.0, 3.0])
        bank.long_term[0] = np.array([0.0, 0.0])
        bank.sensory_mem[0] = np.array([100.0, 100.0])
        bank.consolidate([0], [2], p=0.0, rng=np.random.default_rng(5))
        np.testing.assert_array_equal(bank.short_term[0], [3.0, 3.0])
        assert np.all(bank.long_term[0] != 0.0)

    def test_occurrence_counts_accumulate(self):
        bank = ClassifierMemoryBank(4, 2)
        rng = np.random.default_rng(6)
        rows = rng.normal(size=(4, 2))
        totals = np.zeros(4, dtype=int)
        for _ in range(20):
            labels = rng.integers(0, 4, size=6)
            bank.update(rows, labels, p=0.9, rng=rng)
            totals += np.bincount(labels, minlength=4)
        np.testing.assert_array_equal(bank.occurrences, totals)

    def test_zero_count_rejected(self):
        bank = ClassifierMemoryBank(2, 2)
        bank.sensory(np.ones((2, 2)), [0])
        with pytest.raises(ValueError):
            bank.consolidate([0], [0], p=0.5, rng=np.random.default_rng(7))

    def test_convexity_envelope(self):
        # every consolidated coordinate stays within the running min/max
        # of the values blended into it
        rng = np.random.default_rng(8)
        bank = ClassifierMemoryBank(3, 4)
        lo = np.full((3, 4), np.inf)
        hi = np.full((3, 4), -np.inf)
        lo[:], hi[:] = 0.0, 0.0  # initial zeros participate
        for _ in range(50):
            rows = rng.normal(size=(3, 4))
            labels = rng.integers(0, 3, size=8)
            bank.update(rows, labels, p=0.8, rng=rng)
            classes = np.unique(labels)
            lo[classes] = np.minimum(lo[classes], bank.sensory_mem[classes])
            hi[classes] = np.maximum(hi[classes], bank.sensory_mem[classes])
            assert np.all(bank.short_term >= lo - 1e-12)
            assert np.all(bank.short_term <= hi + 1e-12)
            assert np.all(bank.long_term >= lo - 1e-12)
            assert np.all(bank.long_term <= hi + 1e-12)


class TestProbabilityExtremes:
    def test_p_zero_freezes_short_term(self):
        rng = np.random.default_rng(9)
        bank = ClassifierMemoryBank(3, 2)
        for _ in range(30):
            bank.update(rng.normal(size=(3, 2)), rng.integers(0, 3, size=5), p=0.0, rng=rng)
        np.testing.assert_array_equal(bank.short_term, np.zeros((3, 2)))
        np.testing.assert_array_equal(bank.long_term, np.zeros((3, 2)))

    def test_p_one_updates_every_batch(self):
        rng = np.random.default_rng(10)
        bank = ClassifierMemoryBank(2, 2)
        previous = bank.short_term.copy()
        for _ in range(5):
            rows = rng.normal(size=(2, 2))
            bank.update(rows, np.array([0, 1, 0]), p=1.0, rng=rng)
            assert np.any(bank.short_term != previous)
            previous = bank.short_term.copy()


class TestInstall:
    def test_overwrites_rows_and_nothing_else(self):
        net = MLP([4, 6, 3], rng=np.random.default_rng(11))
        bank = ClassifierMemoryBank(3, 7)
        bank.long_term[:] = np.random.default_rng(12).normal(size=(3, 7))
        hidden_before = net.weight_view(0).copy()
        bank.install(net)
        np.testing.assert_array_equal(net.classifier_rows(), bank.long_term)
        np.testing.assert_array_equal(net.weight_view(0), hidden_before)

    def test_idempotent(self):
        net = MLP([4, 6, 3], rng=np.random.default_rng(13))
        bank = ClassifierMemoryBank(3, 7)
        bank.long_term[:] = 1.5
        bank.install(net)
        first = net.snapshot()
        bank.install(net)
        np.testing.assert_array_equal(net.snapshot(), first)

    def test_never_seen_class_gets_zero_row(self):
        net = MLP([2, 4, 3], rng=np.random.default_rng(14))
        bank = ClassifierMemoryBank(3, 5)
        rng = np.random.default_rng(15)
        bank.update(net.classifier_rows(), np.array([0, 1, 0]), p=1.0, rng=rng)
        bank.install(net)
        np.testing.assert_array_equal(net.classifier_rows()[2], np.zeros(5))
        # a zero row (weights and bias) collapses that class's logit to zero
        logits = net.forward(np.random.default_rng(16).normal(size=(4, 2)))
        np.testing.assert_array_equal(logits[:, 2], np.zeros(4))


class TestOracleEquivalence:
    def test_bitwise_match_over_random_batches(self):
        num_classes, row_dim, steps = 6, 5, 300
        bank = ClassifierMemoryBank(num_classes, row_dim)
        oracle = BankOracle(num_classes, row_dim)
        rng_data = np.random.default_rng(17)
        rng_bank = np.random.default_rng(99)
        rng_oracle = np.random.default_rng(99)
        for _ in range(steps):
            rows = rng_data.normal(size=(num_classes, row_dim))
            size = int(rng_data.integers(1, 12))
            labels = rng_data.integers(0, num_classes, size=size)
            bank.update(rows, labels, p=0.7, rng=rng_bank)
            oracle.step(rows, labels, 0.7, rng_oracle)
            np.testing.assert_array_equal(bank.short_term, oracle.m_c)
            np.testing.assert_array_equal(bank.long_term, oracle.m_l)
            np.testing.assert_array_equal(bank.occurrences, oracle.p)
