"""Training-loop behavior of the streaming classifier estimator."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pvbf.estimator import ContinualClassifier
from pvbf.streams import gen_blobs, make_split_stream

SMALL = dict(hidden_sizes=(16, 12), lr=0.1, buffer_capacity=30, replay_size=8)


@pytest.fixture(scope="module")
def dataset():
    return gen_blobs(10, 6, 40, 1.0, seed=11)


def run_stream(est, dataset, num_tasks=5, batch_size=8, stream_seed=5):
    stream = make_split_stream(dataset, num_tasks, 2, batch_size, seed=stream_seed)
    classes = np.arange(dataset.num_classes)
    for step in stream:
        est.partial_fit(step.batch.inputs, step.batch.labels,
                        classes=classes, task=step.task_id)
    est.finish_task()
    return est


class TestPartialFit:
    def test_classes_required_on_first_call(self):
        est = ContinualClassifier(**SMALL)
        with pytest.raises(ValueError, match="classes"):
            est.partial_fit(np.zeros((2, 3)), [0, 1])

    def test_task_one_gradients_unadjusted(self, dataset):
        # identical first-task trajectories with and without gradient
        # adjustment prove the adjustment is inactive on the first task
        def first_task_params(method):
            est = ContinualClassifier(method=method, random_state=7, **SMALL)
            stream = make_split_stream(dataset, 1, 2, 8, seed=3)
            for step in stream:
                est.partial_fit(step.batch.inputs, step.batch.labels,
                                classes=np.arange(10), task=step.task_id)
            return est.net_.snapshot()

        np.testing.assert_array_equal(first_task_params("PVBF-noDCWR"),
                                      first_task_params("ER-ACE"))

    def test_er_never_touches_a_memory_bank(self, dataset):
        est = ContinualClassifier(method="ER", random_state=0, **SMALL)
        run_stream(est, dataset)
        assert est.bank_ is None

    def test_task_ids_must_not_decrease(self, dataset):
        est = ContinualClassifier(method="ER", random_state=0, **SMALL)
        X = dataset.inputs[:4]
        y = dataset.labels[:4]
        est.partial_fit(X, y, classes=np.arange(10), task=2)
        with pytest.raises(ValueError, match="non-decreasing"):
            est.partial_fit(X, y, task=1)

    def test_training_after_finalize_rejected(self, dataset):
        est = ContinualClassifier(method="ER", random_state=0, **SMALL)
        X, y = dataset.inputs[:4], dataset.labels[:4]
        est.partial_fit(X, y, classes=np.arange(10), task=1)
        est.finish_task()
        with pytest.raises(ValueError, match="finalized"):
            est.partial_fit(X, y, task=1)

    def test_labels_outside_classes_rejected(self):
        est = ContinualClassifier(**SMALL)
        with pytest.raises(ValueError, match="class"):
            est.partial_fit(np.zeros((2, 3)), [0, 7], classes=[0, 1, 2])

    def test_seen_classes_track_stream(self, dataset):
        est = ContinualClassifier(method="ER-ACE", random_state=1, **SMALL)
        stream = make_split_stream(dataset, 3, 2, 8, seed=4)
        seen_after = []
        current = None
        for step in stream:
            if current is not None and step.task_id != current:
                seen_after.append(sorted(est.seen_classes_))
            est.partial_fit(step.batch.inputs, step.batch.labels,
                            classes=np.arange(10), task=step.task_id)
            current = step.task_id
        assert seen_after == [[0, 1], [0, 1, 2, 3]]


class TestDeterminism:
    @pytest.mark.parametrize("method", ["ER", "ER-ACE", "PVBF", "PVBF-noDCWR"])
    def test_same_seed_same_parameters(self, dataset, method):
        runs = []
        for _ in range(2):
            est = ContinualClassifier(method=method, random_state=42, **SMALL)
            run_stream(est, dataset)
            runs.append(est.net_.snapshot())
        np.testing.assert_array_equal(runs[0], runs[1])

    def test_different_seeds_differ(self, dataset):
        a = run_stream(ContinualClassifier(method="ER", random_state=0, **SMALL), dataset)
        b = run_stream(ContinualClassifier(method="ER", random_state=1, **SMALL), dataset)
        assert not np.array_equal(a.net_.snapshot(), b.net_.snapshot())


class TestNestingEquivalences:
    def test_unit_range_pvbf_matches_er_ace(self, dataset):
        ace = ContinualClassifier(method="ER-ACE", random_state=9, **SMALL)
        run_stream(ace, dataset)
        flat = ContinualClassifier(method="PVBF-noDCWR", alpha=1.0, beta=1.0,
                                   random_state=9, **SMALL)
        run_stream(flat, dataset)
        np.testing.assert_array_equal(ace.net_.snapshot(), flat.net_.snapshot())


class TestBoundaries:
    def test_record_count_includes_stream_end(self, dataset):
        est = ContinualClassifier(method="PVBF", random_state=2, **SMALL)
        run_stream(est, dataset, num_tasks=5)
        assert [r.task for r in est.variation_records_] == [1, 2, 3, 4, 5]
        assert est.correlations_.tasks_seen == 5
        assert len(est.snapshots_) == 6  # initial state + one per task

    def test_correlations_in_range_after_first_task(self, dataset):
        est = ContinualClassifier(method="PVBF", random_state=3, **SMALL)
        stream = make_split_stream(dataset, 2, 2, 8, seed=6)
        entries = list(stream)
        for step in entries:
            if step.task_id == 2:
                break
            est.partial_fit(step.batch.inputs, step.batch.labels,
                            classes=np.arange(10), task=1)
        est.finish_task()
        assert est.correlations_.tasks_seen == 1
        assert est.correlations_.values.min() >= 0.5
        assert est.correlations_.values.max() <= 2.0

    def test_zero_lr_gives_zero_deltas(self, dataset):
        est = ContinualClassifier(method="ER", lr=0.0, random_state=4,
                                  hidden_sizes=(16, 12), buffer_capacity=30)
        run_stream(est, dataset, num_tasks=2)
        for record in est.variation_records_:
            assert np.all(record.deltas == 0.0)

    def test_finish_without_task_rejected(self):
        est = ContinualClassifier(**SMALL)
        with pytest.raises(NotFittedError):
            est.finish_task()

    def test_double_finish_rejected(self, dataset):
        est = ContinualClassifier(method="ER", random_state=5, **SMALL)
        est.partial_fit(dataset.inputs[:4], dataset.labels[:4],
                        classes=np.arange(10), task=1)
        est.finish_task()
        with pytest.raises(ValueError, match="finalized"):
            est.finish_task()

    def test_standardizers_share_delta_ordering(self, dataset):
        # all three standardizations are monotone in the raw deltas, so the
        # per-task correlation vectors they induce are identical
        from pvbf.correlation import correlate
        from pvbf.variation import standardize
        est = ContinualClassifier(method="ER", random_state=6, **SMALL)
        run_stream(est, dataset, num_tasks=3)
        for record in est.variation_records_:
            base = None
            for method in ("RR", "ZS", "RS"):
                c = correlate(standardize(record.deltas, method), 0.5, 2.0)
                if base is None:
                    base = c
                else:
                    np.testing.assert_allclose(c, base, atol=1e-9)


class TestInference:
    def test_predict_before_fit_raises(self):
        est = ContinualClassifier(**SMALL)
        with pytest.raises(NotFittedError):
            est.predict(np.zeros((1, 3)))

    def test_decision_function_shape_and_predict_range(self, dataset):
        est = ContinualClassifier(method="PVBF", random_state=7, **SMALL)
        run_stream(est, dataset)
        X = dataset.inputs[dataset.test_indices]
        logits = est.decision_function(X)
        assert logits.shape == (X.shape[0], 10)
        preds = est.predict(X)
        assert np.isin(preds, np.arange(10)).all()

    def test_argmax_tie_breaks_to_lowest_index(self):
        est = ContinualClassifier(**SMALL)
        est.partial_fit(np.zeros((2, 3)), [0, 1], classes=[0, 1, 2], task=1)
        est.net_.params[:] = 0.0  # all-zero network: every logit ties at 0
        preds = est.predict(np.random.default_rng(8).normal(size=(5, 3)))
        assert np.all(preds == 0)


class TestSklearnSurface:
    def test_get_params_round_trip(self):
        est = ContinualClassifier(method="ER-ACE", lr=0.3, alpha=0.7)
        params = est.get_params()
        assert params["method"] == "ER-ACE"
        assert params["lr"] == 0.3
        rebuilt = ContinualClassifier(**params)
        assert rebuilt.get_params() == params

    def test_clone_keeps_configuration(self):
        est = ContinualClassifier(method="PVBF", p=0.25)
        cloned = clone(est)
        assert cloned.p == 0.25 and cloned.method == "PVBF"

    def test_fit_predict_single_task(self):
        ds = gen_blobs(3, 4, 100, 0.2, seed=12)
        est = ContinualClassifier(method="ER", hidden_sizes=(16,), lr=0.3,
                                  buffer_capacity=20, batch_size=8, random_state=13)
        X = ds.inputs[ds.train_indices]
        y = ds.labels[ds.train_indices]
        est.fit(X, y)
        score = est.score(ds.inputs[ds.test_indices], ds.labels[ds.test_indices])
        assert score > 0.8

    def test_unknown_method_rejected(self):
        est = ContinualClassifier(method="bogus", **{k: v for k, v in SMALL.items()})
        with pytest.raises(ValueError, match="unknown method"):
            est.partial_fit(np.zeros((2, 3)), [0, 1], classes=[0, 1], task=1)
