import numpy as np
import pytest
from scipy.stats import chisquare
from sklearn.linear_model import LogisticRegression

from baybfed.data import PartitionSpec, generate_dataset, partition
from baybfed.errors import InvalidInputError


def test_deterministic():
    a = generate_dataset(300, 4, 3, 2.0, seed=11)
    b = generate_dataset(300, 4, 3, 2.0, seed=11)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_balanced_classes():
    d = generate_dataset(1000, 10, 8, 3.0, seed=0)
    assert np.bincount(d.labels).tolist() == [100] * 10


def test_separated_blobs_linearly_separable():
    train = generate_dataset(3000, 10, 8, 10.0, seed=5)
    clf = LogisticRegression(max_iter=2000).fit(train.features[:2000], train.labels[:2000])
    assert clf.score(train.features[2000:], train.labels[2000:]) > 0.95


def test_zero_separation_is_chance():
    train = generate_dataset(3000, 10, 8, 0.0, seed=5)
    clf = LogisticRegression(max_iter=2000).fit(train.features[:2000], train.labels[:2000])
    assert clf.score(train.features[2000:], train.labels[2000:]) < 0.2


@pytest.mark.parametrize("args", [(100, 1, 8, 1.0), (100, 3, 1, 1.0), (100, 3, 4, -1.0)])
def test_invalid(args):
    with pytest.raises(InvalidInputError):
        generate_dataset(*args, seed=0)


class TestPartition:
    data = generate_dataset(3000, 10, 8, 4.0, seed=1)

    def test_iid_histograms_match_global(self):
        shards = partition(self.data, PartitionSpec(10, 0.0, seed=3))
        for s in shards:
            counts = np.bincount(s.labels, minlength=10)
            # chi-square sanity bound against the uniform global histogram
            assert chisquare(counts).pvalue > 1e-4

    def test_degree_one_single_label(self):
        shards = partition(self.data, PartitionSpec(30, 1.0, seed=3))
        for i, s in enumerate(shards):
            assert set(s.labels.tolist()) == {i % 10}

    def test_half_degree_main_share(self):
        data = generate_dataset(1000, 10, 8, 4.0, seed=2)
        shards = partition(data, PartitionSpec(10, 0.5, seed=4))
        for i, s in enumerate(shards):
            assert len(s) == 100
            assert np.sum(s.labels == i % 10) >= 50

    def test_disjoint_and_sized(self):
        shards = partition(self.data, PartitionSpec(30, 0.7, seed=3))
        rows = np.concatenate([s.features for s in shards])
        assert rows.shape[0] == 3000
        assert np.unique(rows, axis=0).shape[0] == 3000

    def test_deterministic(self):
        a = partition(self.data, PartitionSpec(7, 0.3, seed=9))
        b = partition(self.data, PartitionSpec(7, 0.3, seed=9))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.labels, y.labels)

    def test_too_many_clients(self):
        small = generate_dataset(20, 2, 2, 1.0, seed=0)
        with pytest.raises(InvalidInputError):
            partition(small, PartitionSpec(21, 0.0))
