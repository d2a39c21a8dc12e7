import gzip
import struct

import numpy as np
import pytest

from relu_regions.data import (
    Dataset, corrupt_labels, default_mnist_paths, load_idx, make_memorization_dataset, write_idx,
)
from relu_regions.errors import IdxConsistencyError, IdxFormatError


class TestMemorisation:
    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            make_memorization_dataset(0)
        assert len(make_memorization_dataset(0, allow_empty=True)) == 0

    def test_deterministic(self):
        a = make_memorization_dataset(50, seed=3)
        b = make_memorization_dataset(50, seed=3)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_distribution(self):
        ds = make_memorization_dataset(100_000, seed=1)
        assert abs(ds.labels.mean() - 0.5) < 0.01
        assert ds.inputs.min() >= -1 and ds.inputs.max() <= 1
        assert ds.input_dim == 2


class TestCorruption:
    def base(self, n=100_000):
        rng = np.random.default_rng(0)
        return Dataset(rng.normal(size=(n, 2)), rng.integers(0, 10, n), 10)

    def test_zero_fraction(self):
        ds = self.base(1000)
        np.testing.assert_array_equal(corrupt_labels(ds, 0.0).labels, ds.labels)

    def test_full_corruption_changes_ninety_percent(self):
        ds = self.base()
        changed = np.mean(corrupt_labels(ds, 1.0, seed=4).labels != ds.labels)
        assert abs(changed - 0.9) < 0.01

    def test_half_touches_exactly_half(self):
        ds = self.base(1001)
        # force every resample to differ so the touched set is visible
        shifted = Dataset(ds.inputs, ds.labels, 10)
        out = corrupt_labels(shifted, 0.5, n_classes=10, seed=2)
        rng = np.random.default_rng(np.random.SeedSequence([2, 0x636F72]))
        idx = rng.choice(1001, size=500, replace=False)
        assert len(idx) == 1001 // 2
        untouched = np.setdiff1d(np.arange(1001), idx)
        np.testing.assert_array_equal(out.labels[untouched], ds.labels[untouched])

    def test_fraction_range(self):
        with pytest.raises(ValueError):
            corrupt_labels(self.base(10), 1.5)


class TestIdx:
    def write_fixture(self, tmp_path, gz=False):
        images = np.array([[[0, 255], [128, 7]], [[1, 2], [3, 4]]], dtype=np.uint8)
        labels = np.array([3, 9], dtype=np.uint8)
        suffix = ".gz" if gz else ""
        ip, lp = tmp_path / f"img{suffix}", tmp_path / f"lab{suffix}"
        write_idx(images, labels, ip, lp)
        return images, labels, ip, lp

    @pytest.mark.parametrize("gz", [False, True])
    def test_round_trip(self, tmp_path, gz):
        images, labels, ip, lp = self.write_fixture(tmp_path, gz)
        ds = load_idx(ip, lp)
        np.testing.assert_array_equal(np.round(ds.inputs * 255).astype(np.uint8), images.reshape(2, 4))
        np.testing.assert_array_equal(ds.labels, labels)
        assert ds.inputs.max() == 1.0

    def test_bad_magic(self, tmp_path):
        _, _, ip, lp = self.write_fixture(tmp_path)
        raw = bytearray(ip.read_bytes())
        raw[:4] = struct.pack(">I", 0x00000802)
        ip.write_bytes(bytes(raw))
        with pytest.raises(IdxFormatError):
            load_idx(ip, lp)

    def test_count_mismatch(self, tmp_path):
        _, _, ip, lp = self.write_fixture(tmp_path)
        lp.write_bytes(struct.pack(">II", 0x00000801, 3) + bytes([1, 2, 3]))
        with pytest.raises(IdxConsistencyError):
            load_idx(ip, lp)

    def test_truncated(self, tmp_path):
        _, _, ip, lp = self.write_fixture(tmp_path)
        ip.write_bytes(ip.read_bytes()[:-3])
        with pytest.raises(OSError):
            load_idx(ip, lp)

    def test_bundled_mnist_subset(self):
        ds = load_idx(*default_mnist_paths())
        assert len(ds) == 5000 and ds.input_dim == 784
        assert set(np.unique(ds.labels)) == set(range(10))
        assert 0.0 <= ds.inputs.min() and ds.inputs.max() <= 1.0
