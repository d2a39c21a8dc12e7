"""Datasets: random-label memorisation, label corruption, IDX (MNIST) files."""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import IdxConsistencyError, IdxFormatError

IDX_IMAGES = 0x00000803
IDX_LABELS = 0x00000801


@dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray
    labels: np.ndarray
    n_classes: int
    name: str = ""
    seed: int | None = None

    def __post_init__(self):
        if len(self.inputs) != len(self.labels):
            raise ValueError("inputs and labels differ in length")
        integer = np.issubdtype(np.asarray(self.labels).dtype, np.integer)
        if integer and len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError("labels must lie in [0, n_classes)")

    def __len__(self):
        return len(self.labels)

    @property
    def input_dim(self):
        return self.inputs.shape[1]

    def subset(self, idx, name=None) -> "Dataset":
        return replace(self, inputs=self.inputs[idx], labels=self.labels[idx],
                       name=name or self.name)


def make_memorization_dataset(n_points: int, input_dim: int = 2, seed: int = 0,
                              allow_empty: bool = False) -> Dataset:
    """Uniform inputs on ``[-1, 1]^input_dim`` with independent fair binary labels."""
    if n_points < 1 and not (allow_empty and n_points == 0):
        raise ValueError("n_points must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6D656D]))
    x = rng.uniform(-1.0, 1.0, size=(n_points, input_dim))
    y = rng.integers(0, 2, size=n_points)
    return Dataset(x, y, 2, name=f"memorize{input_dim}d({n_points})", seed=seed)


def corrupt_labels(ds: Dataset, fraction: float, n_classes: int | None = None,
                   seed: int = 0) -> Dataset:
    """Resample the labels of a uniformly chosen ``floor(fraction * N)`` subset.

    New labels are uniform over all classes, so some resamples keep their
    original value.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    n_classes = ds.n_classes if n_classes is None else n_classes
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x636F72]))
    n = int(np.floor(fraction * len(ds)))
    idx = rng.choice(len(ds), size=n, replace=False)
    labels = ds.labels.copy()
    labels[idx] = rng.integers(0, n_classes, size=n)
    return replace(ds, labels=labels, n_classes=n_classes,
                   name=f"{ds.name}+corrupt({fraction:g})")


def _read_bytes(path) -> bytes:
    data = Path(path).read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def load_idx(images_path, labels_path, name="mnist") -> Dataset:
    """Parse a pair of IDX files (optionally gzipped); pixels are scaled to [0, 1]."""
    img = _read_bytes(images_path)
    lab = _read_bytes(labels_path)
    if len(img) < 16 or len(lab) < 8:
        raise OSError("IDX file truncated in its header")
    magic, n_img, rows, cols = struct.unpack(">IIII", img[:16])
    if magic != IDX_IMAGES:
        raise IdxFormatError(f"bad image magic 0x{magic:08x}")
    magic, n_lab = struct.unpack(">II", lab[:8])
    if magic != IDX_LABELS:
        raise IdxFormatError(f"bad label magic 0x{magic:08x}")
    if n_img != n_lab:
        raise IdxConsistencyError(f"{n_img} images but {n_lab} labels")
    n_pix = n_img * rows * cols
    if len(img) < 16 + n_pix or len(lab) < 8 + n_lab:
        raise OSError("IDX file truncated")
    pixels = np.frombuffer(img, dtype=np.uint8, count=n_pix, offset=16)
    labels = np.frombuffer(lab, dtype=np.uint8, count=n_lab, offset=8).astype(np.int64)
    x = pixels.reshape(n_img, rows * cols).astype(np.float64) / 255.0
    n_classes = max(10, int(labels.max()) + 1) if n_lab else 10
    return Dataset(x, labels, n_classes, name=name)


def write_idx(images, labels, images_path, labels_path, compress=None) -> None:
    """Write uint8 images ``(N, rows, cols)`` and labels as IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    img = struct.pack(">IIII", IDX_IMAGES, n, rows, cols) + images.tobytes()
    lab = struct.pack(">II", IDX_LABELS, len(labels)) + labels.tobytes()
    for path, blob in ((images_path, img), (labels_path, lab)):
        gz = str(path).endswith(".gz") if compress is None else compress
        Path(path).write_bytes(gzip.compress(blob, mtime=0) if gz else blob)


DATA_DIR = Path(__file__).resolve().parents[2] / "data" / "mnist5k"


def default_mnist_paths(root=None):
    root = Path(root) if root is not None else DATA_DIR
    return root / "images-idx3-ubyte.gz", root / "labels-idx1-ubyte.gz"
