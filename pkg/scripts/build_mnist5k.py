"""Convert the 5000-image MNIST sample shipped in the mlxtend wheel into IDX files.

    pip download --no-deps -d /tmp/wheels mlxtend
    python scripts/build_mnist5k.py /tmp/wheels/mlxtend-*.whl data/mnist5k
"""
import gzip
import io
import sys
import zipfile
from pathlib import Path

import numpy as np

from relu_regions.data import write_idx


def main(wheel, out_dir):
    with zipfile.ZipFile(wheel) as zf:
        raw = gzip.decompress(zf.read("mlxtend/data/data/mnist_5k.csv.gz"))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
    images = table[:, :-1].reshape(-1, 28, 28)
    labels = table[:, -1]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(images, labels, out / "images-idx3-ubyte.gz", out / "labels-idx1-ubyte.gz")
    print(f"wrote {len(labels)} images to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
