"""Dataset ingestion and mini-batch iteration.

File formats (both public standards):

  IDX (MNIST):  big-endian; images file starts with magic 0x00000803 then
                counts N, rows, cols, then N*rows*cols pixel bytes; labels
                file starts with magic 0x00000801 then N, then N label bytes.
  CIFAR-10:     a sequence of 3073-byte records: 1 label byte, then
                1024 R + 1024 G + 1024 B pixel bytes for a 32x32 image.

Loaders normalize pixel bytes by 1/255 into float64. Malformed files raise
DataFormatError; nothing is silently truncated.
"""

import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataFormatError

Array = np.ndarray

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 3073


@dataclass
class Dataset:
    images: Array  # (N, C, H, W) float64
    labels: Array  # (N,) int64
    classes: int
    name: str
    channel_mean: Array | None = None  # set once standardization stats exist
    channel_std: Array | None = None

    def __post_init__(self):
        if self.images.ndim != 4:
            raise DataFormatError(f"images must be 4-D, got {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise DataFormatError(
                f"{self.labels.shape[0]} labels for {self.images.shape[0]} images"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.classes):
            raise DataFormatError(f"labels must lie in [0, {self.classes})")

    @property
    def size(self) -> int:
        return self.images.shape[0]

    def take(self, indices: Array, name: str | None = None) -> "Dataset":
        return replace(
            self,
            images=self.images[indices].copy(),
            labels=self.labels[indices].copy(),
            name=name or self.name,
        )


# --- MNIST IDX ---


def _read_be32(buf: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(buf):
        raise DataFormatError(f"{path}: truncated header")
    return struct.unpack_from(">I", buf, offset)[0]


def load_mnist_idx(images_path, labels_path) -> Dataset:
    with open(images_path, "rb") as f:
        raw = f.read()
    magic = _read_be32(raw, 0, str(images_path))
    if magic != IDX_IMAGES_MAGIC:
        raise DataFormatError(
            f"{images_path}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}"
        )
    n = _read_be32(raw, 4, str(images_path))
    rows = _read_be32(raw, 8, str(images_path))
    cols = _read_be32(raw, 12, str(images_path))
    pixels = raw[16:]
    if len(pixels) != n * rows * cols:
        raise DataFormatError(
            f"{images_path}: {len(pixels)} pixel bytes, expected {n * rows * cols}"
        )
    images = np.frombuffer(pixels, dtype=np.uint8).reshape(n, 1, rows, cols)

    with open(labels_path, "rb") as f:
        raw = f.read()
    magic = _read_be32(raw, 0, str(labels_path))
    if magic != IDX_LABELS_MAGIC:
        raise DataFormatError(
            f"{labels_path}: bad magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}"
        )
    n_labels = _read_be32(raw, 4, str(labels_path))
    label_bytes = raw[8:]
    if len(label_bytes) != n_labels:
        raise DataFormatError(
            f"{labels_path}: {len(label_bytes)} label bytes, expected {n_labels}"
        )
    if n_labels != n:
        raise DataFormatError(f"{n} images but {n_labels} labels")
    labels = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)

    return Dataset(
        images=images.astype(np.float64) / 255.0,
        labels=labels,
        classes=10,
        name="mnist",
    )


def write_mnist_idx(images_u8: Array, labels: Array, images_path, labels_path) -> None:
    """Write uint8 images (N,1,H,W) or (N,H,W) and labels as IDX files."""
    images_u8 = np.asarray(images_u8, dtype=np.uint8)
    if images_u8.ndim == 4:
        images_u8 = images_u8[:, 0]
    n, rows, cols = images_u8.shape
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        f.write(images_u8.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, n))
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())


# --- CIFAR-10 binary ---


def load_cifar10(batch_paths) -> Dataset:
    """Load one or more CIFAR-10 binary batches, concatenated in path order.

    Per-channel mean/std over the loaded images are stored on the dataset so
    a validation split can be standardized with the training statistics.
    """
    if isinstance(batch_paths, (str, bytes)) or not hasattr(batch_paths, "__iter__"):
        batch_paths = [batch_paths]
    parts = []
    for path in batch_paths:
        with open(path, "rb") as f:
            raw = f.read()
        if len(raw) == 0 or len(raw) % CIFAR_RECORD_BYTES != 0:
            raise DataFormatError(
                f"{path}: {len(raw)} bytes is not a whole number of "
                f"{CIFAR_RECORD_BYTES}-byte records"
            )
        parts.append(np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES))
    records = np.concatenate(parts)
    labels = records[:, 0].astype(np.int64)
    if labels.max() >= 10:
        raise DataFormatError(f"label {labels.max()} out of range for 10 classes")
    images = records[:, 1:].reshape(-1, 3, 32, 32).astype(np.float64) / 255.0

    ds = Dataset(images=images, labels=labels, classes=10, name="cifar10")
    ds.channel_mean = images.mean(axis=(0, 2, 3))
    ds.channel_std = images.std(axis=(0, 2, 3))
    return ds


def write_cifar10(images_u8: Array, labels: Array, path) -> None:
    """Write uint8 images (N,3,32,32) and labels as one CIFAR-10 binary batch."""
    images_u8 = np.asarray(images_u8, dtype=np.uint8)
    n = images_u8.shape[0]
    records = np.empty((n, CIFAR_RECORD_BYTES), dtype=np.uint8)
    records[:, 0] = np.asarray(labels, dtype=np.uint8)
    records[:, 1:] = images_u8.reshape(n, -1)
    with open(path, "wb") as f:
        f.write(records.tobytes())


def standardize(dataset: Dataset, mean: Array | None = None,
                std: Array | None = None) -> Dataset:
    """Per-channel (x - mean) / std; defaults to the dataset's own statistics."""
    images = dataset.images
    if mean is None:
        mean = images.mean(axis=(0, 2, 3))
    if std is None:
        std = images.std(axis=(0, 2, 3))
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    out = (images - mean[None, :, None, None]) / std[None, :, None, None]
    return Dataset(
        images=out,
        labels=dataset.labels.copy(),
        classes=dataset.classes,
        name=dataset.name,
        channel_mean=mean,
        channel_std=std,
    )


# --- splits and sampling ---


def _class_indices(dataset: Dataset) -> list:
    return [np.flatnonzero(dataset.labels == c) for c in range(dataset.classes)]


def split(dataset: Dataset, train_fraction: float, rng: np.random.Generator):
    """Stratified disjoint split into (train, held-out)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    left, right = [], []
    for idx in _class_indices(dataset):
        if idx.size == 0:
            continue
        idx = rng.permutation(idx)
        k = int(round(train_fraction * idx.size))
        left.append(idx[:k])
        right.append(idx[k:])
    left = rng.permutation(np.concatenate(left)) if left else np.array([], dtype=int)
    right = rng.permutation(np.concatenate(right)) if right else np.array([], dtype=int)
    if left.size == 0 or right.size == 0:
        raise ValueError(f"split with fraction {train_fraction} left one side empty")
    return dataset.take(left), dataset.take(right)


def subset(dataset: Dataset, n: int, rng: np.random.Generator) -> Dataset:
    """Stratified sample of n items (a shuffled copy when n equals the size).

    Per-class counts follow largest-remainder apportionment, so the label
    distribution is preserved to within one item per class.
    """
    if not 1 <= n <= dataset.size:
        raise ValueError(f"subset size {n} not in [1, {dataset.size}]")
    per_class = _class_indices(dataset)
    counts = np.array([idx.size for idx in per_class], dtype=np.float64)
    exact = n * counts / dataset.size
    base = np.floor(exact).astype(int)
    remainder = n - base.sum()
    order = np.argsort(-(exact - base), kind="stable")
    for c in order[:remainder]:
        base[c] += 1

    chosen = []
    for idx, k in zip(per_class, base):
        if k:
            chosen.append(rng.permutation(idx)[:k])
    all_idx = rng.permutation(np.concatenate(chosen))
    return dataset.take(all_idx)


class BatchIterator:
    """Deterministic shuffled mini-batches; the short final batch is kept.

    Each call to epoch() draws a fresh permutation from the iterator's own
    generator, so successive epochs differ but the whole sequence replays
    exactly under the same seed.
    """

    def __init__(self, dataset: Dataset, batch_size: int, rng: np.random.Generator):
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        self.dataset = dataset
        self.batch_size = batch_size
        self.rng = rng

    @property
    def steps_per_epoch(self) -> int:
        return -(-self.dataset.size // self.batch_size)

    def epoch(self):
        perm = self.rng.permutation(self.dataset.size)
        for start in range(0, perm.size, self.batch_size):
            take = perm[start : start + self.batch_size]
            yield self.dataset.images[take], self.dataset.labels[take]
