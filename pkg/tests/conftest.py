"""Shared test scaffolding: finite-difference oracles, a forced-draw rng
stub, and deterministic desk-scale image corpora written through the real
dataset file formats.
"""

import os

import numpy as np
import pytest

from pogd.data import write_cifar10, write_mnist_idx


def rel_err(a, b, floor: float = 1.0) -> float:
    """Guarded relative error: |a-b| / max(floor, |a|, |b|), elementwise max."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(floor, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom))


def central_diff_grad(f, x, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp.flat[i] += h
        xm.flat[i] -= h
        g.flat[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


class FixedRng:
    """rng stub whose uniform draws are a fixed value (scalar or filled array)."""

    def __init__(self, value: float = 0.5):
        self.value = value
        self.calls = 0

    def random(self, size=None):
        self.calls += 1
        if size is None:
            return self.value
        return np.full(size, self.value)


class SequenceRng:
    """rng stub replaying a scripted sequence of uniform draws."""

    def __init__(self, values):
        self.values = list(values)
        self.cursor = 0

    def random(self, size=None):
        if size is None:
            v = self.values[self.cursor]
            self.cursor += 1
            return v
        out = np.array(self.values[self.cursor : self.cursor + size])
        self.cursor += size
        return out


# --- surrogate corpora (real file formats, synthetic desk-scale content) ---

DIGITS_TRAIN = 12000
DIGITS_VAL = 2000


def build_digits_corpus(directory, n_train=DIGITS_TRAIN, n_val=DIGITS_VAL,
                        seed=20240801):
    """Render the sklearn 8x8 handwritten digits up to 28x28 MNIST-format
    IDX files, with deterministic shift/noise augmentation and disjoint
    base images between train and validation."""
    from sklearn.datasets import load_digits

    digits = load_digits()
    base = digits.images  # (1797, 8, 8), values 0..16
    labels = digits.target
    rng = np.random.default_rng(seed)

    train_bases, val_bases = [], []
    for c in range(10):
        idx = rng.permutation(np.flatnonzero(labels == c))
        k = int(round(0.8 * idx.size))
        train_bases.append(idx[:k])
        val_bases.append(idx[k:])
    train_bases = np.concatenate(train_bases)
    val_bases = np.concatenate(val_bases)

    def render(pool, n):
        images = np.empty((n, 28, 28), dtype=np.uint8)
        out_labels = np.empty(n, dtype=np.uint8)
        picks = rng.choice(pool, size=n)
        shifts = rng.integers(-2, 3, size=(n, 2))
        noise = rng.normal(0.0, 6.0, size=(n, 28, 28))
        for i, b in enumerate(picks):
            up = np.kron(base[b], np.ones((3, 3)))  # 24x24
            up = np.pad(up, 2) * (255.0 / 16.0)
            up = np.roll(up, tuple(shifts[i]), axis=(0, 1))
            images[i] = np.clip(up + noise[i], 0, 255).astype(np.uint8)
            out_labels[i] = labels[b]
        return images, out_labels

    os.makedirs(directory, exist_ok=True)
    paths = {
        "images": os.path.join(directory, "train-images-idx3-ubyte"),
        "labels": os.path.join(directory, "train-labels-idx1-ubyte"),
        "val_images": os.path.join(directory, "t10k-images-idx3-ubyte"),
        "val_labels": os.path.join(directory, "t10k-labels-idx1-ubyte"),
    }
    tr_imgs, tr_labels = render(train_bases, n_train)
    va_imgs, va_labels = render(val_bases, n_val)
    write_mnist_idx(tr_imgs, tr_labels, paths["images"], paths["labels"])
    write_mnist_idx(va_imgs, va_labels, paths["val_images"], paths["val_labels"])
    return paths


def build_color_corpus(directory, n_train=2500, n_val=500, seed=20240802):
    """Ten classes of oriented color gratings written as CIFAR-10 binary
    batches: enough signal for a one-epoch smoke run to reduce the loss."""
    rng = np.random.default_rng(seed)
    palette = rng.uniform(0.3, 1.0, size=(10, 3))
    grid = np.arange(32)
    yy, xx = np.meshgrid(grid, grid, indexing="ij")

    def render(n):
        images = np.empty((n, 3, 32, 32), dtype=np.uint8)
        out_labels = (np.arange(n) % 10).astype(np.uint8)
        for i in range(n):
            c = out_labels[i]
            angle = np.pi * c / 10.0
            freq = 0.35 + 0.12 * (c % 5)
            phase = rng.uniform(0, 2 * np.pi)
            wave = np.sin(freq * (np.cos(angle) * xx + np.sin(angle) * yy) + phase)
            for ch in range(3):
                plane = 128.0 + 80.0 * wave * palette[c, ch]
                plane = plane + rng.normal(0.0, 10.0, size=(32, 32))
                images[i, ch] = np.clip(plane, 0, 255).astype(np.uint8)
        perm = rng.permutation(n)
        return images[perm], out_labels[perm]

    os.makedirs(directory, exist_ok=True)
    train_path = os.path.join(directory, "data_batch_1.bin")
    val_path = os.path.join(directory, "test_batch.bin")
    tr_imgs, tr_labels = render(n_train)
    va_imgs, va_labels = render(n_val)
    write_cifar10(tr_imgs, tr_labels, train_path)
    write_cifar10(va_imgs, va_labels, val_path)
    return {"batches": train_path, "val_batch": val_path}


@pytest.fixture(scope="session")
def digits_corpus(tmp_path_factory):
    return build_digits_corpus(tmp_path_factory.mktemp("digits-idx"))


@pytest.fixture(scope="session")
def color_corpus(tmp_path_factory):
    return build_color_corpus(tmp_path_factory.mktemp("color-cifar"))


def mnist_mode_config(paths, run_id, optimizer_lines, seed=0, epochs=5,
                      batch_size=64, subset=None, out=None, iter_log=False,
                      schedule_lines="kind = step\neta0 = 0.01\nfactor = 0.5\nevery = 2"):
    """Config text for a dataset-mode run over MNIST-format IDX files."""
    dataset = [
        "[dataset]",
        "name = mnist",
        f"images = {paths['images']}",
        f"labels = {paths['labels']}",
        f"val_images = {paths['val_images']}",
        f"val_labels = {paths['val_labels']}",
    ]
    if subset is not None:
        dataset.append(f"subset = {subset}")
    run = [
        "[run]",
        f"id = {run_id}",
        f"seed = {seed}",
        f"epochs = {epochs}",
        f"batch_size = {batch_size}",
        f"iter_log = {'true' if iter_log else 'false'}",
    ]
    if out is not None:
        run.append(f"out = {out}")
    return "\n".join(
        run + [""] + dataset
        + ["", "[optimizer]", optimizer_lines]
        + ["", "[schedule]", schedule_lines]
    ) + "\n"


def cifar_mode_config(paths, run_id, optimizer_lines, seed=0, epochs=1,
                      batch_size=32, subset=None, out=None, iter_log=False,
                      schedule_lines="kind = constant\neta0 = 0.01"):
    """Config text for a dataset-mode run over CIFAR-format binary batches."""
    dataset = [
        "[dataset]",
        "name = cifar10",
        f"batches = {paths['batches']}",
        f"val_batch = {paths['val_batch']}",
    ]
    if subset is not None:
        dataset.append(f"subset = {subset}")
    run = [
        "[run]",
        f"id = {run_id}",
        f"seed = {seed}",
        f"epochs = {epochs}",
        f"batch_size = {batch_size}",
        f"iter_log = {'true' if iter_log else 'false'}",
    ]
    if out is not None:
        run.append(f"out = {out}")
    return "\n".join(
        run + [""] + dataset
        + ["", "[optimizer]", optimizer_lines]
        + ["", "[schedule]", schedule_lines]
    ) + "\n"


def make_testfn_config(run_id, fn_name, optimizer_lines, dim=2, x0=None,
                       iters=100, seed=0, out=None,
                       schedule_lines="kind = constant\neta0 = 0.01"):
    """Config text for a testfn-mode run."""
    testfn = ["[testfn]", f"name = {fn_name}", f"dim = {dim}", f"iters = {iters}"]
    if x0 is not None:
        testfn.append("x0 = " + ", ".join(str(v) for v in x0))
    run = ["[run]", f"id = {run_id}", f"seed = {seed}"]
    if out is not None:
        run.append(f"out = {out}")
    return "\n".join(
        run + [""] + testfn
        + ["", "[optimizer]", optimizer_lines]
        + ["", "[schedule]", schedule_lines]
    ) + "\n"


# --- real datasets, when the files have been fetched locally ---

MNIST_FILES = {
    "images": "train-images-idx3-ubyte",
    "labels": "train-labels-idx1-ubyte",
    "val_images": "t10k-images-idx3-ubyte",
    "val_labels": "t10k-labels-idx1-ubyte",
}
CIFAR_TRAIN_FILES = [f"data_batch_{i}.bin" for i in range(1, 6)]
CIFAR_VAL_FILE = "test_batch.bin"


def find_real_mnist():
    root = os.environ.get("MNIST_DIR", os.path.join("data", "mnist"))
    paths = {k: os.path.join(root, v) for k, v in MNIST_FILES.items()}
    if all(os.path.exists(p) for p in paths.values()):
        return paths
    return None


def find_real_cifar():
    root = os.environ.get("CIFAR10_DIR", os.path.join("data", "cifar10"))
    train = [os.path.join(root, f) for f in CIFAR_TRAIN_FILES]
    val = os.path.join(root, CIFAR_VAL_FILE)
    if all(os.path.exists(p) for p in train) and os.path.exists(val):
        return {"batches": ", ".join(train), "val_batch": val}
    return None
