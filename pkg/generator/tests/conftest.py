import struct

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mvaegen import MvaeConfig, train_mvae

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("suite")

K = 3
SIDE = 4
IMAGE_DIM = SIDE * SIDE


def idx_bytes(arr: np.ndarray) -> bytes:
    """Serialize a uint8 array in IDX layout (big-endian sizes)."""
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    header = b"\x00\x00\x08" + bytes([arr.ndim])
    header += struct.pack(f">{arr.ndim}I", *arr.shape)
    return header + arr.tobytes()


def make_class_images(rng: np.random.Generator, n: int):
    """(n, SIDE, SIDE) uint8 images with a bright stripe per class, plus labels."""
    labels = rng.integers(0, K, size=n).astype(np.int64)
    imgs = rng.normal(30.0, 10.0, size=(n, IMAGE_DIM))
    for c in range(K):
        imgs[labels == c, c * 5:(c + 1) * 5] += 170.0
    u8 = np.clip(imgs, 0, 255).astype(np.uint8)
    return u8.reshape(n, SIDE, SIDE), labels


def as_float_batch(u8_images: np.ndarray) -> np.ndarray:
    return u8_images.reshape(u8_images.shape[0], -1).astype(np.float32) / 255.0


def tiny_cfg(**overrides) -> MvaeConfig:
    base = dict(
        latent_dims=[2],
        n_components=K,
        beta0=2.0,
        image_dim=IMAGE_DIM,
        hidden=(16, 8),
        epochs=3,
        patience=2,
        batch_size=32,
        lr=1e-3,
        val_fraction=0.2,
        seed=0,
    )
    base.update(overrides)
    return MvaeConfig(**base)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def tiny_corpus():
    """(train_float, test_u8_3d, test_labels) for a 3-class striped-image toy set."""
    rng = np.random.default_rng(0)
    train_u8, _ = make_class_images(rng, 96)
    test_u8, test_labels = make_class_images(rng, 24)
    return as_float_batch(train_u8), test_u8, test_labels


@pytest.fixture(scope="session")
def trained_tiny(tiny_corpus):
    """One trained model at d=2 shared by the export tests."""
    train_x, test_u8, test_labels = tiny_corpus
    cfg = tiny_cfg()
    result = train_mvae(cfg, 2, train_x)
    return cfg, result, as_float_batch(test_u8), test_labels
