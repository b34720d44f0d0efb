import csv

import numpy as np
import pytest

from mvaegen import (
    LOSS_COLUMNS,
    encode_images,
    export_embeddings,
    export_loss_curves,
)
from mvaegen.errors import ConfigError
from mvaegen.mnde import _HEADER


def test_encode_shape_and_dtype(trained_tiny):
    _, result, test_x, _ = trained_tiny
    z = encode_images(result.model, test_x)
    assert z.shape == (test_x.shape[0], 2)
    assert z.dtype == np.float32


def test_encode_batching_matches_single_shot(trained_tiny):
    _, result, test_x, _ = trained_tiny
    whole = encode_images(result.model, test_x, batch_size=1024)
    chunked = encode_images(result.model, test_x, batch_size=5)
    np.testing.assert_array_equal(whole, chunked)


def test_export_writes_header_matching_data(trained_tiny, tmp_path):
    _, result, test_x, labels = trained_tiny
    path = export_embeddings(result.model, test_x, labels, tmp_path / "e.mnde")
    raw = path.read_bytes()
    _, version, flags, n, d, dtype_code = _HEADER.unpack_from(raw, 0)
    assert (version, flags, dtype_code) == (1, 1, 1)
    assert (n, d) == (test_x.shape[0], 2)
    stored = np.frombuffer(raw, dtype="<f4", count=n * d, offset=_HEADER.size)
    np.testing.assert_array_equal(
        stored.reshape(n, d), encode_images(result.model, test_x)
    )
    stored_labels = np.frombuffer(raw, dtype="<u2", offset=_HEADER.size + n * d * 4)
    np.testing.assert_array_equal(stored_labels, labels)


def test_reexport_is_bit_identical(trained_tiny, tmp_path):
    _, result, test_x, labels = trained_tiny
    a = export_embeddings(result.model, test_x, labels, tmp_path / "a.mnde")
    b = export_embeddings(result.model, test_x, labels, tmp_path / "b.mnde")
    assert a.read_bytes() == b.read_bytes()


def test_sampled_export_reproducible_but_not_the_mean(trained_tiny):
    _, result, test_x, _ = trained_tiny
    mean = encode_images(result.model, test_x)
    s1 = encode_images(result.model, test_x, sample=True, seed=5)
    s2 = encode_images(result.model, test_x, sample=True, seed=5)
    s3 = encode_images(result.model, test_x, sample=True, seed=6)
    np.testing.assert_array_equal(s1, s2)
    assert not np.array_equal(s1, mean)
    assert not np.array_equal(s1, s3)


def test_label_count_mismatch_rejected(trained_tiny, tmp_path):
    _, result, test_x, labels = trained_tiny
    with pytest.raises(ConfigError):
        export_embeddings(result.model, test_x, labels[:-1], tmp_path / "x.mnde")


def test_wrong_image_width_rejected(trained_tiny):
    _, result, test_x, _ = trained_tiny
    with pytest.raises(ConfigError):
        encode_images(result.model, test_x[:, :-1])


def test_loss_csv_columns_and_exact_values(trained_tiny, tmp_path):
    _, result, _, _ = trained_tiny
    path = export_loss_curves(result.history, tmp_path / "losses.csv")
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "epoch,reconstruction,kl,categorical,total"
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["epoch"] for r in rows] == [str(h.epoch) for h in result.history]
    for row, h in zip(rows, result.history):
        assert float(row["reconstruction"]) == h.reconstruction
        assert float(row["kl"]) == h.kl
        assert float(row["categorical"]) == h.categorical
        assert float(row["total"]) == h.total
    assert tuple(rows[0].keys()) == LOSS_COLUMNS
