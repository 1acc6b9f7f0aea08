import struct
import zlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA
from convtm.automata import Hyperparams
from convtm.binarize import generate_noisy_xor
from convtm.classifier import MulticlassModel
from convtm.data_io import (ChecksumError, DimensionError, FormatError, RecordTypeError, TruncatedError,
                            VersionError, dataset_from_bytes, dataset_to_bytes, export_dataset_binary,
                            import_dataset_binary, load_idx_dataset, load_idx_images, load_idx_labels,
                            load_model, model_from_bytes, model_to_bytes, save_model, write_idx)

GOLDEN_PIXELS = [[[0x00, 0x10, 0x20], [0x30, 0x40, 0xFF]],
                 [[0x01, 0x02, 0x03], [0x04, 0x05, 0x06]]]


def test_idx_golden_images():
    imgs = load_idx_images(DATA / "two-images.idx")
    assert imgs.shape == (2, 2, 3) and imgs.dtype == np.uint8
    assert imgs.tolist() == GOLDEN_PIXELS


def test_idx_golden_images_gzip():
    assert load_idx_images(DATA / "two-images.idx.gz").tolist() == GOLDEN_PIXELS


def test_idx_golden_labels():
    assert load_idx_labels(DATA / "two-labels.idx").tolist() == [3, 7]


def test_idx_dataset():
    X, y = load_idx_dataset(DATA / "two-images.idx", DATA / "two-labels.idx")
    assert X.shape[0] == y.shape[0] == 2


def test_idx_wrong_record_type(tmp_path):
    with pytest.raises(RecordTypeError, match="wrong record type"):
        load_idx_images(DATA / "two-labels.idx")
    with pytest.raises(RecordTypeError):
        load_idx_labels(DATA / "two-images.idx")


def test_idx_empty_and_truncated(tmp_path):
    empty = tmp_path / "empty.idx"
    empty.write_bytes(b"")
    with pytest.raises(TruncatedError):
        load_idx_images(empty)
    cut = tmp_path / "cut.idx"
    cut.write_bytes((DATA / "two-images.idx").read_bytes()[:-1])
    with pytest.raises(TruncatedError):
        load_idx_images(cut)
    header_only = tmp_path / "hdr.idx"
    header_only.write_bytes((DATA / "two-images.idx").read_bytes()[:10])
    with pytest.raises(TruncatedError):
        load_idx_images(header_only)


def test_idx_trailing_bytes(tmp_path):
    p = tmp_path / "long.idx"
    p.write_bytes((DATA / "two-images.idx").read_bytes() + b"\x00")
    with pytest.raises(DimensionError):
        load_idx_images(p)


def test_idx_count_mismatch(tmp_path):
    p = tmp_path / "labels.idx"
    write_idx(p, np.array([1, 2, 3]))
    with pytest.raises(DimensionError):
        load_idx_dataset(DATA / "two-images.idx", p)


def test_write_idx_roundtrip(tmp_path):
    imgs = np.arange(2 * 2 * 3, dtype=np.uint8).reshape(2, 2, 3)
    write_idx(tmp_path / "x.idx", imgs)
    assert np.array_equal(load_idx_images(tmp_path / "x.idx"), imgs)
    assert (tmp_path / "x.idx").read_bytes()[:4] == b"\x00\x00\x08\x03"


def _trained_xor_model(**kw):
    ds = generate_noisy_xor(300, 500, 0.1, seed=2)
    params = Hyperparams(**{"clauses": 10, "threshold": 15, "specificity": 3.9, "filter_size": 2, "seed": 2, **kw})
    m = MulticlassModel(2, (4, 4), params)
    m.fit(ds.X_train, ds.y_train, 5)
    return m, ds


@pytest.mark.parametrize("kw", [{}, {"weighting": True}, {"filter_size": None},
                                {"boost_true_positive": True, "states": 100}])
def test_model_roundtrip(tmp_path, kw):
    m, ds = _trained_xor_model(**kw)
    save_model(m, tmp_path / "m.ctm")
    back = load_model(tmp_path / "m.ctm")
    assert back.equals(m)
    assert np.array_equal(back.masks, m.masks)
    assert back.evaluate(ds.X_test, ds.y_test).accuracy == m.evaluate(ds.X_test, ds.y_test).accuracy
    assert model_to_bytes(back) == model_to_bytes(m)


def test_model_roundtrip_multilayer():
    params = Hyperparams(clauses=6, threshold=5, specificity=2.0, filter_size=3, stride=2, layers=2, seed=4)
    m = MulticlassModel(3, (7, 9, 2), params)
    assert model_from_bytes(model_to_bytes(m)).equals(m)


def test_model_header_is_little_endian():
    m, _ = _trained_xor_model()
    data = model_to_bytes(m)
    magic, version, _, length = struct.unpack_from("<4sHHQ", data)
    assert (magic, version, length) == (b"CTMM", 1, len(data) - 20)
    assert struct.unpack_from("<I", data, len(data) - 4)[0] == zlib.crc32(data[16:-4])


def test_corrupt_models_raise_typed_errors():
    m, _ = _trained_xor_model()
    good = model_to_bytes(m)
    flipped = bytearray(good)
    flipped[40] ^= 0x01
    with pytest.raises(ChecksumError):
        model_from_bytes(bytes(flipped))
    with pytest.raises(TruncatedError):
        model_from_bytes(good[:-3])
    with pytest.raises(TruncatedError):
        model_from_bytes(good[:10])
    bad_version = bytearray(good)
    bad_version[4] = 9
    with pytest.raises(VersionError):
        model_from_bytes(bytes(bad_version))
    with pytest.raises(FormatError):
        model_from_bytes(b"XXXX" + good[4:])
    with pytest.raises(FormatError):
        model_from_bytes(dataset_to_bytes(np.zeros((1, 2, 2), dtype=np.uint8)))


def test_model_with_bad_states_rejected():
    m, _ = _trained_xor_model()
    m.states[0, 0, 0, 0] = 0          # outside 1..2N, written as-is
    with pytest.raises(FormatError):
        model_from_bytes(model_to_bytes(m))


@settings(max_examples=25)
@given(st.integers(0, 20), st.integers(1, 9), st.integers(1, 9), st.integers(1, 3), st.booleans(),
       st.integers(0, 2**32 - 1))
def test_dataset_roundtrip(n, Y, X, Z, with_labels, seed):
    rng = np.random.default_rng(seed)
    shape = (n, Y, X) if Z == 1 else (n, Y, X, Z)
    images = rng.integers(0, 2, size=shape).astype(np.uint8)
    labels = rng.integers(0, 10, size=n) if with_labels else None
    back_x, back_y = dataset_from_bytes(dataset_to_bytes(images, labels))
    assert back_x.shape == images.shape and np.array_equal(back_x, images)
    if with_labels:
        assert back_y.tolist() == labels.tolist()
    else:
        assert back_y is None


def test_dataset_file_roundtrip_and_byte_identity(tmp_path):
    a, b = generate_noisy_xor(seed=5), generate_noisy_xor(seed=5)
    export_dataset_binary(a.X_train, a.y_train, tmp_path / "a.ctmd")
    export_dataset_binary(b.X_train, b.y_train, tmp_path / "b.ctmd")
    assert (tmp_path / "a.ctmd").read_bytes() == (tmp_path / "b.ctmd").read_bytes()
    X, y = import_dataset_binary(tmp_path / "a.ctmd")
    assert np.array_equal(X, a.X_train) and np.array_equal(y, a.y_train)


def test_dataset_corrupt_header():
    data = bytearray(dataset_to_bytes(np.ones((3, 4, 4), dtype=np.uint8), np.arange(3)))
    data[16] ^= 0xFF
    with pytest.raises(ChecksumError):
        dataset_from_bytes(bytes(data))
    with pytest.raises(TruncatedError):
        dataset_from_bytes(bytes(data[:12]))


def test_dataset_rejects_grey_images():
    with pytest.raises(ValueError):
        dataset_to_bytes(np.full((1, 2, 2), 7, dtype=np.uint8))
