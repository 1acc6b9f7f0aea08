"""IDX ingestion, model persistence and the binarized-dataset cache.

Model and dataset containers share one framing, all integers little-endian:

    magic       4 bytes  (b"CTMM" model, b"CTMD" dataset)
    version     u16
    reserved    u16
    length      u64      payload byte count
    payload     length bytes
    crc32       u32      zlib.crc32 of the payload
"""

from __future__ import annotations

import gzip
import struct
import zlib
from pathlib import Path
from typing import Optional

import numpy as np

from .automata import Hyperparams, state_dtype
from .classifier import MulticlassModel

IDX_IMAGES = 0x00000803
IDX_LABELS = 0x00000801

MODEL_MAGIC = b"CTMM"
DATASET_MAGIC = b"CTMD"
FORMAT_VERSION = 1

_FRAME = struct.Struct("<4sHHQ")
_CRC = struct.Struct("<I")
_MODEL_HEADER = struct.Struct("<BIBIIIIIdIIIIBBIqIIIB")
_DATASET_HEADER = struct.Struct("<IBIIIB")


class FormatError(ValueError):
    """Malformed input file."""


class TruncatedError(FormatError):
    pass


class RecordTypeError(FormatError):
    pass


class DimensionError(FormatError):
    pass


class VersionError(FormatError):
    pass


class ChecksumError(FormatError):
    pass


def _read_bytes(path) -> bytes:
    data = Path(path).read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def _parse_idx(data: bytes, expected_magic: int, ndim: int) -> np.ndarray:
    if len(data) < 4:
        raise TruncatedError(f"IDX file too short for a header ({len(data)} bytes)")
    (magic,) = struct.unpack(">I", data[:4])
    if magic != expected_magic:
        raise RecordTypeError(f"wrong record type: magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    header = 4 + 4 * ndim
    if len(data) < header:
        raise TruncatedError("IDX header truncated")
    dims = struct.unpack(">" + "I" * ndim, data[4:header])
    size = int(np.prod(dims, dtype=np.int64))
    body = len(data) - header
    if body < size:
        raise TruncatedError(f"IDX payload truncated: {body} of {size} bytes")
    if body > size:
        raise DimensionError(f"IDX payload has {body - size} bytes beyond dims {dims}")
    return np.frombuffer(data, dtype=np.uint8, count=size, offset=header).reshape(dims).copy()


def load_idx_images(path) -> np.ndarray:
    """``(n, rows, cols)`` uint8 images from an IDX3 file (optionally gzipped)."""
    return _parse_idx(_read_bytes(path), IDX_IMAGES, 3)


def load_idx_labels(path) -> np.ndarray:
    return _parse_idx(_read_bytes(path), IDX_LABELS, 1).astype(np.int64)


def load_idx_dataset(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DimensionError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    return images, labels


def write_idx(path, array) -> None:
    array = np.asarray(array, dtype=np.uint8)
    magic = {1: IDX_LABELS, 3: IDX_IMAGES}.get(array.ndim)
    if magic is None:
        raise ValueError("IDX writer supports 1-D labels or 3-D images")
    header = struct.pack(">I" + "I" * array.ndim, magic, *array.shape)
    Path(path).write_bytes(header + array.tobytes())


def _frame(magic: bytes, payload: bytes) -> bytes:
    return _FRAME.pack(magic, FORMAT_VERSION, 0, len(payload)) + payload + _CRC.pack(zlib.crc32(payload))


def _unframe(data: bytes, magic: bytes) -> bytes:
    if len(data) < _FRAME.size:
        raise TruncatedError("container shorter than its header")
    got, version, _, length = _FRAME.unpack_from(data)
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format version {version}")
    if len(data) != _FRAME.size + length + _CRC.size:
        raise TruncatedError(f"corrupt length: header says {length} payload bytes, file has "
                             f"{len(data) - _FRAME.size - _CRC.size}")
    payload = data[_FRAME.size:_FRAME.size + length]
    (crc,) = _CRC.unpack_from(data, _FRAME.size + length)
    if zlib.crc32(payload) != crc:
        raise ChecksumError("payload checksum mismatch")
    return payload


def model_to_bytes(model: MulticlassModel) -> bytes:
    p = model.params
    shape = model.image_shape
    Y, X = shape[0], shape[1]
    Z = shape[2] if len(shape) == 3 else 1
    header = _MODEL_HEADER.pack(
        1 if p.convolutional else 0, model.n_classes, len(shape), Y, X, Z,
        p.clauses, p.threshold, p.specificity, p.states, p.filter_size or 0, p.stride, p.layers,
        int(p.weighting), int(p.boost_true_positive), p.epochs, p.seed,
        model.layout.B_X, model.layout.B_Y, model.n_literals, model.states.dtype.itemsize)
    states = model.states.astype(model.states.dtype.newbyteorder("<"), copy=False).tobytes()
    weights = model.weights.astype("<u4").tobytes()
    return _frame(MODEL_MAGIC, header + states + weights)


def model_from_bytes(data: bytes) -> MulticlassModel:
    payload = _unframe(data, MODEL_MAGIC)
    if len(payload) < _MODEL_HEADER.size:
        raise TruncatedError("model header truncated")
    (conv, K, ndim, Y, X, Z, clauses, T, s, N, W, d, layers, weighting, boost, epochs, seed,
     bx, by, L, itemsize) = _MODEL_HEADER.unpack_from(payload)
    params = Hyperparams(clauses=clauses, threshold=T, specificity=s, states=N,
                         filter_size=W if conv else None, stride=d, layers=layers,
                         weighting=bool(weighting), boost_true_positive=bool(boost),
                         epochs=epochs, seed=seed)
    shape = (Y, X) if ndim == 2 else (Y, X, Z)
    model = MulticlassModel(K, shape, params, _init_states=False)
    if (model.layout.B_X, model.layout.B_Y, model.n_literals) != (bx, by, L):
        raise DimensionError("stored layout disagrees with hyperparameters")
    dt = state_dtype(N)
    if dt.itemsize != itemsize:
        raise DimensionError(f"state width {itemsize} does not match N={N}")
    n_states = model.states.size
    n_weights = model.weights.size
    expected = _MODEL_HEADER.size + n_states * itemsize + 4 * n_weights
    if len(payload) != expected:
        raise DimensionError(f"payload is {len(payload)} bytes, expected {expected}")
    off = _MODEL_HEADER.size
    states = np.frombuffer(payload, dtype=dt.newbyteorder("<"), count=n_states, offset=off)
    weights = np.frombuffer(payload, dtype="<u4", count=n_weights, offset=off + n_states * itemsize)
    if states.min() < 1 or states.max() > 2 * N or weights.min() < 1:
        raise FormatError("state or weight values out of range")
    model.states = states.astype(dt).reshape(model.states.shape)
    model.weights = weights.astype(np.int32).reshape(model.weights.shape)
    model.refresh_masks()
    return model


def save_model(model: MulticlassModel, path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> MulticlassModel:
    return model_from_bytes(Path(path).read_bytes())


def dataset_to_bytes(images, labels: Optional[np.ndarray] = None) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim not in (3, 4):
        raise ValueError("images must be (n, Y, X) or (n, Y, X, Z)")
    if images.size and images.max() > 1:
        raise ValueError("dataset cache stores bit images only")
    n, Y, X = images.shape[:3]
    Z = images.shape[3] if images.ndim == 4 else 1
    header = _DATASET_HEADER.pack(n, images.ndim - 1, Y, X, Z, labels is not None)
    body = np.packbits(images.ravel(), bitorder="little").tobytes()
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise ValueError("one label per image required")
        body += labels.astype("<u4").tobytes()
    return _frame(DATASET_MAGIC, header + body)


def dataset_from_bytes(data: bytes) -> tuple[np.ndarray, Optional[np.ndarray]]:
    payload = _unframe(data, DATASET_MAGIC)
    if len(payload) < _DATASET_HEADER.size:
        raise TruncatedError("dataset header truncated")
    n, ndim, Y, X, Z, has_labels = _DATASET_HEADER.unpack_from(payload)
    shape = (n, Y, X) if ndim == 2 else (n, Y, X, Z)
    n_bits = n * Y * X * Z
    n_packed = (n_bits + 7) // 8
    expected = _DATASET_HEADER.size + n_packed + (4 * n if has_labels else 0)
    if len(payload) != expected:
        raise DimensionError(f"payload is {len(payload)} bytes, expected {expected}")
    off = _DATASET_HEADER.size
    packed = np.frombuffer(payload, dtype=np.uint8, count=n_packed, offset=off)
    images = np.unpackbits(packed, count=n_bits, bitorder="little").reshape(shape)
    labels = None
    if has_labels:
        labels = np.frombuffer(payload, dtype="<u4", count=n, offset=off + n_packed).astype(np.int64)
    return images, labels


def export_dataset_binary(images, labels, path) -> None:
    Path(path).write_bytes(dataset_to_bytes(images, labels))


def import_dataset_binary(path) -> tuple[np.ndarray, Optional[np.ndarray]]:
    return dataset_from_bytes(Path(path).read_bytes())
