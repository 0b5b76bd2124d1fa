"""Model file codec.

Layout: 8-byte magic, little-endian uint32 manifest length, UTF-8 JSON manifest,
then the float32 little-endian weight blob in manifest tensor order.
"""

import logging
import struct
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from src.domain.exceptions import (
    BlobLengthMismatchError,
    MissingModelError,
    ModelFileError,
    NotAModelFileError,
    UnsupportedModelVersionError,
)
from src.domain.models import ModelManifest, TensorEntry
from src.infrastructure.config import MODEL_FORMAT_VERSION, MODEL_MAGIC
from src.application.tinynn.network import Network

logger = logging.getLogger(__name__)

_BLOB_DTYPE = np.dtype("<f4")


def manifest_for(net: Network, metadata: dict[str, Any] | None = None) -> ModelManifest:
    merged = dict(net.metadata)
    merged.update(metadata or {})
    return ModelManifest(
        format_version=MODEL_FORMAT_VERSION,
        seed=net.seed,
        layers=net.specs,
        tensors=[TensorEntry(name=name, shape=list(t.shape)) for name, t in net.named_parameters()],
        metadata=merged,
    )


def save_model(net: Network, path: str | Path, metadata: dict[str, Any] | None = None) -> Path:
    path = Path(path)
    manifest = manifest_for(net, metadata).model_dump_json().encode("utf-8")
    blob = b"".join(t.data.astype(_BLOB_DTYPE).tobytes() for t in net.parameters())

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<I", len(manifest)))
        f.write(manifest)
        f.write(blob)
    logger.info(f"Saved model ({net.parameter_count()} parameters) to {path}")
    return path


def read_manifest(path: str | Path) -> tuple[ModelManifest, bytes]:
    path = Path(path)
    if not path.is_file():
        raise MissingModelError(str(path))
    raw = path.read_bytes()

    header = len(MODEL_MAGIC) + 4
    if len(raw) < header or raw[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise NotAModelFileError(str(path))
    (manifest_len,) = struct.unpack("<I", raw[len(MODEL_MAGIC) : header])
    if header + manifest_len > len(raw):
        raise ModelFileError(str(path), "manifest truncated")

    try:
        manifest = ModelManifest.model_validate_json(raw[header : header + manifest_len])
    except ValidationError as e:
        raise ModelFileError(str(path), f"invalid manifest: {e.error_count()} error(s)") from e
    if manifest.format_version != MODEL_FORMAT_VERSION:
        raise UnsupportedModelVersionError(str(path), manifest.format_version)
    return manifest, raw[header + manifest_len :]


def load_model(path: str | Path) -> Network:
    manifest, blob = read_manifest(path)
    net = Network(manifest.layers, seed=manifest.seed, metadata=manifest.metadata)

    named = net.named_parameters()
    declared = [(entry.name, tuple(entry.shape)) for entry in manifest.tensors]
    actual = [(name, tensor.shape) for name, tensor in named]
    if declared != actual:
        raise ModelFileError(str(path), "tensor table does not match layer specs")

    expected = sum(tensor.size for _, tensor in named) * _BLOB_DTYPE.itemsize
    if len(blob) != expected:
        raise BlobLengthMismatchError(str(path), expected, len(blob))

    arrays = []
    offset = 0
    for _, tensor in named:
        arrays.append(np.frombuffer(blob, dtype=_BLOB_DTYPE, count=tensor.size, offset=offset).reshape(tensor.shape))
        offset += tensor.size * _BLOB_DTYPE.itemsize
    net.load_weights(arrays)
    logger.info(f"Loaded model from {path} ({len(manifest.layers)} layers)")
    return net
