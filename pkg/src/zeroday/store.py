from __future__ import annotations

import hashlib
import json
import typing
from pathlib import Path

import numpy as np
from cattrs import Converter

from zeroday.errors import DataError, MissingArtifact

FORMAT_VERSION = 1

# shared converter: every persisted attrs type goes through here so arrays, enums and
# tuples serialise the same way in every artifact
store_converter = Converter()


def unstructure_array(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "data": a.astype(np.float64).ravel().tolist()}


def structure_array(val: dict | list, _) -> np.ndarray:
    if isinstance(val, list):
        return np.asarray(val, dtype=np.float64)
    data = np.asarray(val["data"], dtype=np.float64)
    return data.reshape(val["shape"])


store_converter.register_unstructure_hook(np.ndarray, unstructure_array)
store_converter.register_structure_hook(np.ndarray, structure_array)
# numeric or symbolic parameters such as gamma = "scale"
store_converter.register_structure_hook_func(
    lambda t: t == (float | str), lambda v, _: v if isinstance(v, str) else float(v)
)


def canonical_json(data: typing.Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def fingerprint(data: typing.Any) -> str:
    """sha256 over the canonical JSON form of already-unstructured data."""
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tempfile = path.parent / f"{path.name}.write"
    with tempfile.open("w", encoding="utf-8", newline="") as write_f:
        write_f.write(text)
    tempfile.rename(path)


def save_document(path: Path | str, kind: str, payload: dict) -> Path:
    """Persist a versioned JSON document, `{"format": kind, "version": 1, ...}`."""
    path = Path(path)
    document = {"format": kind, "version": FORMAT_VERSION} | payload
    write_atomic(path, json.dumps(document, indent=2, sort_keys=True) + "\n")
    return path


def load_document(
    path: Path | str, kind: str | tuple[str, ...], producer: str | None = None
) -> dict:
    """Read a document whose format is `kind` (or one of several kinds)."""
    path = Path(path)
    kinds = (kind,) if isinstance(kind, str) else kind
    if not path.exists():
        if producer is not None:
            raise MissingArtifact(path, producer)
        raise DataError(f"{path} does not exist")

    with path.open("r", encoding="utf-8") as read_f:
        try:
            document = json.load(read_f)
        except json.JSONDecodeError as e:
            raise DataError(f"{path} is not valid JSON: {e}") from e

    if not isinstance(document, dict) or document.get("format") not in kinds:
        found = document.get("format") if isinstance(document, dict) else None
        raise DataError(f"{path} holds a {found!r}, not a {' or '.join(kinds)}")
    if document.get("version") != FORMAT_VERSION:
        raise DataError(
            f"{path} is format version {document.get('version')}, "
            f"this build reads version {FORMAT_VERSION}"
        )
    return document
