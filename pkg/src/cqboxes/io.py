"""JSON documents for classical and quantum-output boxes.

A document is a plain JSON object with ``format`` 1 and a ``kind`` of
"cc" or "cq"; an optional ``metadata`` object carries a label, seed and
tolerance for provenance.
Classical boxes carry their probability table as nested lists.  Quantum
boxes carry one entry per input tuple (keys like "0,1"), each either a
pure state as ``amplitudes`` or a density matrix as ``matrix``; complex
numbers are encoded as [real, imag] pairs throughout.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from cqboxes.boxes import CCBox, CQBox
from cqboxes.quantum import DensityMatrix, PartyStructure, StateVector

__all__ = [
    "BoxDocumentError",
    "box_to_document",
    "document_to_box",
    "save_box",
    "load_box",
]


class BoxDocumentError(ValueError):
    """A box document is malformed; the message names the offending field."""


def _encode_complex(values: np.ndarray) -> list:
    if values.ndim == 1:
        return [[float(v.real), float(v.imag)] for v in values]
    return [_encode_complex(row) for row in values]


def _decode_complex(data: object, field: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise BoxDocumentError(
            f"field '{field}' must hold complex numbers as [real, imag] pairs"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def _key_string(key: tuple[int, ...]) -> str:
    return ",".join(str(v) for v in key)


def _parse_key(text: str, field: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise BoxDocumentError(
            f"field '{field}' has a malformed input key '{text}'"
        ) from exc


def box_to_document(box: CCBox | CQBox, metadata: dict | None = None) -> dict:
    extra = {"metadata": dict(metadata)} if metadata else {}
    if isinstance(box, CCBox):
        return {
            "format": 1,
            "kind": "cc",
            "input_sizes": list(box.input_sizes),
            "output_sizes": list(box.output_sizes),
            "table": box.table.tolist(),
            **extra,
        }
    if isinstance(box, CQBox):
        outputs = {}
        for key in box.inputs:
            name = _key_string(key)
            try:
                state = box.pure_output(key)
            except ValueError:
                outputs[name] = {"matrix": _encode_complex(box.output(key).matrix)}
            else:
                amp = state.amplitudes
                pivot = amp[int(np.argmax(np.abs(amp)))]
                outputs[name] = {
                    "amplitudes": _encode_complex(amp * (abs(pivot) / pivot))
                }
        return {
            "format": 1,
            "kind": "cq",
            "input_sizes": list(box.input_sizes),
            "parties": [
                {"label": label, "dim": int(dim)}
                for label, dim in zip(box.structure.labels, box.structure.dims)
            ],
            "outputs": outputs,
            **extra,
        }
    raise TypeError(f"cannot serialise {type(box).__name__}")


def _require(doc: dict, field: str) -> object:
    if field not in doc:
        raise BoxDocumentError(f"box document is missing required field '{field}'")
    return doc[field]


def document_to_box(doc: dict) -> CCBox | CQBox:
    if not isinstance(doc, dict):
        raise BoxDocumentError("box document must be a JSON object")
    version = doc.get("format", 1)
    if version != 1:
        raise BoxDocumentError(f"unsupported document format {version!r} (expected 1)")
    if "metadata" in doc and not isinstance(doc["metadata"], dict):
        raise BoxDocumentError("field 'metadata' must be an object")
    kind = _require(doc, "kind")
    if kind == "cc":
        input_sizes = tuple(_require(doc, "input_sizes"))
        output_sizes = tuple(_require(doc, "output_sizes"))
        table = np.asarray(_require(doc, "table"), dtype=float)
        try:
            return CCBox(input_sizes, output_sizes, table)
        except ValueError as exc:
            raise BoxDocumentError(f"invalid classical box table: {exc}") from exc
    if kind == "cq":
        input_sizes = tuple(_require(doc, "input_sizes"))
        parties = _require(doc, "parties")
        try:
            labels = tuple(str(p["label"]) for p in parties)
            dims = tuple(int(p["dim"]) for p in parties)
        except (TypeError, KeyError) as exc:
            raise BoxDocumentError(
                "field 'parties' must list objects with 'label' and 'dim'"
            ) from exc
        structure = PartyStructure(tuple(zip(labels, dims)))
        raw = _require(doc, "outputs")
        if not isinstance(raw, dict):
            raise BoxDocumentError("field 'outputs' must be an object keyed by inputs")
        states: dict[tuple[int, ...], StateVector] = {}
        matrices: dict[tuple[int, ...], DensityMatrix] = {}
        for name, entry in raw.items():
            key = _parse_key(name, "outputs")
            if not isinstance(entry, dict) or ("amplitudes" in entry) == ("matrix" in entry):
                raise BoxDocumentError(
                    f"output '{name}' must provide exactly one of 'amplitudes' or 'matrix'"
                )
            try:
                if "amplitudes" in entry:
                    amp = _decode_complex(entry["amplitudes"], f"outputs['{name}'].amplitudes")
                    states[key] = StateVector(amp, structure)
                else:
                    mat = _decode_complex(entry["matrix"], f"outputs['{name}'].matrix")
                    matrices[key] = DensityMatrix(mat, structure)
            except ValueError as exc:
                raise BoxDocumentError(f"output '{name}' is invalid: {exc}") from exc
        try:
            if not matrices:
                return CQBox.from_pure(input_sizes, states)
            outputs = {key: state.density() for key, state in states.items()}
            outputs.update(matrices)
            return CQBox(input_sizes, structure, outputs)
        except ValueError as exc:
            raise BoxDocumentError(f"invalid quantum box: {exc}") from exc
    raise BoxDocumentError(f"unknown box kind '{kind}' (expected 'cc' or 'cq')")


def save_box(box: CCBox | CQBox, path: str | Path, metadata: dict | None = None) -> None:
    document = box_to_document(box, metadata)
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def load_box(path: str | Path) -> CCBox | CQBox:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BoxDocumentError(f"cannot read box document '{path}': {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BoxDocumentError(f"'{path}' is not valid JSON: {exc}") from exc
    return document_to_box(doc)
