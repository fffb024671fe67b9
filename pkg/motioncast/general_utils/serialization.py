"""JSON and CSV persistence of shapes, sequences, libraries, configs and result tables.

JSON is written with sorted keys and a trailing newline, CSV with full float precision, so repeated runs with the
same inputs produce byte-identical files.
"""
import json
import os
from typing import Any, Dict, Optional, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel

from motioncast.annotation.library import PrimitiveLibrary
from motioncast.general_utils.exceptions import MotionCastError
from motioncast.geometry.shapes import Shape
from motioncast.similarity.motion_sequence import MotionSequence

ConfigT = TypeVar("ConfigT", bound=BaseModel)

MANIFEST_VERSION = 1


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(payload: Any, file_path: str) -> str:
    with open(file_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2, default=_to_builtin)
        handle.write("\n")
    return file_path


def read_json(file_path: str) -> Any:
    try:
        with open(file_path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as error:
        raise MotionCastError(f"{file_path} is not valid JSON: {error}") from error


def write_csv(frame: pd.DataFrame, file_path: str, index: bool = True) -> str:
    frame.to_csv(file_path, index=index, float_format="%.17g")
    return file_path


def read_matrix_csv(file_path: str) -> pd.DataFrame:
    frame = pd.read_csv(file_path, index_col=0, float_precision="round_trip")
    frame.index = frame.index.astype(str)
    return frame


def read_config(
    config_class: Type[ConfigT],
    file_path: Optional[str] = None,
    section: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ConfigT:
    """Build a config from defaults, then a JSON file (optionally one section of it), then explicit overrides.

    Overrides with value None are ignored.
    """
    values: Dict[str, Any] = {}
    if file_path:
        payload = read_json(file_path)
        if section is not None:
            payload = payload.get(section, {})
        if not isinstance(payload, dict):
            raise MotionCastError(f"The config in {file_path} must be a JSON object.")
        values.update(payload)
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    return config_class(**values)


def load_shape(file_path: str) -> Shape:
    return Shape.from_dict(read_json(file_path))


def save_sequence(sequence: MotionSequence, file_path: str) -> str:
    return write_json(sequence.to_dict(), file_path)


def load_sequence(file_path: str) -> MotionSequence:
    return MotionSequence.from_dict(read_json(file_path))


def save_library(
    library: PrimitiveLibrary,
    directory: str,
    manifest_name: str = "library.json",
    sequence_files: Optional[Dict[str, str]] = None,
) -> str:
    """Write a library manifest listing every sequence file with its labels.

    :param sequence_files: Existing sequence files per entry id. Entries without a file are written to
        <directory>/sequences/<id>.json.
    :return: Path of the manifest.
    """
    os.makedirs(directory, exist_ok=True)
    sequence_files = dict(sequence_files or {})
    records = []
    for entry in library.entries:
        if entry.id not in sequence_files:
            os.makedirs(os.path.join(directory, "sequences"), exist_ok=True)
            sequence_files[entry.id] = save_sequence(
                entry, os.path.join(directory, "sequences", f"{entry.id}.json")
            )
        records.append(
            {
                "id": entry.id,
                "file": os.path.relpath(sequence_files[entry.id], directory),
                "action_label": entry.action_label,
                "ground_truth_label": entry.ground_truth_label,
                "motion_labels": list(entry.motion_labels),
            }
        )
    return write_json(
        {"version": MANIFEST_VERSION, "sequences": records}, os.path.join(directory, manifest_name)
    )


def load_library(manifest_path: str) -> PrimitiveLibrary:
    """Load a library manifest. Labels in the manifest take precedence over labels stored in sequence files."""
    manifest = read_json(manifest_path)
    if "sequences" not in manifest:
        raise MotionCastError(f"{manifest_path} is not a library manifest.")
    base = os.path.dirname(os.path.abspath(manifest_path))
    entries = []
    for record in manifest["sequences"]:
        sequence = load_sequence(os.path.join(base, record["file"]))
        sequence = sequence.with_labels(
            record.get("action_label", sequence.action_label),
            record.get("motion_labels", sequence.motion_labels),
        )
        entries.append(sequence)
    return PrimitiveLibrary(tuple(entries))


def library_files(manifest_path: str) -> Dict[str, str]:
    """Absolute sequence file path per entry id of a manifest."""
    base = os.path.dirname(os.path.abspath(manifest_path))
    return {
        record["id"]: os.path.join(base, record["file"])
        for record in read_json(manifest_path)["sequences"]
    }
