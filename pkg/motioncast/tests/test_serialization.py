import os

import numpy as np
import pandas as pd
import pytest

from motioncast.config.geometry_config import GeodesicConfig
from motioncast.general_utils.exceptions import MotionCastError
from motioncast.general_utils.serialization import (
    library_files,
    load_library,
    load_sequence,
    load_shape,
    read_config,
    read_json,
    read_matrix_csv,
    save_library,
    save_sequence,
    write_csv,
    write_json,
)
from motioncast.tests.make_data.create_data import create_blob, create_small_library


@pytest.fixture(scope="module")
def library():
    return create_small_library(per_class=2)


def test_write_json_is_sorted_and_ends_with_newline(tmp_path):
    path = write_json({"b": 1, "a": np.float64(0.5), "c": np.arange(2)}, str(tmp_path / "x.json"))
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()

    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert read_json(path) == {"a": 0.5, "b": 1, "c": [0, 1]}


def test_read_json_rejects_invalid_files(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(MotionCastError):
        read_json(str(path))


def test_matrix_csv_keeps_full_precision(tmp_path):
    frame = pd.DataFrame(
        [[0.0, 1 / 3], [1 / 3, 0.0]], index=["wave_000", "bend_000"], columns=["wave_000", "bend_000"]
    )
    loaded = read_matrix_csv(write_csv(frame, str(tmp_path / "m.csv")))

    assert loaded.index.tolist() == ["wave_000", "bend_000"]
    assert loaded.to_numpy()[0, 1] == 1 / 3


def test_shape_and_sequence_files(tmp_path, library):
    shape = create_blob(16)
    shape_path = write_json(shape.to_dict(), str(tmp_path / "shape.json"))
    assert np.array_equal(load_shape(shape_path).points, shape.points)

    sequence = library.entries[0]
    loaded = load_sequence(save_sequence(sequence, str(tmp_path / "seq.json")))
    assert loaded.to_dict() == sequence.to_dict()


def test_library_round_trip(tmp_path, library):
    manifest = save_library(library, str(tmp_path))
    loaded = load_library(manifest)

    assert loaded.ids == library.ids
    assert loaded.labels == library.labels
    assert [entry.motion_labels for entry in loaded.entries] == [
        entry.motion_labels for entry in library.entries
    ]
    assert read_json(manifest)["version"] == 1
    assert os.path.isfile(os.path.join(str(tmp_path), "sequences", "wave_000.json"))


def test_manifest_labels_override_sequence_files(tmp_path, library):
    save_library(library, str(tmp_path / "clean"))
    corrupted = library.relabel({"wave_000": "jump"})
    manifest = save_library(
        corrupted,
        str(tmp_path / "corrupted"),
        sequence_files=library_files(str(tmp_path / "clean" / "library.json")),
    )
    loaded = load_library(manifest)

    assert loaded.get("wave_000").action_label == "jump"
    assert loaded.get("wave_000").ground_truth_label == "wave"
    assert not os.path.exists(os.path.join(str(tmp_path), "corrupted", "sequences"))


def test_load_library_needs_a_manifest(tmp_path):
    path = write_json({"ids": []}, str(tmp_path / "library.json"))
    with pytest.raises(MotionCastError):
        load_library(path)


def test_read_config_precedence(tmp_path):
    path = write_json(
        {"geodesic": {"nb_intervals": 4, "max_iters": 200}, "metric": {}}, str(tmp_path / "config.json")
    )

    assert read_config(GeodesicConfig).nb_intervals == 16
    from_file = read_config(GeodesicConfig, path, "geodesic")
    assert (from_file.nb_intervals, from_file.max_iters) == (4, 200)
    overridden = read_config(GeodesicConfig, path, "geodesic", {"nb_intervals": 8, "tol": None})
    assert (overridden.nb_intervals, overridden.max_iters, overridden.tol) == (8, 200, 1e-8)
    assert read_config(GeodesicConfig, path, "alignment").nb_intervals == 16


def test_read_config_rejects_non_objects(tmp_path):
    path = write_json([1, 2], str(tmp_path / "config.json"))
    with pytest.raises(MotionCastError):
        read_config(GeodesicConfig, path)
