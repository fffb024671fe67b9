import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import kstest

from motioncast.config.training_config import SuiteConfig
from motioncast.general_utils.exceptions import MotionCastError, UnknownMotionClassError
from motioncast.synthetic.figure import REGION_TAGS
from motioncast.synthetic.generators import (
    MOTION_CLASSES,
    GeneratorSpec,
    corrupt_labels,
    generate,
    generate_suite,
)
from motioncast.tests.make_data.create_data import create_small_library, rotation_matrix


def _points(sequence) -> np.ndarray:
    return np.stack([frame.points for frame in sequence.frames])


def test_generate_is_deterministic():
    spec = GeneratorSpec(class_name="walk", seed=11, noise_sigma=0.01)
    assert generate(spec).to_dict() == generate(spec).to_dict()


@pytest.mark.parametrize("class_name", sorted(MOTION_CLASSES))
def test_every_class_yields_a_labeled_sequence(class_name):
    sequence = generate(GeneratorSpec(class_name=class_name, seed=2))

    assert sequence.nb_frames == 16
    assert sequence.action_label == class_name
    assert sequence.ground_truth_label == class_name
    assert sequence.motion_labels
    assert sequence.id == f"{class_name}_2"
    assert sequence.region_tags == REGION_TAGS
    assert np.allclose(np.diff(sequence.frame_times), 1 / 25)
    assert np.isfinite(_points(sequence)).all()


def test_speed_changes_the_number_of_frames():
    assert generate(GeneratorSpec(class_name="wave", speed_factor=2.0)).nb_frames == 8
    assert generate(GeneratorSpec(class_name="wave", speed_factor=0.5)).nb_frames == 32


def test_spec_validation():
    with pytest.raises(ValidationError):
        GeneratorSpec(class_name="wave", duration_frames=7)
    with pytest.raises(ValidationError):
        GeneratorSpec(class_name="wave", speed_factor=0.0)
    with pytest.raises(ValidationError):
        GeneratorSpec(class_name="wave", noise_sigma=-0.1)
    with pytest.raises(UnknownMotionClassError):
        generate(GeneratorSpec(class_name="fly"))


def test_mirrored_sequences_swap_the_active_side():
    right = generate(GeneratorSpec(class_name="wave", seed=4))
    left = generate(GeneratorSpec(class_name="wave", seed=4, mirror=True))

    assert right.motion_labels == ("right arm raising", "right hand waving")
    assert left.motion_labels == ("left arm raising", "left hand waving")
    assert not np.allclose(_points(right), _points(left))


def test_viewpoint_and_scale_act_on_every_frame():
    base = generate(GeneratorSpec(class_name="bend", seed=6))
    turned = generate(GeneratorSpec(class_name="bend", seed=6, viewpoint_angle=0.4, actor_scale=2.0))

    assert np.allclose(_points(turned), 2.0 * _points(base) @ rotation_matrix(0.4).T)


def test_noise_is_gaussian():
    clean = generate(GeneratorSpec(class_name="jump", seed=9))
    noisy = generate(GeneratorSpec(class_name="jump", seed=9, noise_sigma=0.05))
    residuals = (_points(noisy) - _points(clean)).ravel() / 0.05

    assert kstest(residuals, "norm").pvalue > 1e-3


def test_suite_ids_and_sides():
    library = generate_suite(SuiteConfig(classes=["wave", "jump"], per_class=3, duration_frames=8), 5)

    assert library.ids == ["wave_000", "wave_001", "wave_002", "jump_000", "jump_001", "jump_002"]
    assert library.get("wave_000").motion_labels[0] == "right arm raising"
    assert library.get("wave_001").motion_labels[0] == "left arm raising"
    assert all(7 <= entry.nb_frames <= 9 for entry in library.entries)


def test_suite_is_deterministic():
    suite = SuiteConfig(classes=["spin"], per_class=2, duration_frames=8)
    first = generate_suite(suite, 1)
    second = generate_suite(suite, 1)
    assert [entry.to_dict() for entry in first.entries] == [entry.to_dict() for entry in second.entries]


@pytest.fixture(scope="module")
def library():
    return create_small_library()


def test_uniform_corruption(library):
    result = corrupt_labels(library, 0.25, random_state=1)

    assert len(result.corrupted_ids) == 3
    for entry_id in result.corrupted_ids:
        entry = result.library.get(entry_id)
        assert entry.action_label != entry.ground_truth_label
    unchanged = set(library.ids) - set(result.corrupted_ids)
    assert all(result.library.get(entry_id).action_label == library.get(entry_id).action_label for entry_id in unchanged)


def test_class_targeted_corruption(library):
    result = corrupt_labels(library, 0.5, "class-targeted", ["wave"], random_state=2)

    assert len(result.corrupted_ids) == 2
    assert all(entry_id.startswith("wave_") for entry_id in result.corrupted_ids)


def test_corruption_extremes(library):
    assert corrupt_labels(library, 0.0).corrupted_ids == ()
    everything = corrupt_labels(library, 1.0, random_state=3)
    assert len(everything.corrupted_ids) == len(library)
    assert all(entry.action_label != entry.ground_truth_label for entry in everything.library.entries)


def test_corruption_errors(library):
    with pytest.raises(MotionCastError):
        corrupt_labels(library, 1.5)
    with pytest.raises(MotionCastError):
        corrupt_labels(library, 0.5, "random")
    with pytest.raises(MotionCastError):
        corrupt_labels(library, 0.5, "class-targeted")
    with pytest.raises(MotionCastError):
        corrupt_labels(library, 0.5, "class-targeted", ["walk"])
    with pytest.raises(MotionCastError):
        corrupt_labels(library.subset([0, 1]), 0.5)
