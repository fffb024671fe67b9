"""Parametric motion class generators and label corruption.

Every generator maps a phase t in [0, 1] to a pose of the stick figure. Sequences sample that continuous
trajectory, so a faster actor yields fewer frames of the same motion.
"""
import math
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, field_validator

from motioncast.annotation.library import PrimitiveLibrary
from motioncast.config.training_config import SuiteConfig
from motioncast.general_utils.exceptions import MotionCastError, UnknownMotionClassError
from motioncast.general_utils.general_utils import derive_seeds, logger
from motioncast.geometry.shapes import Shape
from motioncast.similarity.motion_sequence import MotionSequence
from motioncast.synthetic.figure import REGION_TAGS, BodyProportions, Pose, pose_to_points

FRAMES_PER_SECOND = 25.0


def _wave(t: float, amplitude: float) -> Pose:
    return Pose(right_shoulder=2.6, right_elbow=0.5 + 0.5 * amplitude * np.sin(4 * np.pi * t))


def _bend(t: float, amplitude: float) -> Pose:
    c = np.sin(np.pi * t)
    return Pose(lean=0.9 * amplitude * c, head_tilt=0.3 * c, left_shoulder=0.15 + 0.2 * c)


def _jump(t: float, amplitude: float) -> Pose:
    height = abs(np.sin(2 * np.pi * t))
    crouch = 1.0 - height
    arms = 0.15 + 2.4 * height
    return Pose(
        root=(0.0, 0.35 * amplitude * height),
        left_shoulder=arms,
        right_shoulder=arms,
        left_hip=0.05 + 0.3 * crouch,
        right_hip=0.05 + 0.3 * crouch,
        left_knee=0.6 * crouch,
        right_knee=0.6 * crouch,
    )


def _walk(t: float, amplitude: float) -> Pose:
    s = np.sin(4 * np.pi * t)
    return Pose(
        left_hip=0.05 + 0.4 * amplitude * s,
        right_hip=0.05 - 0.4 * amplitude * s,
        left_knee=0.5 * max(0.0, -s),
        right_knee=0.5 * max(0.0, s),
        left_shoulder=0.3 - 0.25 * s,
        right_shoulder=0.3 + 0.25 * s,
    )


def _spin(t: float, amplitude: float) -> Pose:
    return Pose(
        width=1.0 - 0.75 * amplitude * (1.0 - np.cos(2 * np.pi * t)) / 2.0,
        head_tilt=0.3 * np.sin(2 * np.pi * t),
        left_shoulder=1.5,
        right_shoulder=1.5,
    )


def _crouch(t: float, amplitude: float) -> Pose:
    c = np.sin(np.pi * t)
    return Pose(
        root=(0.0, -0.3 * amplitude * c),
        left_hip=0.05 + 0.65 * amplitude * c,
        right_hip=0.05 + 0.65 * amplitude * c,
        left_knee=1.5 * amplitude * c,
        right_knee=1.5 * amplitude * c,
        left_shoulder=0.15 + 1.2 * c,
        right_shoulder=0.15 + 1.2 * c,
    )


def _reach(t: float, amplitude: float) -> Pose:
    c = np.sin(np.pi * t)
    return Pose(lean=0.3 * c, right_shoulder=0.15 + 1.4 * amplitude * c, right_elbow=0.1 * (1.0 - c))


@dataclass(frozen=True)
class MotionClass:
    """Generator of one motion class.

    :param pose: Maps (phase, amplitude) to the pose of the unmirrored variant.
    :param motion_labels: Maps the active side ("left" or "right") to the region movement tags.
    """

    pose: Callable[[float, float], Pose]
    motion_labels: Callable[[str], Tuple[str, ...]]


MOTION_CLASSES: Dict[str, MotionClass] = {
    "wave": MotionClass(_wave, lambda side: (f"{side} arm raising", f"{side} hand waving")),
    "bend": MotionClass(_bend, lambda side: (f"torso bending {side}", "head lowering")),
    "jump": MotionClass(_jump, lambda side: ("legs extending", "arms raising")),
    "walk": MotionClass(_walk, lambda side: ("legs alternating", "arms swinging")),
    "spin": MotionClass(_spin, lambda side: (f"whole body turning {side}", "arms extending")),
    "crouch": MotionClass(_crouch, lambda side: ("knees flexing", "torso lowering")),
    "reach": MotionClass(_reach, lambda side: (f"{side} arm extending",)),
}


class GeneratorSpec(BaseModel):
    """Define one synthetic motion sequence.

    :param class_name: One of the keys of MOTION_CLASSES.
    :param duration_frames: Number of frames at speed factor 1. At least 8.
    :param speed_factor: Actor speed. The sequence has round(duration_frames / speed_factor) frames.
    :param viewpoint_angle: In-plane rotation of every frame in radians.
    :param actor_scale: Uniform scale of the figure.
    :param noise_sigma: Standard deviation of i.i.d. Gaussian noise added to every coordinate.
    :param seed: Seed of the limb proportion jitter, the amplitude jitter and the noise.
    :param mirror: Swap the active side of the motion (left instead of right).
    :param sequence_id: Optional id. Defaults to "<class_name>_<seed>".
    """

    class_name: str
    duration_frames: int = 16
    speed_factor: float = 1.0
    viewpoint_angle: float = 0.0
    actor_scale: float = 1.0
    noise_sigma: float = 0.0
    seed: int = 0
    mirror: bool = False
    sequence_id: Optional[str] = None

    @field_validator("duration_frames")
    @classmethod
    def check_duration(cls, value: int) -> int:
        if value < 8:
            raise ValueError("duration_frames must be at least 8.")
        return value

    @field_validator("speed_factor", "actor_scale")
    @classmethod
    def check_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("speed_factor and actor_scale must be positive.")
        return value

    @field_validator("noise_sigma")
    @classmethod
    def check_noise(cls, value: float) -> float:
        if value < 0:
            raise ValueError("noise_sigma must be non-negative.")
        return value


def generate(spec: GeneratorSpec) -> MotionSequence:
    """Generate a deterministic, labeled motion sequence of the stick figure."""
    if spec.class_name not in MOTION_CLASSES:
        raise UnknownMotionClassError(
            f"Unknown motion class '{spec.class_name}'. Known classes: {sorted(MOTION_CLASSES)}."
        )
    motion = MOTION_CLASSES[spec.class_name]
    random_generator = np.random.default_rng(spec.seed)
    body = BodyProportions().jittered(random_generator)
    amplitude = random_generator.uniform(0.85, 1.15)

    nb_frames = max(2, int(round(spec.duration_frames / spec.speed_factor)))
    phases = np.linspace(0.0, 1.0, nb_frames)
    cos_view, sin_view = math.cos(spec.viewpoint_angle), math.sin(spec.viewpoint_angle)
    view = np.array([[cos_view, -sin_view], [sin_view, cos_view]])

    frames = []
    for phase in phases:
        pose = motion.pose(float(phase), amplitude)
        if spec.mirror:
            pose = pose.mirrored()
        points = spec.actor_scale * pose_to_points(pose, body) @ view.T
        if spec.noise_sigma > 0:
            points = points + random_generator.normal(0.0, spec.noise_sigma, size=points.shape)
        frames.append(Shape(points, "chain", region_tags=REGION_TAGS))

    side = "left" if spec.mirror else "right"
    return MotionSequence(
        frames=tuple(frames),
        frame_times=np.arange(nb_frames) / FRAMES_PER_SECOND,
        action_label=spec.class_name,
        motion_labels=motion.motion_labels(side),
        id=spec.sequence_id or f"{spec.class_name}_{spec.seed}",
        ground_truth_label=spec.class_name,
    )


def suite_specs(suite_config: SuiteConfig, random_state: int) -> List[GeneratorSpec]:
    """Draw the generator specs of a suite: per class, alternating sides and random speed, scale and viewpoint."""
    seeds = derive_seeds(random_state, len(suite_config.classes) * suite_config.per_class)
    specs = []
    for class_position, class_name in enumerate(suite_config.classes):
        for index in range(suite_config.per_class):
            seed = seeds[class_position * suite_config.per_class + index]
            random_generator = np.random.default_rng(seed)
            specs.append(
                GeneratorSpec(
                    class_name=class_name,
                    duration_frames=suite_config.duration_frames,
                    speed_factor=random_generator.uniform(*suite_config.speed_range),
                    actor_scale=random_generator.uniform(*suite_config.scale_range),
                    viewpoint_angle=random_generator.uniform(*suite_config.viewpoint_range),
                    noise_sigma=suite_config.noise_sigma,
                    seed=seed,
                    mirror=index % 2 == 1,
                    sequence_id=f"{class_name}_{index:03d}",
                )
            )
    return specs


def generate_suite(
    suite_config: Optional[SuiteConfig] = None, random_state: int = 0
) -> PrimitiveLibrary:
    suite_config = suite_config or SuiteConfig()
    logger(
        f"{datetime.utcnow()}: Start generating {suite_config.per_class} sequences for each of "
        f"{len(suite_config.classes)} classes."
    )
    return PrimitiveLibrary(tuple(generate(spec) for spec in suite_specs(suite_config, random_state)))


@dataclass(frozen=True)
class CorruptionResult:
    library: PrimitiveLibrary
    corrupted_ids: Tuple[str, ...]


def corrupt_labels(
    library: PrimitiveLibrary,
    rate: float,
    mode: Literal["uniform", "class-targeted"] = "uniform",
    classes: Optional[Sequence[str]] = None,
    random_state: int = 0,
) -> CorruptionResult:
    """Relabel exactly floor(rate * n) eligible entries to a random other label.

    :param rate: Share of eligible entries to corrupt, in [0, 1].
    :param mode: "uniform" makes every entry eligible, "class-targeted" only the entries of the named classes.
    :param classes: Classes targeted in class-targeted mode.
    :param random_state: Seed of the entry choice and the new labels.
    :return: CorruptionResult with the relabeled library and the ids of the corrupted entries.
    """
    if not 0.0 <= rate <= 1.0:
        raise MotionCastError(f"Corruption rate must lie in [0, 1], got {rate}.")
    all_labels = library.classes
    if mode == "uniform":
        eligible = list(range(len(library)))
    elif mode == "class-targeted":
        missing = sorted(set(classes or []) - set(all_labels))
        if not classes or missing:
            raise MotionCastError(f"Targeted classes {missing or classes} are not in the library.")
        eligible = [i for i, label in enumerate(library.labels) if label in set(classes)]
    else:
        raise MotionCastError(f"Unknown corruption mode '{mode}'.")

    nb_corrupted = int(math.floor(rate * len(eligible) + 1e-9))
    if nb_corrupted and len(all_labels) < 2:
        raise MotionCastError("Labels can only be corrupted in libraries with at least two classes.")
    random_generator = np.random.default_rng(random_state)
    chosen = sorted(
        int(eligible[i]) for i in random_generator.choice(len(eligible), nb_corrupted, replace=False)
    )
    new_labels = {}
    for index in chosen:
        entry = library.entries[index]
        others = [label for label in all_labels if label != entry.action_label]
        new_labels[entry.id] = others[int(random_generator.integers(len(others)))]
    return CorruptionResult(
        library=library.relabel(new_labels),
        corrupted_ids=tuple(library.entries[i].id for i in chosen),
    )
