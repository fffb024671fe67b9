"""Motion sequences: time stamped series of compatible shapes with optional labels."""
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from motioncast.general_utils.exceptions import IncompatibleShapesError
from motioncast.geometry.shapes import Shape


@dataclass(frozen=True, eq=False)
class MotionSequence:
    """Sequence of poses of one actor.

    :param frames: Shapes sharing topology, dimension and (for curves of equal size) sampling.
    :param frame_times: Strictly increasing time stamps in seconds, one per frame.
    :param action_label: Action class, possibly corrupted or predicted.
    :param motion_labels: Region movement tags such as "right hand waving".
    :param id: Identifier, unique within a library.
    :param ground_truth_label: Action class the sequence was generated from. Survives label corruption.
    """

    frames: Tuple[Shape, ...]
    frame_times: np.ndarray
    action_label: Optional[str] = None
    motion_labels: Tuple[str, ...] = ()
    id: str = "sequence"
    ground_truth_label: Optional[str] = None

    def __post_init__(self) -> None:
        frames = tuple(self.frames)
        times = np.array(self.frame_times, dtype=float)
        if len(frames) < 2:
            raise IncompatibleShapesError("A motion sequence needs at least 2 frames.")
        if times.shape != (len(frames),):
            raise IncompatibleShapesError(
                f"Expected {len(frames)} frame times, got {times.shape}."
            )
        if np.any(np.diff(times) <= 0):
            raise IncompatibleShapesError("Frame times must be strictly increasing.")
        first = frames[0]
        for frame in frames[1:]:
            if (
                frame.topology != first.topology
                or frame.n != first.n
                or frame.dim != first.dim
                or (frame.rows, frame.cols) != (first.rows, first.cols)
            ):
                raise IncompatibleShapesError(
                    f"Frames of sequence '{self.id}' do not share one sampling."
                )
        times.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_times", times)
        object.__setattr__(self, "motion_labels", tuple(self.motion_labels))

    @property
    def nb_frames(self) -> int:
        return len(self.frames)

    @property
    def region_tags(self) -> Optional[Tuple[str, ...]]:
        return self.frames[0].region_tags

    def with_labels(
        self, action_label: Optional[str], motion_labels: Optional[Sequence[str]] = None
    ) -> "MotionSequence":
        if motion_labels is None:
            motion_labels = self.motion_labels
        return replace(self, action_label=action_label, motion_labels=tuple(motion_labels))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "action_label": self.action_label,
            "ground_truth_label": self.ground_truth_label,
            "motion_labels": list(self.motion_labels),
            "frame_times": self.frame_times.tolist(),
            "frames": [frame.to_dict() for frame in self.frames],
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "MotionSequence":
        return cls(
            frames=tuple(Shape.from_dict(frame) for frame in payload["frames"]),
            frame_times=np.asarray(payload["frame_times"], dtype=float),
            action_label=payload.get("action_label"),
            motion_labels=tuple(payload.get("motion_labels") or ()),
            id=payload.get("id", "sequence"),
            ground_truth_label=payload.get("ground_truth_label"),
        )
