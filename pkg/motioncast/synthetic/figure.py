"""Planar articulated stick figure sampled as a tagged open chain.

The chain visits the joints in the order left hand, left elbow, left shoulder, head, right shoulder, right elbow,
right hand, chest, pelvis, right knee, right foot, left foot, left knee. Limb angles are measured from hanging
straight down, positive values lift a limb away from the body midline.
"""
from dataclasses import dataclass, replace

import numpy as np

JOINT_NAMES = (
    "left_hand",
    "left_elbow",
    "left_shoulder",
    "head",
    "right_shoulder",
    "right_elbow",
    "right_hand",
    "chest",
    "pelvis",
    "right_knee",
    "right_foot",
    "left_foot",
    "left_knee",
)

REGION_TAGS = (
    "hands",
    "arms",
    "arms",
    "head",
    "arms",
    "arms",
    "hands",
    "torso",
    "torso",
    "legs",
    "feet",
    "feet",
    "legs",
)


@dataclass(frozen=True)
class BodyProportions:
    torso: float = 0.5
    neck: float = 0.22
    shoulder_half_width: float = 0.18
    shoulder_drop: float = 0.05
    upper_arm: float = 0.3
    forearm: float = 0.27
    hip_half_width: float = 0.1
    thigh: float = 0.42
    shin: float = 0.42

    def jittered(self, random_generator: np.random.Generator, spread: float = 0.05) -> "BodyProportions":
        """Scale every segment independently by a factor drawn from [1 - spread, 1 + spread]."""
        factors = random_generator.uniform(1.0 - spread, 1.0 + spread, size=9)
        return BodyProportions(
            *(value * factor for value, factor in zip(self.__dict__.values(), factors))
        )


@dataclass(frozen=True)
class Pose:
    """Joint angles in radians plus root placement.

    :param root: Pelvis position.
    :param lean: Upper body rotation around the pelvis, positive leans towards the figure's right (image +x).
    :param head_tilt: Head rotation relative to the upper body.
    :param width: Horizontal compression of the whole figure around the pelvis, used to show turning in place.
    """

    root: tuple = (0.0, 0.0)
    lean: float = 0.0
    head_tilt: float = 0.0
    left_shoulder: float = 0.15
    left_elbow: float = 0.1
    right_shoulder: float = 0.15
    right_elbow: float = 0.1
    left_hip: float = 0.05
    left_knee: float = 0.0
    right_hip: float = 0.05
    right_knee: float = 0.0
    width: float = 1.0

    def mirrored(self) -> "Pose":
        """Swap left and right limbs and mirror the lean."""
        return replace(
            self,
            lean=-self.lean,
            head_tilt=-self.head_tilt,
            left_shoulder=self.right_shoulder,
            left_elbow=self.right_elbow,
            right_shoulder=self.left_shoulder,
            right_elbow=self.left_elbow,
            left_hip=self.right_hip,
            left_knee=self.right_knee,
            right_hip=self.left_hip,
            right_knee=self.left_knee,
        )


def _limb_direction(angle: float, side: float) -> np.ndarray:
    return np.array([side * np.sin(angle), -np.cos(angle)])


def _rotation(angle: float) -> np.ndarray:
    return np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])


def pose_to_points(pose: Pose, body: BodyProportions = BodyProportions()) -> np.ndarray:
    """Forward kinematics of a pose, returning the 13 joint positions in chain order."""
    chest = np.array([0.0, body.torso])
    head = chest + body.neck * np.array([np.sin(pose.head_tilt), np.cos(pose.head_tilt)])
    arms = {}
    for side, name in ((-1.0, "left"), (1.0, "right")):
        shoulder = chest + np.array([side * body.shoulder_half_width, -body.shoulder_drop])
        upper = getattr(pose, f"{name}_shoulder")
        elbow = shoulder + body.upper_arm * _limb_direction(upper, side)
        hand = elbow + body.forearm * _limb_direction(upper + getattr(pose, f"{name}_elbow"), side)
        arms[name] = (shoulder, elbow, hand)
    # the upper body rotates around the pelvis, clockwise for a positive lean
    upper_body = np.stack(
        [
            arms["left"][2],
            arms["left"][1],
            arms["left"][0],
            head,
            arms["right"][0],
            arms["right"][1],
            arms["right"][2],
            chest,
        ]
    ) @ _rotation(-pose.lean).T

    legs = {}
    for side, name in ((-1.0, "left"), (1.0, "right")):
        hip = np.array([side * body.hip_half_width, 0.0])
        thigh_angle = getattr(pose, f"{name}_hip")
        knee = hip + body.thigh * _limb_direction(thigh_angle, side)
        foot = knee + body.shin * _limb_direction(thigh_angle - getattr(pose, f"{name}_knee"), side)
        legs[name] = (knee, foot)

    points = np.vstack(
        [
            upper_body,
            np.zeros((1, 2)),
            legs["right"][0],
            legs["right"][1],
            legs["left"][1],
            legs["left"][0],
        ]
    )
    points[:, 0] *= pose.width
    return points + np.asarray(pose.root, dtype=float)
