"""Labeled motion primitive libraries and annotations."""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

from motioncast.general_utils.exceptions import EmptyLibraryError, MotionCastError
from motioncast.similarity.motion_sequence import MotionSequence


@dataclass(frozen=True, eq=False)
class PrimitiveLibrary:
    """Set of labeled motion sequences.

    Every entry needs an action label and at least one motion label; ids must be unique.
    """

    entries: Tuple[MotionSequence, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        if not entries:
            raise EmptyLibraryError("A primitive library needs at least one entry.")
        seen = set()
        for entry in entries:
            if not entry.action_label:
                raise MotionCastError(f"Library entry '{entry.id}' has no action label.")
            if not entry.motion_labels:
                raise MotionCastError(f"Library entry '{entry.id}' has no motion labels.")
            if entry.id in seen:
                raise MotionCastError(f"Library entry id '{entry.id}' is not unique.")
            seen.add(entry.id)
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> List[str]:
        return [entry.id for entry in self.entries]

    @property
    def labels(self) -> List[str]:
        return [entry.action_label for entry in self.entries]

    @property
    def classes(self) -> List[str]:
        return sorted(set(self.labels))

    @property
    def class_index(self) -> Dict[str, List[str]]:
        index: Dict[str, List[str]] = {label: [] for label in self.classes}
        for entry in self.entries:
            index[entry.action_label].append(entry.id)
        return index

    def get(self, entry_id: str) -> MotionSequence:
        for entry in self.entries:
            if entry.id == entry_id:
                return entry
        raise KeyError(entry_id)

    def subset(self, indices: Sequence[int]) -> "PrimitiveLibrary":
        return PrimitiveLibrary(tuple(self.entries[index] for index in indices))

    def without_classes(self, classes: Sequence[str]) -> "PrimitiveLibrary":
        return PrimitiveLibrary(
            tuple(entry for entry in self.entries if entry.action_label not in set(classes))
        )

    def relabel(self, new_labels: Mapping[str, str]) -> "PrimitiveLibrary":
        """Return a library whose entries listed in new_labels (id -> action label) are relabeled."""
        return PrimitiveLibrary(
            tuple(
                entry.with_labels(new_labels[entry.id]) if entry.id in new_labels else entry
                for entry in self.entries
            )
        )


@dataclass(frozen=True)
class Annotation:
    """Labels transferred to a query sequence.

    :param action_label: Predicted action class.
    :param motion_labels: Predicted region movement tags, sorted.
    :param confidence: Winning share of the vote weight (kNN) or of the bag votes (bagging).
    :param neighbor_ids: Ids of the nearest library entries, ascending by distance.
    :param neighbor_distances: Distances of these neighbors.
    """

    action_label: str
    motion_labels: Tuple[str, ...]
    confidence: float
    neighbor_ids: Tuple[str, ...] = field(default_factory=tuple)
    neighbor_distances: Tuple[float, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "action_label": self.action_label,
            "motion_labels": list(self.motion_labels),
            "confidence": self.confidence,
            "neighbors": [
                {"id": neighbor_id, "distance": distance}
                for neighbor_id, distance in zip(self.neighbor_ids, self.neighbor_distances)
            ],
        }
