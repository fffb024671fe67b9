"""
This module contains functions to split a primitive library into train and test entries.

The split can be done in two ways:
    - Stratified random split with a share of every class used for training
    - One-shot split with a single random exemplar per class used for training
"""
from collections import Counter
from datetime import datetime
from typing import List, Sequence, Tuple

import numpy as np
from sklearn import model_selection

from motioncast.general_utils.exceptions import ProtocolError
from motioncast.general_utils.general_utils import logger


def train_test_split_stratified(
    labels: Sequence[str], train_size: float = 0.5, random_state: int = 100
) -> Tuple[List[int], List[int]]:
    """Split entry indices into train and test, stratified by label."""
    logger(
        f"{datetime.utcnow()}: Start executing stratified train-test split with train size of {train_size}."
    )
    singletons = sorted(label for label, count in Counter(labels).items() if count < 2)
    if singletons:
        raise ProtocolError(
            f"Classes {singletons} have a single entry and cannot be split. Use the one-shot protocol instead."
        )
    indices = np.arange(len(labels))
    try:
        train_idx, test_idx = model_selection.train_test_split(
            indices,
            train_size=train_size,
            random_state=random_state,
            stratify=list(labels),
        )
    except ValueError as error:
        raise ProtocolError(
            f"Cannot split {len(labels)} entries with train size {train_size}: {error}"
        ) from error
    return sorted(int(i) for i in train_idx), sorted(int(i) for i in test_idx)


def train_test_split_one_shot(
    labels: Sequence[str], random_state: int = 100
) -> Tuple[List[int], List[int]]:
    """Keep one random exemplar per class for training, everything else for testing."""
    logger(f"{datetime.utcnow()}: Start executing one-shot train-test split.")
    random_generator = np.random.default_rng(random_state)
    train_idx = []
    for label in sorted(set(labels)):
        members = [index for index, value in enumerate(labels) if value == label]
        train_idx.append(int(random_generator.choice(members)))
    train_set = set(train_idx)
    test_idx = [index for index in range(len(labels)) if index not in train_set]
    return sorted(train_idx), test_idx


def train_test_split(
    labels: Sequence[str],
    protocol: str = "split",
    train_size: float = 0.5,
    random_state: int = 0,
) -> Tuple[List[int], List[int]]:
    if protocol == "one-shot":
        return train_test_split_one_shot(labels, random_state=random_state)
    if protocol == "split":
        return train_test_split_stratified(
            labels, train_size=train_size, random_state=random_state
        )
    raise ProtocolError(f"Unknown protocol '{protocol}'.")
