"""General utilities."""
import logging
from datetime import datetime
from typing import Any, List, Optional

import dill as pickle
import numpy as np


def logger(message: str) -> None:
    logging.info(message)
    print(message)


def derive_seeds(master_seed: int, nb_seeds: int) -> List[int]:
    """Derive independent integer seeds from a master seed.

    Used wherever trials, training runs or bags need their own random stream. The derived seeds only depend on
    the master seed and the position, so results do not change with the evaluation order or the number of
    parallel jobs.
    :param master_seed: Seed the derived streams originate from.
    :param nb_seeds: Number of seeds to derive.
    :return: List of non-negative integers usable as numpy seeds.
    """
    children = np.random.SeedSequence(master_seed).spawn(nb_seeds)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]


def save_to_production(
    class_instance: Any,
    file_path: Optional[str] = None,
    file_name: str = "motioncast_instance",
    file_type: str = ".dat",
) -> None:
    """
    Takes a trained instance (i.e. a trained Q-learning agent) and saves it via dill.
    :param class_instance: Takes the instance to persist.
    :param file_path: Takes a string containing the full absolute path.
    :param file_name: Takes a string containing the whole file name.
    :param file_type: Takes the expected type of file to export.
    :return:
    """
    logger(f"{datetime.utcnow()}: Start saving class instance.")
    if file_path:
        full_path = file_path + file_name + file_type
    else:
        full_path = file_name + file_type
    with open(full_path, "wb") as filehandler:
        pickle.dump(class_instance, filehandler)


def load_for_production(
    file_path: Optional[str] = None,
    file_name: str = "motioncast_instance",
    file_type: str = ".dat",
) -> Any:
    """
    Load a persisted instance. This function will try to load the file as provided.
    It has a fallback logic to impute .dat as file_type in case the import fails initially.
    :param file_path: Takes a string containing the full absolute path.
    :param file_name: Takes a string containing the whole file name.
    :param file_type: Takes the expected type of file to import.
    :return: The unpickled instance.
    """
    logger(f"{datetime.utcnow()}: Start loading class instance.")
    if file_path:
        full_path = file_path + file_name
    else:
        full_path = file_name
    try:
        filehandler = open(full_path, "rb")
    except FileNotFoundError:
        filehandler = open(full_path + file_type, "rb")
    with filehandler:
        instance = pickle.load(filehandler)
    return instance
