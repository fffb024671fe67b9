"""Module for evaluation metrics and plots.

The annotation metrics are called by the Monte Carlo evaluation harness, the plots by the command line driver.
"""
from typing import Any, Dict, Mapping, Optional, Sequence

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns
from sklearn.metrics import accuracy_score, confusion_matrix, f1_score
from sklearn.preprocessing import MultiLabelBinarizer

from motioncast.general_utils.general_utils import logger


def eval_annotations(
    y_true: Sequence[str],
    y_pred: Sequence[str],
    tags_true: Sequence[Sequence[str]],
    tags_pred: Sequence[Sequence[str]],
    classes: Sequence[str],
    verbose: bool = False,
) -> Dict[str, Any]:
    """Score predicted action labels and motion labels of one test set.

    :param y_true: True action labels.
    :param y_pred: Predicted action labels.
    :param tags_true: True motion labels per sequence.
    :param tags_pred: Predicted motion labels per sequence.
    :param classes: Class order of the confusion matrix.
    :param verbose: Log every score.
    :return: Dictionary with accuracy, motion exact-set accuracy, per tag F1 scores and the confusion matrix.
    """
    if len(y_true) != len(y_pred) or len(tags_true) != len(tags_pred):
        raise ValueError("The number of true and predicted annotations must be the same.")
    accuracy = accuracy_score(list(y_true), list(y_pred))
    motion_accuracy = float(
        np.mean([set(true) == set(pred) for true, pred in zip(tags_true, tags_pred)])
    )
    binarizer = MultiLabelBinarizer()
    binarizer.fit(list(tags_true) + list(tags_pred))
    per_tag_f1 = []
    if len(binarizer.classes_):
        per_tag_f1 = f1_score(
            binarizer.transform(tags_true),
            binarizer.transform(tags_pred),
            average=None,
            zero_division=0,
        )
    confusion = confusion_matrix(list(y_true), list(y_pred), labels=list(classes))
    if verbose:
        logger(f"The accuracy is {accuracy}")
        logger(f"The motion label exact-set accuracy is {motion_accuracy}")
    return {
        "accuracy": float(accuracy),
        "motion_accuracy": motion_accuracy,
        "per_tag_f1": {
            str(tag): float(score) for tag, score in zip(binarizer.classes_, per_tag_f1)
        },
        "confusion_matrix": confusion,
    }


def per_class_accuracy(confusion: np.ndarray, classes: Sequence[str]) -> Dict[str, Optional[float]]:
    """Share of correctly annotated test sequences per class. Classes without test sequences map to None."""
    totals = confusion.sum(axis=1)
    return {
        label: (float(confusion[index, index] / totals[index]) if totals[index] else None)
        for index, label in enumerate(classes)
    }


def _save(fig: plt.Figure, file_path: str) -> None:
    fig.tight_layout()
    if file_path.endswith(".svg"):
        fig.savefig(file_path, metadata={"Date": None})
    else:
        fig.savefig(file_path)
    plt.close(fig)


def plot_similarity_heatmap(
    values: pd.DataFrame, file_path: str, title: str = "Self-similarity"
) -> None:
    """
    Plot a distance matrix as heatmap. Cool colors denote similar pairs, warm colors dissimilar ones.

    :param values: Square DataFrame of distances.
    :param file_path: Output file, the format follows the file extension.
    :param title: Title of the plot.
    """
    fig, ax = plt.subplots(figsize=(7, 6))
    vmax = float(np.max(values.to_numpy())) if values.size else 1.0
    sns.heatmap(values, cmap="coolwarm", vmin=0.0, vmax=vmax if vmax > 0 else 1.0, square=True, ax=ax)
    ax.set_title(title)
    _save(fig, file_path)


def plot_learning_curves(
    curves: Mapping[str, pd.DataFrame],
    file_path: str,
    window: int = 20,
    title: str = "Average policy reward",
) -> None:
    """
    Plot rolling mean episode rewards of several training runs.

    :param curves: Mapping from run name to learning curve with columns episode and reward.
    :param file_path: Output file, the format follows the file extension.
    :param window: Rolling window size in episodes.
    """
    fig, ax = plt.subplots(figsize=(8, 5))
    for name, curve in curves.items():
        if curve.empty:
            continue
        smoothed = curve["reward"].rolling(window, min_periods=1).mean()
        ax.plot(curve["episode"], smoothed, label=name)
    ax.set_xlabel("Episode")
    ax.set_ylabel("Reward")
    ax.set_title(title)
    ax.legend()
    ax.grid()
    _save(fig, file_path)
