from abc import ABC, abstractmethod
from typing import Any, Dict, Literal, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

ScoreCategory = Literal["monte_carlo_trial", "rl_run", "rl_eval"]


class BaseClassExperimentTracker(ABC):
    """Base class for the experiment tracker.

    Enforces the implementation of the add_results and retrieve_results_as_df methods.
    """

    @abstractmethod
    def add_results(
        self,
        experiment_id: int,
        score_category: ScoreCategory,
        config: BaseModel,
        parameters: Dict[Any, Any],
        eval_scores: Union[float, int, None],
        metric_used: str,
        metric_higher_is_better: bool,
    ) -> None:
        """
        Add results to the ExperimentTracker class.
        """
        pass

    @abstractmethod
    def retrieve_results_as_df(self) -> pd.DataFrame:
        """
        Retrieve results from the ExperimentTracker class
        """
        pass


class BaseClassEnvironment(ABC):
    """Base class for the deterministic grid world tasks.

    Enforces the implementation of reset, step, state_key and solved. States are immutable, so step returns a new
    state and the learners can replay any state without copying the environment.
    """

    name: str = "environment"

    @abstractmethod
    def reset(self, random_generator: np.random.Generator) -> Any:
        """
        Draw a start state.
        """
        pass

    @abstractmethod
    def step(self, state: Any, action: str) -> Tuple[Any, float, bool]:
        """
        Apply one micro action and return the next state, the reward and the done flag.

        done is set both when the goal is reached and when a step cap truncates the episode. Learners tell the two
        apart with solved.
        """
        pass

    @abstractmethod
    def state_key(self, state: Any) -> Tuple[int, ...]:
        """
        Discretize a state into the key of the Q table.
        """
        pass

    @abstractmethod
    def solved(self, state: Any) -> bool:
        """
        Whether the task goal has been reached in this state.
        """
        pass
