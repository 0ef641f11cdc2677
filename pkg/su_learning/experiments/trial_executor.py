"""
Trial Executor
Runs independent experiment trials with their own seeds; a failing trial is
recorded, never raised
"""

import logging
import time
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed

from su_learning.config import get_settings
from su_learning.models.experiment_models import TrialResult

logger = logging.getLogger(__name__)

TrialFunction = Callable[[int, int], List[Dict[str, Any]]]


def trial_seed(master_seed: int, trial: int) -> int:
    """Independent 32-bit seed for one trial, derived from (master seed, trial index)"""
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1)[0])


class TrialExecutor:
    """Executor for the trials of one experiment.

    ``trial_fn(trial, seed)`` returns the CSV rows of that trial.
    """

    def __init__(self, trial_fn: TrialFunction, master_seed: int = 0, n_jobs: Optional[int] = None):
        logger.info("Initializing TrialExecutor.")
        self.trial_fn = trial_fn
        self.master_seed = master_seed
        self.n_jobs = n_jobs if n_jobs is not None else get_settings().n_jobs
        logger.info(f"TrialExecutor initialized (master seed {master_seed}, n_jobs={self.n_jobs}).")

    def execute(self, trial: int) -> TrialResult:
        seed = trial_seed(self.master_seed, trial)
        started = time.perf_counter()
        try:
            rows = self.trial_fn(trial, seed)
            return TrialResult(trial=trial, rows=rows, duration_seconds=time.perf_counter() - started)
        except Exception as e:
            logger.error(f"Error during trial {trial}: {e}")
            return TrialResult(trial=trial, status="failed", error=f"{type(e).__name__}: {e}",
                               duration_seconds=time.perf_counter() - started)

    def run(self, trials: int) -> List[TrialResult]:
        """All trials, ordered by trial index regardless of completion order"""
        results = Parallel(n_jobs=self.n_jobs)(delayed(self.execute)(trial) for trial in range(trials))
        return sorted(results, key=lambda r: r.trial)
