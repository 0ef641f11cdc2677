"""
Trial Tracker
Collects per-trial outcomes of an experiment run into a RunSummary and
persists it as a JSON run log
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from su_learning.logging_setup import save_run_log
from su_learning.models.experiment_models import ExperimentConfig, RunSummary, TrialResult

logger = logging.getLogger(__name__)


class TrialTracker:
    """Tracks the trials of one experiment run"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.results: Dict[int, TrialResult] = {}
        self.summary: Optional[RunSummary] = None

    def start_run(self) -> RunSummary:
        self.results.clear()
        self.summary = RunSummary(kind=self.config.kind, config=self.config.model_dump(mode="json"))
        logger.info(f"🎬 Started {self.config.kind.value} run: {self.config.trials} trials, seed={self.config.seed}")
        return self.summary

    def record(self, result: TrialResult) -> None:
        if self.summary is None:
            self.start_run()
        self.results[result.trial] = result
        if result.status == "ok":
            logger.debug(f"Trial {result.trial} finished with {len(result.rows)} rows")
        else:
            logger.error(f"❌ Trial {result.trial} failed: {result.error}")

    def ordered(self) -> List[TrialResult]:
        return [self.results[trial] for trial in sorted(self.results)]

    @property
    def failed_trials(self) -> List[int]:
        return [r.trial for r in self.ordered() if r.status != "ok"]

    def rows(self) -> List[Dict[str, Any]]:
        """Every emitted row, ordered by trial index"""
        return [row for result in self.ordered() for row in result.rows]

    def end_run(self, metrics: Optional[Dict[str, Any]] = None) -> RunSummary:
        if self.summary is None:
            self.start_run()
        ended_at = datetime.now()
        failed = self.failed_trials
        self.summary = self.summary.model_copy(update={
            "trials": len(self.results),
            "failures": len(failed),
            "failed_trials": failed,
            "metrics": metrics or {},
            "ended_at": ended_at,
            "duration_seconds": (ended_at - self.summary.started_at).total_seconds(),
        })
        logger.info(f"✅ Run finished: {len(self.results)} trials, {len(failed)} failed "
                    f"({self.summary.duration_seconds:.1f}s)")
        return self.summary

    def save(self, path: Union[str, Path]) -> Path:
        if self.summary is None:
            raise RuntimeError("no run to save; call start_run() first")
        entry = self.summary.to_dict()
        entry["trial_status"] = [
            {"trial": r.trial, "status": r.status, "error": r.error, "duration_seconds": r.duration_seconds}
            for r in self.ordered()
        ]
        return save_run_log(entry, path)
