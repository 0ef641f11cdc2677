"""
Settings and logging tests
"""

import json
import logging

from su_learning.config import get_settings
from su_learning.logging_setup import save_run_log, setup_logging
from su_learning.models.experiment_models import ExperimentConfig


def test_defaults():
    settings = get_settings()
    assert settings.qp_tol == 1e-8
    assert settings.qp_max_iter == 10_000
    assert settings.test_set_size == 10_000


def test_environment_override(monkeypatch):
    monkeypatch.setenv("SU_QP_TOL", "1e-6")
    monkeypatch.setenv("SU_N_JOBS", "3")
    settings = get_settings()
    assert settings.qp_tol == 1e-6
    assert settings.n_jobs == 3


def test_settings_are_cached():
    assert get_settings() is get_settings()


def test_experiment_test_size_follows_settings(monkeypatch):
    monkeypatch.setenv("SU_TEST_SET_SIZE", "321")
    assert ExperimentConfig().n_test == 321


def test_log_file(tmp_path):
    path = setup_logging("DEBUG", tmp_path, to_file=True)
    logging.getLogger("su_learning.test").info("hello from the test")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert path.parent == tmp_path
    assert "hello from the test" in path.read_text(encoding="utf-8")
    setup_logging("WARNING")


def test_console_only_logging_returns_no_path():
    assert setup_logging("INFO") is None


def test_save_run_log(tmp_path):
    path = save_run_log({"kind": "benchmark", "value": 1.5}, tmp_path / "nested" / "run.json")
    assert json.loads(path.read_text(encoding="utf-8")) == {"kind": "benchmark", "value": 1.5}
