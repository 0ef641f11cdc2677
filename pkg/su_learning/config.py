"""
Runtime Settings
Reads SU_* environment variables (and a local .env file) into validated settings
"""

import logging
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process-wide defaults; every value can be overridden per call"""

    model_config = SettingsConfigDict(env_prefix="SU_", env_file=".env", extra="ignore")

    log_level: str = "INFO"
    log_dir: Path = Path("logs")
    log_to_file: bool = False

    # |2*pi_plus - 1| must stay above this for the SU estimator to exist
    epsilon_prior: float = Field(default=1e-3, gt=0.0, lt=1.0)

    qp_tol: float = Field(default=1e-8, gt=0.0)
    qp_max_iter: int = Field(default=10_000, ge=1)

    n_jobs: int = 1
    test_set_size: int = Field(default=10_000, ge=1)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    settings = Settings()
    logger.debug(f"Loaded settings: {settings.model_dump()}")
    return settings
