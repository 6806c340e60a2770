import logging
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv
import os

load_dotenv()

logger = logging.getLogger(__name__)

class Settings(BaseSettings):
    # Artifact directory, overridden per run by --out
    out_dir: str = os.environ.get("THT_OUT_DIR", "data/")

    # Chain parallelism, overridden per run by --workers
    workers: int = int(os.environ.get("THT_WORKERS", "1"))

    # Seed used when neither the config nor --seed gives one
    default_seed: int = int(os.environ.get("THT_SEED", "0"))

    # Logging
    log_level: str = os.environ.get("THT_LOG_LEVEL", "INFO")
    log_format: str = os.environ.get("THT_LOG_FORMAT", "text")

    model_config = SettingsConfigDict(
        env_file='.env',
        env_file_encoding='utf-8',
        extra='ignore'
    )

settings = Settings()
if settings.workers < 1:
    logger.error(f"THT_WORKERS must be at least 1, got {settings.workers}; using 1.")
    settings.workers = 1
