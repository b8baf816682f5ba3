from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load environment variables from .env
load_dotenv()

class Settings(BaseSettings):
    """
    Process-level settings, read from ``KRACL_*`` environment variables.
    """
    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    # Dataset directories are resolved against this root when given by name
    DATA_ROOT: str = "data"

    # Evaluation fan-out
    EVAL_WORKERS: int = 1
    EVAL_BATCH_SIZE: int = 256

    # Prometheus text file written after train/eval when set
    METRICS_FILE: Optional[str] = None

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="KRACL_",
        case_sensitive=True,
        extra="ignore",
    )

# Instantiate the settings
settings = Settings()
