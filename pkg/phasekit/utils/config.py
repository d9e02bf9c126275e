"""Environment configuration and logging setup."""

import logging
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings(BaseModel):
    """Process-wide settings resolved from the environment."""

    model_config = ConfigDict(frozen=True)

    log_level: str = "INFO"
    threads: int = Field(default=1, ge=1)
    output_dir: str = "results"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"LOG_LEVEL must be a logging level name, got {value!r}")
        return level


def get_settings() -> Settings:
    """Build settings from LOG_LEVEL, PHASEKIT_THREADS and PHASEKIT_OUTPUT_DIR."""
    threads_raw = os.getenv("PHASEKIT_THREADS")
    try:
        threads = int(threads_raw) if threads_raw else max(1, os.cpu_count() or 1)
    except ValueError:
        raise ValueError(f"PHASEKIT_THREADS must be an integer, got {threads_raw!r}")
    if threads < 1:
        raise ValueError(f"PHASEKIT_THREADS must be at least 1, got {threads}")

    return Settings(
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        threads=threads,
        output_dir=os.getenv("PHASEKIT_OUTPUT_DIR", "results"),
    )


def configure_logging(level: Optional[str] = None) -> None:
    """Install a single stream handler on the root logger."""
    level = (level or get_settings().log_level).upper()
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
