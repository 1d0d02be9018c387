"""Application configuration and environment variables"""

import os
import re
from pydantic import BaseModel, field_validator
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

class Settings(BaseModel):
    """Application settings"""

    # Run directory used when the config file does not name one
    output_dir: str = os.getenv("KD_OUTPUT_DIR", "runs/default").strip()

    # Worker pool size for λ-fits and study cells
    jobs: int = int(os.getenv("KD_JOBS", "1"))

    # Logging
    log_level: str = os.getenv("KD_LOG_LEVEL", "INFO").upper()

    # CSV float format, must keep at least 12 significant digits
    float_format: str = os.getenv("KD_FLOAT_FORMAT", "%.17g")

    # Numerical constants shared by the core modules
    min_time_offset: float = 1e-6  # seconds past τ before the second source is evaluated
    coincidence_radius: float = 1e-12  # FCM singularity rule

    @field_validator("float_format")
    @classmethod
    def check_precision(cls, value: str) -> str:
        match = re.fullmatch(r"%\.(\d+)[gGeE]", value)
        if not match or int(match.group(1)) < 12:
            raise ValueError("float_format must be a %.Ng / %.Ne format with N >= 12")
        return value

    @field_validator("log_level")
    @classmethod
    def check_log_level(cls, value: str) -> str:
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value}")
        return value

    class Config:
        case_sensitive = False
        validate_default = True

# Global settings instance
settings = Settings()
