from pydantic_settings import BaseSettings
from typing import Optional
import os
from dotenv import load_dotenv

load_dotenv()

class Settings(BaseSettings):
    # App Settings
    APP_NAME: str = os.getenv("APP_NAME", "MEDS Lab")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Output location for experiment artifacts
    OUTPUT_DIR: str = os.getenv("MEDS_OUTPUT_DIR", "./runs")

    # Event location
    CROSSING_TOL: float = float(os.getenv("CROSSING_TOL", "1e-9"))
    SCAN_POINTS_PER_NYQUIST: int = int(os.getenv("SCAN_POINTS_PER_NYQUIST", "128"))
    PEAK_POINTS_PER_NYQUIST: int = int(os.getenv("PEAK_POINTS_PER_NYQUIST", "64"))

    # Reconstruction
    DENSE_POINTS_PER_NYQUIST: int = int(os.getenv("DENSE_POINTS_PER_NYQUIST", "32"))
    MAX_ITERATIONS: int = int(os.getenv("MAX_ITERATIONS", "30"))
    ITERATION_TOL: float = float(os.getenv("ITERATION_TOL", "1e-10"))
    SINC_RADIUS: float = float(os.getenv("SINC_RADIUS", "40"))

    # Sweeps
    SWEEP_WORKERS: int = int(os.getenv("SWEEP_WORKERS", "1"))

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"

settings = Settings()


def output_dir_override() -> Optional[str]:
    """Output directory forced through the environment, if any."""
    return os.getenv("MEDS_OUTPUT_DIR")
