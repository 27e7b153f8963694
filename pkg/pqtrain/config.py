"""Package configuration."""
from pydantic_settings import BaseSettings
from functools import lru_cache
from pathlib import Path


class Settings(BaseSettings):
    """Numerical tolerances, capacity limits and rendering defaults."""

    # Spectral nulls
    null_order_tol: float = 1e-10

    # Max-SNR program
    qp_tol: float = 1e-10
    qp_max_iter: int = 200
    kkt_tol: float = 1e-8
    sign_search_max_n: int = 22  # exhaustive sign search up to this length

    # Capacity
    max_sequence_length: int = 2 ** 20
    max_matrix_entries: int = 2 ** 24

    # Doppler grids and rendering
    default_grid_count: int = 1024
    db_floor: float = -300.0
    render_floor_db: float = -100.0

    # Parallel evaluation over theta
    threads: int = 1

    log_level: str = "INFO"

    class Config:
        # Look for .env in project root (one level up from this package)
        env_file = str(Path(__file__).parent.parent / ".env")
        env_file_encoding = "utf-8"
        env_prefix = "PQTRAIN_"
        extra = "ignore"  # Ignore unrelated keys in .env


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
