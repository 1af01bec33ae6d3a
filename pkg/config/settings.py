"""Configuration settings for the tree-expansion laboratory."""

from pathlib import Path
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


class Settings:
    """Application settings."""

    CODE_VERSION: str = os.getenv("CODE_VERSION", "1.0.0")
    REPORT_SCHEMA_VERSION: int = 1

    # Combinatorics caps
    TREE_CAP: int = int(os.getenv("TREE_CAP", "10"))
    FOREST_N_CAP: int = int(os.getenv("FOREST_N_CAP", "6"))
    FOREST_K_CAP: int = int(os.getenv("FOREST_K_CAP", "4"))

    # Time-domain expansion
    TREE_TERM_CAP: int = int(os.getenv("TREE_TERM_CAP", "6"))
    DUHAMEL_TERM_CAP: int = int(os.getenv("DUHAMEL_TERM_CAP", "10000"))
    EXPAND_VERTEX_BUDGET: int = int(os.getenv("EXPAND_VERTEX_BUDGET", "400000"))
    SUBTREE_CACHE_DEPTH: int = int(os.getenv("SUBTREE_CACHE_DEPTH", "1"))
    SERIES_RATIO_GUARD: float = float(os.getenv("SERIES_RATIO_GUARD", "0.7"))
    QUAD_NODES: int = int(os.getenv("QUAD_NODES", "8"))
    QUAD_REFINED_NODES: int = int(os.getenv("QUAD_REFINED_NODES", "12"))

    # Dense tensors are only built on micro grids
    DENSE_MAX_N: int = int(os.getenv("DENSE_MAX_N", "4"))
    DENSE_MAX_K: int = int(os.getenv("DENSE_MAX_K", "3"))

    # Frequency-space quadrature
    TAU_T_MAX: float = float(os.getenv("TAU_T_MAX", "200"))
    TAU_NODES: int = int(os.getenv("TAU_NODES", "20000"))
    TAU_COMPRESSION: float = float(os.getenv("TAU_COMPRESSION", "2.0"))
    TAU_INNER_STEP: float = float(os.getenv("TAU_INNER_STEP", "0.003"))
    TAU_INNER_SPAN: float = float(os.getenv("TAU_INNER_SPAN", "20.0"))
    TAU_TAIL_TERMS: int = int(os.getenv("TAU_TAIL_TERMS", "3"))
    TAU_TOLERANCE: float = float(os.getenv("TAU_TOLERANCE", "1e-5"))

    # Reference solvers
    SOLVER_DT: float = float(os.getenv("SOLVER_DT", "5e-4"))
    CFL_LIMIT: float = float(os.getenv("CFL_LIMIT", "0.5"))
    BLOWUP_FACTOR: float = float(os.getenv("BLOWUP_FACTOR", "10"))
    PICARD_NODES: int = int(os.getenv("PICARD_NODES", "16"))
    PICARD_INNER_NODES: int = int(os.getenv("PICARD_INNER_NODES", "24"))
    PICARD_MAX_SWEEPS: int = int(os.getenv("PICARD_MAX_SWEEPS", "40"))
    PICARD_TOLERANCE: float = float(os.getenv("PICARD_TOLERANCE", "1e-13"))

    # Driver
    OUTPUT_DIR: Path = Path(os.getenv("OUTPUT_DIR", "./runs"))
    JOBS: int = int(os.getenv("JOBS", "4"))
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    RUN_SLOW_TESTS: bool = _flag("RUN_SLOW_TESTS")

    @classmethod
    def get_output_dir(cls) -> Path:
        """Get the output directory, creating it if needed."""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
        return cls.OUTPUT_DIR


# Global settings instance
settings = Settings()
