"""
Environment-backed settings.
"""
import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict

load_dotenv()

PACKAGE_ROOT = Path(__file__).resolve().parent
DATA_DIR = PACKAGE_ROOT.parent / "data"


class Settings(BaseModel):
    """Process-wide defaults read from the environment"""
    model_config = ConfigDict(frozen=True)

    output_dir: Path
    workers: int
    log_level: str
    presets_dir: Path

    @classmethod
    def load(cls) -> "Settings":
        workers = os.getenv("QDMOLLOW_WORKERS")
        return cls(
            output_dir=Path(os.getenv("QDMOLLOW_OUTPUT_DIR", "results")),
            workers=int(workers) if workers else (os.cpu_count() or 1),
            log_level=os.getenv("QDMOLLOW_LOG_LEVEL", "INFO").upper(),
            presets_dir=Path(os.getenv("QDMOLLOW_PRESETS_DIR", str(DATA_DIR / "presets"))),
        )
