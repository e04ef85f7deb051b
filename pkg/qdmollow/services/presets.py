"""
Named scenario configs shipped under data/presets.
"""
import json
import logging
from pathlib import Path
from typing import List, Optional

from qdmollow.models.schemas import RunConfig
from qdmollow.services.sweep_runner import load_config
from qdmollow.settings import Settings
from qdmollow.utils.errors import ConfigError

logger = logging.getLogger(__name__)


class PresetLibrary:
    """Directory of `<name>.json` run configs"""

    def __init__(self, directory: Optional[Path] = None):
        self.directory = Path(directory) if directory else Settings.load().presets_dir

    def names(self) -> List[str]:
        if not self.directory.is_dir():
            return []
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def path(self, name: str) -> Path:
        """
        Raises:
            ConfigError: if no preset has this name
        """
        path = self.directory / f"{name}.json"
        if not path.is_file():
            known = ", ".join(self.names()) or "none"
            raise ConfigError(f"unknown preset {name!r} (available: {known})", field="preset")
        return path

    def load(self, name: str) -> RunConfig:
        return load_config(self.path(name))

    def emit(self, name: str) -> str:
        """
        Preset JSON with relative LDOS paths made absolute, so the text can be saved anywhere.
        """
        path = self.path(name)
        data = json.loads(path.read_text(encoding="utf-8"))
        reservoir = data.get("reservoir", {})
        if reservoir.get("kind") == "tabulated" and not Path(reservoir["path"]).is_absolute():
            reservoir["path"] = str((path.parent / reservoir["path"]).resolve())
        logger.info(f"Emitted preset {name}")
        return json.dumps(data, indent=2)
