"""
Result storage for sweeps: run directory, per-point spectrum files and the run manifest.
"""
import logging
import threading
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from qdmollow.models.physics import Peak
from qdmollow.models.schemas import RunManifest

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SPECTRUM_COLUMNS = ("omega_meV", "S0", "SP", "S0_dB", "SP_dB")
DB_FLOOR = -300.0


class SpectrumRecord(BaseModel):
    """JSON form of one sweep point"""
    variable: str
    value: float
    omega_meV: List[float]
    S0: List[float]
    SP: List[float]
    S0_dB: Optional[List[float]] = None
    SP_dB: Optional[List[float]] = None
    peaks: List[Peak] = []


def to_decibels(values: np.ndarray) -> np.ndarray:
    """10·log10(S/max S), floored for non-positive values"""
    values = np.asarray(values, dtype=float)
    top = float(np.max(values))
    if top <= 0:
        return np.full(values.shape, DB_FLOOR)
    ratio = np.clip(values / top, 10.0 ** (DB_FLOOR / 10.0), None)
    return 10.0 * np.log10(ratio)


def normalized(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    top = float(np.max(values))
    return values / top if top > 0 else values


class OutputStorage:
    """Manages the output directory of one run"""

    def __init__(self, base_path: Union[str, Path]):
        """
        Initialize output storage.

        Args:
            base_path: Run directory, created if missing
        """
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)
        self._manifest_lock = threading.Lock()

    @property
    def manifest_path(self) -> Path:
        return self.base_path / MANIFEST_NAME

    def point_path(self, index: int, variable: str, value: float, fmt: str) -> Path:
        """
        File for one sweep point, named by its index and the sweep variable value.

        Args:
            index: Position in the sweep
            variable: Sweep variable name
            value: Sweep value
            fmt: "csv" or "json"
        """
        return self.base_path / f"{index:04d}_{variable}_{value:+.6g}.{fmt}"

    def write_spectrum(self, path: Path, omega: np.ndarray, S0: np.ndarray, SP: np.ndarray,
                       normalize: bool = True, dB: bool = True, variable: str = "", value: float = 0.0,
                       peaks: Sequence[Peak] = ()) -> Path:
        """
        Write one spectrum as CSV or JSON, chosen by the file suffix.

        Returns:
            The written path
        """
        if normalize:
            S0, SP = normalized(S0), normalized(SP)
        columns = [np.asarray(omega, dtype=float), np.asarray(S0, dtype=float), np.asarray(SP, dtype=float)]
        if dB:
            columns += [to_decibels(S0), to_decibels(SP)]

        if path.suffix == ".json":
            record = SpectrumRecord(
                variable=variable,
                value=value,
                omega_meV=columns[0].tolist(),
                S0=columns[1].tolist(),
                SP=columns[2].tolist(),
                S0_dB=columns[3].tolist() if dB else None,
                SP_dB=columns[4].tolist() if dB else None,
                peaks=list(peaks),
            )
            path.write_text(record.model_dump_json(indent=2), encoding="utf-8")
        else:
            header = ",".join(SPECTRUM_COLUMNS[:len(columns)])
            np.savetxt(path, np.column_stack(columns), delimiter=",", fmt="%.17g", header=header, comments="")
        logger.debug(f"Wrote {path}")
        return path

    @staticmethod
    def read_spectrum_csv(path: Union[str, Path]) -> dict:
        """Parse a spectrum CSV back into named columns"""
        path = Path(path)
        with path.open(encoding="utf-8") as handle:
            header = handle.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return {name: data[:, i] for i, name in enumerate(header)}

    def write_table(self, path: Path, columns: Sequence[str], rows: np.ndarray) -> Path:
        """Write a numeric table with one header line"""
        np.savetxt(path, np.atleast_2d(rows), delimiter=",", fmt="%.17g", header=",".join(columns), comments="")
        logger.debug(f"Wrote {path}")
        return path

    def load_manifest(self) -> Optional[RunManifest]:
        """
        Read an existing manifest.

        Returns:
            RunManifest, or None if there is none or it cannot be parsed
        """
        if not self.manifest_path.exists():
            return None
        try:
            return RunManifest.model_validate_json(self.manifest_path.read_text(encoding="utf-8"))
        except ValueError as e:
            logger.warning(f"Ignoring unreadable manifest {self.manifest_path}: {e}")
            return None

    def write_manifest(self, manifest: RunManifest) -> Path:
        """Replace the manifest; concurrent callers are serialized"""
        with self._manifest_lock:
            tmp = self.manifest_path.with_suffix(".json.tmp")
            tmp.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
            tmp.replace(self.manifest_path)
        return self.manifest_path
