"""
Reader for tabulated LDOS files.

Format: UTF-8 text, '#' starts a comment line, data rows are
`omega_meV  J_ph_norm  [alpha_P_norm]` separated by whitespace with ω strictly
increasing. An optional `# PF_scale <float>` header scales J_ph_norm to μeV.
A missing alpha column means α_P = 1.
"""
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from qdmollow.models.physics import CONSTANTS, PhysicalConstants
from qdmollow.models.schemas import NumericsConfig
from qdmollow.services.photon_reservoir import TabulatedReservoir
from qdmollow.utils.errors import LDOSFormatError

logger = logging.getLogger(__name__)

PF_SCALE_KEY = "PF_scale"


def _parse_header(text: str, row: int) -> Optional[float]:
    parts = text.lstrip("#").split()
    if len(parts) >= 1 and parts[0] == PF_SCALE_KEY:
        if len(parts) != 2:
            raise LDOSFormatError(f"expected '# {PF_SCALE_KEY} <float>'", row)
        try:
            scale = float(parts[1])
        except ValueError:
            raise LDOSFormatError(f"{PF_SCALE_KEY} is not a number: {parts[1]!r}", row)
        if not np.isfinite(scale) or scale < 0:
            raise LDOSFormatError(f"{PF_SCALE_KEY} must be finite and non-negative", row)
        return scale
    return None


def parse_ldos(text: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """
    Parse LDOS file content.

    Args:
        text: File content

    Returns:
        (omega, j_norm, alpha_norm, pf_scale)

    Raises:
        LDOSFormatError: on a malformed row, a non-increasing ω, a negative J,
            or fewer than two data rows
    """
    pf_scale = 1.0
    rows: List[Tuple[float, float, float]] = []
    columns = None

    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            scale = _parse_header(stripped, number)
            if scale is not None:
                pf_scale = scale
            continue

        fields = stripped.split()
        if len(fields) not in (2, 3):
            raise LDOSFormatError(f"expected 2 or 3 columns, found {len(fields)}", number)
        if columns is None:
            columns = len(fields)
        elif len(fields) != columns:
            raise LDOSFormatError(f"expected {columns} columns like the first data row, found {len(fields)}", number)
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise LDOSFormatError(f"non-numeric value in {stripped!r}", number)
        if not all(np.isfinite(values)):
            raise LDOSFormatError("values must be finite", number)

        omega, j = values[0], values[1]
        alpha = values[2] if len(values) == 3 else 1.0
        if rows and omega <= rows[-1][0]:
            raise LDOSFormatError(f"omega {omega} is not greater than the previous row ({rows[-1][0]})", number)
        if j < 0:
            raise LDOSFormatError(f"negative J_ph value {j}", number)
        if alpha < 0:
            raise LDOSFormatError(f"negative alpha_P value {alpha}", number)
        rows.append((omega, j, alpha))

    if len(rows) < 2:
        raise LDOSFormatError(f"need at least two data rows, found {len(rows)}")

    data = np.array(rows, dtype=float)
    return data[:, 0], data[:, 1], data[:, 2], pf_scale


def ingest_ldos(path: Union[str, Path], numerics: Optional[NumericsConfig] = None,
                constants: PhysicalConstants = CONSTANTS) -> TabulatedReservoir:
    """
    Load a tabulated LDOS file as a reservoir.

    Args:
        path: LDOS file
        numerics: Grid settings for the reservoir

    Returns:
        TabulatedReservoir

    Raises:
        LDOSFormatError: if the file is missing or violates the format
    """
    path = Path(path)
    if not path.is_file():
        raise LDOSFormatError(f"LDOS file not found: {path}")

    omega, j_norm, alpha_norm, pf_scale = parse_ldos(path.read_text(encoding="utf-8"))
    logger.info(f"Loaded LDOS {path.name}: {omega.size} rows, "
                f"ω ∈ [{omega[0]:.4f}, {omega[-1]:.4f}] meV, PF_scale={pf_scale:g}")
    return TabulatedReservoir(omega, j_norm, alpha_norm, pf_scale, numerics, constants, source=str(path))
