"""
Sweep orchestration: config loading, per-point simulation pipeline, run manifest
and the drive-dependent rates table.
"""
import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from qdmollow import __version__
from qdmollow.models.physics import (
    DensityMatrix,
    DressedState,
    Liouvillian,
    PhononRates,
    PhotonRates,
    SpectrumSeries,
    SystemParams,
)
from qdmollow.models.schemas import ManifestEntry, PhononConfig, RunConfig, RunManifest, TabulatedReservoirConfig
from qdmollow.services.dressed_system import dressed_states
from qdmollow.services.master_equation import (
    POSITIVITY_TOLERANCE,
    build_liouvillian,
    positivity_monitor,
    random_states,
    slowest_decay,
    steady_state,
)
from qdmollow.services.phonon_bath import PhononBath, phonon_rates
from qdmollow.services.photon_rates import effective_se_rate, photon_rates
from qdmollow.services.photon_reservoir import (
    PhotonReservoir,
    build_reservoir,
    mode_edge_frequency,
    resonance_frequencies,
)
from qdmollow.services.spectra import compute_series, sideband_asymmetry, spectrum_grid
from qdmollow.settings import Settings
from qdmollow.utils.errors import ConfigError, QDMollowError, SpectrumAnalysisError
from qdmollow.utils.output_storage import OutputStorage

logger = logging.getLogger(__name__)

POSITIVITY_STATES = 8
POSITIVITY_HORIZON = 5.0

RATES_COLUMNS = (
    "Delta_Lx", "Omega_R", "eta",
    "Gamma_p", "Im_N_p", "Re_M_p", "Im_M_p", "Re_K_p", "Im_K_p",
    "Gamma_sig_plus", "Gamma_sig_minus", "Gamma_cd", "Re_Gamma_u", "Im_Gamma_u",
    "gamma_eff",
)


def _field_path(loc: Iterable) -> str:
    return ".".join(str(part) for part in loc)


def parse_config(data: dict, base_dir: Optional[Path] = None) -> RunConfig:
    """
    Validate a config mapping.

    Relative tabulated-LDOS paths are resolved against ``base_dir``.

    Raises:
        ConfigError: naming the first offending field
    """
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = _field_path(first["loc"])
        raise ConfigError(f"{field}: {first['msg']}", field=field) from e

    reservoir = config.reservoir
    if isinstance(reservoir, TabulatedReservoirConfig) and base_dir is not None and not reservoir.path.is_absolute():
        resolved = reservoir.model_copy(update={"path": (base_dir / reservoir.path).resolve()})
        config = config.model_copy(update={"reservoir": resolved})
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Load and validate a JSON run config.

    Args:
        path: Config file

    Returns:
        RunConfig with defaults applied

    Raises:
        ConfigError: on a missing file, a JSON syntax error (with line) or a validation error (with field)
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path.name}: {e.msg} (line {e.lineno}, column {e.colno})", line=e.lineno) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path.name}: top level must be an object")
    return parse_config(data, base_dir=path.resolve().parent)


def config_hash(config: RunConfig) -> str:
    """Content hash of everything that determines the physics (output settings excluded)"""
    payload = config.model_dump_json(exclude={"output"})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def point_hash(config_digest: str, variable: str, value: float) -> str:
    return hashlib.sha256(f"{config_digest}|{variable}|{value!r}".encode("utf-8")).hexdigest()[:16]


class PointResult(BaseModel):
    """Everything computed for one sweep point"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: SystemParams
    dressed: DressedState
    phonon: PhononRates
    photon: PhotonRates
    liouvillian: Liouvillian
    steady: DensityMatrix
    series: SpectrumSeries
    asymmetry: Optional[float] = None
    min_eigenvalue: float


class SimulationPipeline:
    """
    Evaluates sweep points for one config.

    The reservoir and the laser placement are resolved once; phonon baths are
    built per temperature and shared between points.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.numerics = config.numerics
        self.reservoir: PhotonReservoir = build_reservoir(config.reservoir, config.system.gamma_b, self.numerics)
        self.omega_L = self._resolve_laser()
        self._baths: Dict[float, PhononBath] = {}
        self._bath_lock = threading.Lock()

    def _resolve_laser(self) -> float:
        system = self.config.system
        placement = system.laser_placement
        if placement == "explicit":
            return float(system.omega_L)
        res = self.reservoir
        try:
            if placement == "band_center":
                return res.band_center()
            if placement in ("lower_edge", "upper_edge"):
                return mode_edge_frequency(res, placement.split("_")[0])
            if placement in ("lower_resonance", "upper_resonance"):
                lower, upper = resonance_frequencies(res)
                return lower if placement == "lower_resonance" else upper
            if placement == "ldos_max":
                if not hasattr(res, "ldos_maximum"):
                    raise ValueError(f"{res.kind} reservoir has no tabulated LDOS maximum")
                return res.ldos_maximum()
        except ValueError as e:
            raise ConfigError(f"laser placement {placement!r}: {e}", field="system.laser_placement") from e
        raise ConfigError(f"unknown laser placement {placement!r}", field="system.laser_placement")

    def bath(self, T: Optional[float] = None) -> PhononBath:
        phonon = self.config.phonon
        if T is not None and T != phonon.T:
            phonon = PhononConfig.model_validate({**phonon.model_dump(), "T": T})
        with self._bath_lock:
            if phonon.T not in self._baths:
                self._baths[phonon.T] = PhononBath(phonon, self.numerics)
            return self._baths[phonon.T]

    def drive(self, bath: PhononBath) -> float:
        """Bare Rabi drive; from the LDOS resonance separation when requested"""
        system = self.config.system
        if not system.drive_from_resonances:
            return float(system.Omega)
        try:
            lower, upper = resonance_frequencies(self.reservoir)
        except ValueError as e:
            raise ConfigError(f"drive_from_resonances: {e}", field="system.drive_from_resonances") from e
        return (upper - lower) / bath.displacement_average()

    def system_params(self, variable: str, value: float, bath: PhononBath) -> SystemParams:
        system = self.config.system
        Omega = value if variable == "Omega" else self.drive(bath)
        Delta_xL = -value if variable == "Delta_Lx" else system.Delta_xL
        return SystemParams.from_detuning(self.omega_L, Delta_xL, Omega=Omega, d=system.d,
                                          gamma_b=system.gamma_b, gamma_d=system.gamma_d)

    def rates(self, params: SystemParams, bath: PhononBath) -> Tuple[DressedState, PhononRates, PhotonRates]:
        ds = dressed_states(params, bath.displacement_average())
        pn = phonon_rates(ds, params.Delta_Lx, bath)
        ph = photon_rates(ds, params.Delta_Lx, self.reservoir, bath, self.numerics.sideband_sampling)
        return ds, pn, ph

    def evaluate(self, variable: str, value: float) -> PointResult:
        """
        Full chain for one sweep value: rates, Liouvillian, steady state, spectra.

        Raises:
            NumericalError: if any stage fails
            ValueError: if the point parameters are invalid
        """
        bath = self.bath(value if variable == "T" else None)
        params = self.system_params(variable, value, bath)
        ds, pn, ph = self.rates(params, bath)
        L = build_liouvillian(params, ds, pn, ph)
        rho = steady_state(L)

        grid = spectrum_grid(self.omega_L, params.Omega, self.config.spectrum, self.reservoir)
        threshold = self.config.spectrum.peak_threshold
        series = compute_series(L, rho, bath, self.reservoir, grid, self.omega_L, threshold, self.numerics)
        try:
            asymmetry = sideband_asymmetry(series, self.omega_L, threshold=threshold)
        except SpectrumAnalysisError as e:
            logger.debug(f"No sideband asymmetry at {variable}={value}: {e}")
            asymmetry = None

        horizon = POSITIVITY_HORIZON / slowest_decay(L)
        lowest = positivity_monitor(L, random_states(POSITIVITY_STATES, seed=0), horizon)
        if lowest < -POSITIVITY_TOLERANCE:
            logger.warning(f"Positivity monitor at {variable}={value}: eigenvalue {lowest:.3e}")

        return PointResult(params=params, dressed=ds, phonon=pn, photon=ph, liouvillian=L, steady=rho,
                           series=series, asymmetry=asymmetry, min_eigenvalue=lowest)


def _run_point(pipeline: SimulationPipeline, storage: OutputStorage, index: int, variable: str,
               value: float, digest: str) -> ManifestEntry:
    output = pipeline.config.output
    started = time.perf_counter()
    entry = dict(index=index, variable=variable, value=value, point_hash=point_hash(digest, variable, value))
    try:
        result = pipeline.evaluate(variable, value)
        path = storage.point_path(index, variable, value, output.format)
        series = result.series
        storage.write_spectrum(path, series.omega_grid, series.S0, series.SP, normalize=output.normalize,
                               dB=output.dB, variable=variable, value=value, peaks=series.peaks)
    except (QDMollowError, ValueError) as e:
        wall = time.perf_counter() - started
        logger.error(f"Sweep point {variable}={value} failed after {wall:.2f}s: {e}")
        return ManifestEntry(**entry, status="failed", wall_time=wall, error=f"{type(e).__name__}: {e}")

    wall = time.perf_counter() - started
    logger.info(f"Sweep point {variable}={value}: ok in {wall:.2f}s")
    return ManifestEntry(
        **entry,
        status="ok",
        path=path.name,
        wall_time=wall,
        positivity_ok=result.min_eigenvalue >= -POSITIVITY_TOLERANCE,
        min_eigenvalue=result.min_eigenvalue,
        sideband_asymmetry=result.asymmetry,
    )


def run_sweep(config: RunConfig, output_dir: Optional[Union[str, Path]] = None,
              workers: Optional[int] = None, settings: Optional[Settings] = None) -> RunManifest:
    """
    Evaluate every sweep point and write one spectrum file per point plus a manifest.

    Points whose hash already has an ok entry and an existing output file are reused.

    Args:
        config: Validated run config
        output_dir: Overrides config.output.directory and QDMOLLOW_OUTPUT_DIR
        workers: Overrides config.output.workers and QDMOLLOW_WORKERS
        settings: Environment settings; loaded when omitted

    Returns:
        RunManifest with one entry per sweep value, ordered by index

    Raises:
        ConfigError: if the reservoir or the laser placement cannot be resolved
    """
    settings = settings or Settings.load()
    directory = Path(output_dir or config.output.directory or settings.output_dir)
    pool_size = workers or config.output.workers or settings.workers
    storage = OutputStorage(directory)

    digest = config_hash(config)
    variable = config.sweep.variable
    values = config.sweep.values

    previous = storage.load_manifest()
    if previous is not None and previous.config_hash != digest:
        previous = None

    pipeline = SimulationPipeline(config)
    manifest = RunManifest(config_hash=digest, code_version=__version__)
    entries: Dict[int, ManifestEntry] = {}
    pending: List[Tuple[int, float]] = []

    for index, value in enumerate(values):
        old = previous.entry_for(point_hash(digest, variable, value)) if previous else None
        if old is not None and old.status == "ok" and old.path and (directory / old.path).exists():
            logger.warning(f"Skipping completed sweep point {variable}={value}")
            entries[index] = old.model_copy(update={"index": index, "reused": True})
        else:
            pending.append((index, value))

    logger.info(f"Sweep over {variable}: {len(values)} points, {len(pending)} to compute, {pool_size} workers")

    def snapshot() -> RunManifest:
        return manifest.model_copy(update={"entries": [entries[i] for i in sorted(entries)]})

    with ThreadPoolExecutor(max_workers=max(1, min(pool_size, len(pending) or 1))) as pool:
        futures = [pool.submit(_run_point, pipeline, storage, index, variable, value, digest)
                   for index, value in pending]
        for future in as_completed(futures):
            entry = future.result()
            entries[entry.index] = entry
            storage.write_manifest(snapshot())

    final = snapshot()
    storage.write_manifest(final)
    return final


def rates_report(config: RunConfig, detunings: Iterable[float],
                 output_path: Optional[Union[str, Path]] = None) -> np.ndarray:
    """
    Photon and phonon rates versus laser-exciton detuning at fixed drive.

    Args:
        config: Validated run config (system.Omega, reservoir, bath)
        detunings: Δ_Lx values (meV)
        output_path: Optional CSV destination

    Returns:
        Array with one row per detuning, columns RATES_COLUMNS
    """
    pipeline = SimulationPipeline(config)
    bath = pipeline.bath()
    rows = []
    for Delta_Lx in detunings:
        params = pipeline.system_params("Delta_Lx", float(Delta_Lx), bath)
        ds, pn, ph = pipeline.rates(params, bath)
        rows.append([
            params.Delta_Lx, ds.Omega_R, ds.eta,
            ph.Gamma_p, ph.N_p.imag, ph.M_p.real, ph.M_p.imag, ph.K_p.real, ph.K_p.imag,
            pn.gamma_sig_plus.real, pn.gamma_sig_minus.real, pn.gamma_cd.real, pn.gamma_u.real, pn.gamma_u.imag,
            effective_se_rate(pipeline.reservoir, bath, pipeline.omega_L),
        ])
    table = np.array(rows, dtype=float).reshape(-1, len(RATES_COLUMNS))

    if output_path is not None:
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        OutputStorage(path.parent).write_table(path, RATES_COLUMNS, table)
        logger.info(f"Rates table with {table.shape[0]} rows written to {path}")
    return table
