"""Run configuration, read from JSON or TOML documents"""
import json
import logging
import math
from pathlib import Path
from typing import (
    Any,
    Dict,
    List,
    NamedTuple,
    Optional,
    Tuple,
    Type,
    TypeVar,
    Union,
    get_args,
    get_origin,
    get_type_hints,
)

import tomli

from ._errors import ConfigError

LOGGER = logging.getLogger(__name__)

T = TypeVar("T", bound=Tuple[Any, ...])


class DeviceConfig(NamedTuple):
    """The membrane, its crystal and the waveguide sections"""

    a_nm: float = 240.0
    r0_nm: float = 64.0
    n_slab: float = 3.475
    t_nm: float = 175.0
    wavelength_nm: float = 930.0
    n_clad: float = 1.0
    #: dual-mode section
    w1_factor: float = 1.07
    #: ``None`` selects ``w0 - 60 nm``
    d1_nm: Optional[float] = None
    #: ``None`` selects ``w0 - 40 nm``
    d2_nm: Optional[float] = None
    center_row: bool = False
    rows_per_side: int = 7
    #: mode-filter section
    filter_w1_factor: float = 1.38
    #: drop every hole (analytic reference runs)
    homogeneous: bool = False


class SolverConfig(NamedTuple):
    """Plane-wave expansion settings"""

    cutoff: float = 6.0
    bulk_cutoff: float = 8.0
    nbands: int = 24
    #: samples of ``k_x`` in ``[0, 0.5]`` (``2π/a``)
    k_points: int = 101
    #: intervals per segment of the bulk path
    bulk_k_points: int = 30
    #: ``None`` selects ``a/64``
    grid_spacing_nm: Optional[float] = None
    #: ``None`` selects ``a/16``
    scan_grid_spacing_nm: Optional[float] = None
    max_basis: int = 4000


class AnalysisConfig(NamedTuple):
    """Emitter map and sweep settings"""

    beta_thresholds: Tuple[float, ...] = (0.85, 0.90, 0.95)
    epsilon_threshold: float = 5e-3
    clearance_nm: float = 43.0
    f_ng: float = 0.13
    eta: float = 1e-5
    wavelengths_nm: Tuple[float, ...] = ()
    #: ``(start, stop, count)``, ``None`` sweeps the dual-mode window
    sweep_nm: Optional[Tuple[float, ...]] = None
    sweep_count: int = 10
    localization: float = 0.8
    cutline_x_nm: float = 0.0
    mc_samples: int = 0
    mc_seed: int = 0
    qd_density_um2: float = 10.0
    inhomogeneous_center_nm: float = 930.0
    inhomogeneous_sigma_nm: float = 10.0


class BudgetConfig(NamedTuple):
    """Inputs of the source budget, two-port transmissions are converted to single interfaces"""

    beta1: float
    beta2: float
    t_1in: float
    t_2in: Optional[float] = None
    t_1out: Optional[float] = None
    t_2out: float = 0.0
    i_l1: float = 0.5
    i_l2: float = 0.5
    t_mf_odd: Optional[float] = None
    t_w1_even: Optional[float] = None
    #: emitter yield, reported when the working fraction is given
    working_fraction: Optional[float] = None
    effective_area_um2: Optional[float] = None
    window_nm: Optional[Tuple[float, ...]] = None


class RunConfig(NamedTuple):
    """Everything a command needs"""

    device: DeviceConfig = DeviceConfig()
    solver: SolverConfig = SolverConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    budget: Optional[BudgetConfig] = None
    output_dir: str = "out"
    plot: bool = False
    threads: int = 1

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Load a configuration, TOML when the suffix is ``.toml`` and JSON otherwise.

        :param path: the document
        :return: the validated configuration
        """
        return parse_config(read_document(path))

    @property
    def grid_spacing(self) -> float:
        """:return: sample distance of field maps (nm)"""
        value = self.solver.grid_spacing_nm
        return self.device.a_nm / 64.0 if value is None else value

    @property
    def scan_grid_spacing(self) -> float:
        """:return: sample distance of the localisation scan (nm)"""
        value = self.solver.scan_grid_spacing_nm
        return self.device.a_nm / 16.0 if value is None else value


def read_document(path: Union[str, Path]) -> Dict[str, Any]:
    """:return: the parsed mapping of a JSON or TOML file"""
    path = Path(path)
    try:
        with path.open("rb") as file_handler:
            if path.suffix == ".toml":
                data: Any = tomli.load(file_handler)
            else:
                data = json.load(file_handler)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", path=str(path)) from exc
    except (ValueError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"malformed document {path}: {exc}", path=str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError("the document must hold a mapping at the top level", path=str(path))
    return data


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _convert(name: str, kind: Any, value: Any) -> Any:
    origin, args = get_origin(kind), get_args(kind)
    if origin is Union:
        if value is None and type(None) in args:
            return None
        return _convert(name, next(a for a in args if a is not type(None)), value)
    if origin in (tuple, Tuple):
        if not isinstance(value, (list, tuple)) or not all(_is_number(v) for v in value):
            raise ConfigError(f"{name} must be a list of numbers", field=name)
        return tuple(float(v) for v in value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean", field=name)
        return value
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{name} must be an integer", field=name)
        return value
    if kind is float:
        if not _is_number(value) or not math.isfinite(value):
            raise ConfigError(f"{name} must be a finite number", field=name)
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string", field=name)
        return value
    raise ConfigError(f"{name} has an unsupported type", field=name)  # pragma: no cover


def parse_section(cls: Type[T], data: Any, name: str) -> T:
    """
    Build one configuration section from a mapping.

    :param cls: the section type
    :param data: the mapping
    :param name: dotted location of the section, used in error messages
    :return: the section
    """
    if not isinstance(data, dict):
        raise ConfigError(f"{name} must be a mapping", field=name)
    section: Any = cls
    fields: Tuple[str, ...] = section._fields
    defaults: Dict[str, Any] = section._field_defaults
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key {name}.{unknown[0]}", field=f"{name}.{unknown[0]}", unknown=unknown)
    hints = get_type_hints(cls)
    values = {}
    for field in fields:
        location = f"{name}.{field}"
        if field not in data:
            if field not in defaults:
                raise ConfigError(f"missing key {location}", field=location)
            continue
        values[field] = _convert(location, hints[field], data[field])
    result: T = section(**values)
    return result


def _require(condition: bool, field: str, rule: str, value: Any) -> None:
    if not condition:
        raise ConfigError(f"{field} {rule}", field=field, value=value)


def _check_device(device: DeviceConfig) -> None:
    _require(device.a_nm > 0, "device.a_nm", "must be positive", device.a_nm)
    _require(0 < device.r0_nm < device.a_nm / 2, "device.r0_nm", "must lie in (0, a/2)", device.r0_nm)
    _require(device.n_clad >= 1.0, "device.n_clad", "must be at least 1", device.n_clad)
    _require(device.n_slab > device.n_clad, "device.n_slab", "must exceed the cladding index", device.n_slab)
    _require(device.t_nm > 0, "device.t_nm", "must be positive", device.t_nm)
    _require(device.wavelength_nm > 0, "device.wavelength_nm", "must be positive", device.wavelength_nm)
    _require(device.w1_factor >= 1, "device.w1_factor", "must be at least 1", device.w1_factor)
    _require(device.filter_w1_factor >= 1, "device.filter_w1_factor", "must be at least 1", device.filter_w1_factor)
    _require(device.rows_per_side >= 5, "device.rows_per_side", "must be at least 5", device.rows_per_side)
    for field in ("d1_nm", "d2_nm"):
        value = getattr(device, field)
        _require(value is None or value > device.r0_nm, f"device.{field}", "must exceed the hole radius", value)


def _check_solver(solver: SolverConfig) -> None:
    _require(solver.cutoff > 0, "solver.cutoff", "must be positive", solver.cutoff)
    _require(solver.bulk_cutoff > 0, "solver.bulk_cutoff", "must be positive", solver.bulk_cutoff)
    _require(solver.nbands >= 2, "solver.nbands", "must be at least 2", solver.nbands)
    _require(solver.k_points >= 3, "solver.k_points", "must be at least 3", solver.k_points)
    _require(solver.bulk_k_points >= 10, "solver.bulk_k_points", "must be at least 10", solver.bulk_k_points)
    _require(solver.max_basis >= 2, "solver.max_basis", "must be at least 2", solver.max_basis)
    for field in ("grid_spacing_nm", "scan_grid_spacing_nm"):
        value = getattr(solver, field)
        _require(value is None or value > 0, f"solver.{field}", "must be positive", value)


def _check_analysis(analysis: AnalysisConfig) -> None:
    _require(len(analysis.beta_thresholds) > 0, "analysis.beta_thresholds", "must not be empty", [])
    for value in analysis.beta_thresholds:
        _require(0 < value < 1, "analysis.beta_thresholds", "must lie in (0, 1)", value)
    threshold = analysis.epsilon_threshold
    _require(0 < threshold < 1, "analysis.epsilon_threshold", "must lie in (0, 1)", threshold)
    _require(analysis.clearance_nm >= 0, "analysis.clearance_nm", "must not be negative", analysis.clearance_nm)
    _require(analysis.f_ng >= 0, "analysis.f_ng", "must not be negative", analysis.f_ng)
    _require(analysis.eta > 0, "analysis.eta", "must be positive", analysis.eta)
    _require(0 < analysis.localization <= 1, "analysis.localization", "must lie in (0, 1]", analysis.localization)
    _require(analysis.mc_samples >= 0, "analysis.mc_samples", "must not be negative", analysis.mc_samples)
    _require(analysis.sweep_count >= 1, "analysis.sweep_count", "must be at least 1", analysis.sweep_count)
    _require(analysis.qd_density_um2 > 0, "analysis.qd_density_um2", "must be positive", analysis.qd_density_um2)
    sigma = analysis.inhomogeneous_sigma_nm
    _require(sigma > 0, "analysis.inhomogeneous_sigma_nm", "must be positive", sigma)
    for value in analysis.wavelengths_nm:
        _require(value > 0, "analysis.wavelengths_nm", "must be positive", value)
    sweep = analysis.sweep_nm
    if sweep is not None:
        _require(len(sweep) == 3, "analysis.sweep_nm", "must be [start, stop, count]", list(sweep))
        start, stop, count = sweep
        _require(0 < start <= stop, "analysis.sweep_nm", "needs 0 < start <= stop", list(sweep))
        _require(count >= 1 and count == int(count), "analysis.sweep_nm", "needs an integer count", count)


def check_budget(budget: BudgetConfig) -> None:
    """Validate the budget section and its alternatives."""
    _require(
        budget.t_2in is not None or budget.t_mf_odd is not None, "budget.t_2in", "or budget.t_mf_odd is required", None
    )
    _require(
        budget.t_1out is not None or budget.t_w1_even is not None,
        "budget.t_1out",
        "or budget.t_w1_even is required",
        None,
    )
    if budget.working_fraction is not None:
        _require(budget.effective_area_um2 is not None, "budget.effective_area_um2", "is required for the yield", None)
        _require(budget.window_nm is not None, "budget.window_nm", "is required for the yield", None)
    if budget.window_nm is not None:
        _require(len(budget.window_nm) == 2, "budget.window_nm", "must be [low, high]", list(budget.window_nm))


def parse_budget(data: Any, name: str = "budget") -> BudgetConfig:
    """:return: a validated budget section"""
    budget = parse_section(BudgetConfig, data, name)
    check_budget(budget)
    return budget


def parse_config(data: Dict[str, Any]) -> RunConfig:
    """
    Validate a configuration mapping.

    :param data: the parsed document
    :return: the configuration
    :raises ConfigError: naming the offending key for unknown keys, wrong types and out of range values
    """
    sections: Dict[str, Any] = {}
    top = {k: v for k, v in data.items() if k not in ("device", "solver", "analysis", "budget")}
    sections.update(parse_section(RunConfig, top, "config")._asdict())
    sections["device"] = parse_section(DeviceConfig, data.get("device", {}), "device")
    sections["solver"] = parse_section(SolverConfig, data.get("solver", {}), "solver")
    sections["analysis"] = parse_section(AnalysisConfig, data.get("analysis", {}), "analysis")
    if data.get("budget") is not None:
        sections["budget"] = parse_budget(data["budget"])
    config = RunConfig(**sections)
    _check_device(config.device)
    _check_solver(config.solver)
    _check_analysis(config.analysis)
    _require(config.threads >= 1, "config.threads", "must be at least 1", config.threads)
    LOGGER.debug("configuration %r", config)
    return config


def sweep_wavelengths(analysis: AnalysisConfig, window: Optional[Tuple[float, float]] = None) -> List[float]:
    """
    Wavelengths of a sweep, explicit or spread over a window.

    :param analysis: the analysis settings
    :param window: wavelength interval (nm) used when no explicit sweep is configured
    :return: the wavelengths in ascending order
    """
    if analysis.sweep_nm is not None:
        start, stop, count = analysis.sweep_nm
        low, high, number = start, stop, int(count)
    elif window is not None:
        low, high, number = window[0], window[1], analysis.sweep_count
    else:
        raise ConfigError("analysis.sweep_nm is required without a dual-mode window", field="analysis.sweep_nm")
    if number == 1:
        return [(low + high) / 2.0]
    return [low + (high - low) * i / (number - 1) for i in range(number)]


__all__ = [
    "DeviceConfig",
    "SolverConfig",
    "AnalysisConfig",
    "BudgetConfig",
    "RunConfig",
    "read_document",
    "parse_section",
    "parse_config",
    "parse_budget",
    "check_budget",
    "sweep_wavelengths",
]
