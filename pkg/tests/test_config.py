from pathlib import Path
from typing import Any, Callable, Dict

import pytest

from dualmode_pcw import AnalysisConfig, ConfigError, DeviceConfig, RunConfig
from dualmode_pcw._config import parse_budget, parse_config, sweep_wavelengths


def test_defaults() -> None:
    config = parse_config({})
    assert config == RunConfig()
    assert config.device == DeviceConfig()
    assert config.budget is None
    assert config.grid_spacing == pytest.approx(240.0 / 64)
    assert config.scan_grid_spacing == pytest.approx(240.0 / 16)


def test_explicit_values(small_config: Dict[str, Any]) -> None:
    config = parse_config({**small_config, "threads": 3, "plot": True, "analysis": {"beta_thresholds": [0.9]}})
    assert config.solver.cutoff == 1.5
    assert config.grid_spacing == 30.0
    assert config.scan_grid_spacing == 40.0
    assert config.threads == 3 and config.plot
    assert config.analysis.beta_thresholds == (0.9,)


def test_integers_are_accepted_as_numbers() -> None:
    assert parse_config({"device": {"a_nm": 250}}).device.a_nm == 250.0


@pytest.mark.parametrize(
    ("data", "field"),
    [
        ({"device": {"pitch": 1.0}}, "device.pitch"),
        ({"colour": "red"}, "config.colour"),
        ({"device": {"a_nm": "big"}}, "device.a_nm"),
        ({"device": {"center_row": 1}}, "device.center_row"),
        ({"solver": {"nbands": 2.5}}, "solver.nbands"),
        ({"solver": {"nbands": True}}, "solver.nbands"),
        ({"analysis": {"beta_thresholds": [0.9, "x"]}}, "analysis.beta_thresholds"),
        ({"output_dir": 3}, "config.output_dir"),
        ({"device": []}, "device"),
        ({"device": {"r0_nm": 130.0}}, "device.r0_nm"),
        ({"device": {"n_slab": 0.9}}, "device.n_slab"),
        ({"device": {"rows_per_side": 4}}, "device.rows_per_side"),
        ({"device": {"d1_nm": 50.0}}, "device.d1_nm"),
        ({"solver": {"cutoff": 0}}, "solver.cutoff"),
        ({"solver": {"grid_spacing_nm": -1}}, "solver.grid_spacing_nm"),
        ({"analysis": {"beta_thresholds": [1.2]}}, "analysis.beta_thresholds"),
        ({"analysis": {"eta": 0}}, "analysis.eta"),
        ({"analysis": {"sweep_nm": [930, 920, 5]}}, "analysis.sweep_nm"),
        ({"analysis": {"sweep_nm": [920, 930, 2.5]}}, "analysis.sweep_nm"),
        ({"threads": 0}, "config.threads"),
    ],
)
def test_invalid_values_name_the_field(data: Dict[str, Any], field: str) -> None:
    with pytest.raises(ConfigError) as context:
        parse_config(data)
    assert context.value.details["field"] == field
    assert context.value.code == 2


def test_budget_section() -> None:
    config = parse_config({"budget": {"beta1": 0.98, "beta2": 0.5, "t_1in": 4e-6, "t_2in": 0.63, "t_1out": 0.7}})
    assert config.budget is not None
    assert config.budget.t_2in == 0.63
    assert config.budget.i_l1 == 0.5


@pytest.mark.parametrize(
    ("data", "field"),
    [
        ({"beta2": 0.5, "t_1in": 4e-6, "t_2in": 0.6, "t_1out": 0.7}, "budget.beta1"),
        ({"beta1": 0.9, "beta2": 0.5, "t_1in": 4e-6, "t_1out": 0.7}, "budget.t_2in"),
        ({"beta1": 0.9, "beta2": 0.5, "t_1in": 4e-6, "t_mf_odd": 0.4}, "budget.t_1out"),
        (
            {"beta1": 0.9, "beta2": 0.5, "t_1in": 4e-6, "t_2in": 0.6, "t_1out": 0.7, "working_fraction": 0.1},
            "budget.effective_area_um2",
        ),
    ],
)
def test_budget_missing_keys(data: Dict[str, Any], field: str) -> None:
    with pytest.raises(ConfigError) as context:
        parse_budget(data)
    assert context.value.details["field"] == field


def test_toml_document(tmp_path: Path) -> None:
    path = tmp_path / "run.toml"
    path.write_text('output_dir = "results"\n\n[device]\na_nm = 250.0\n\n[analysis]\nwavelengths_nm = [925, 930]\n')
    config = RunConfig.from_file(path)
    assert config.output_dir == "results"
    assert config.device.a_nm == 250.0
    assert config.analysis.wavelengths_nm == (925.0, 930.0)


def test_json_document(write_config: Callable[..., Path], small_config: Dict[str, Any]) -> None:
    config = RunConfig.from_file(write_config(small_config))
    assert config.device.rows_per_side == 5


@pytest.mark.parametrize(
    ("name", "content"),
    [("bad.json", "{not json"), ("bad.toml", "a = = 1"), ("list.json", "[1, 2]")],
)
def test_malformed_documents(tmp_path: Path, name: str, content: str) -> None:
    path = tmp_path / name
    path.write_text(content)
    with pytest.raises(ConfigError):
        RunConfig.from_file(path)


def test_missing_document(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.from_file(tmp_path / "absent.json")


def test_sweep_wavelengths() -> None:
    assert sweep_wavelengths(AnalysisConfig(sweep_nm=(920.0, 940.0, 5.0))) == [920.0, 925.0, 930.0, 935.0, 940.0]
    assert sweep_wavelengths(AnalysisConfig(sweep_nm=(920.0, 940.0, 1.0))) == [930.0]
    assert sweep_wavelengths(AnalysisConfig(sweep_count=3), (900.0, 910.0)) == [900.0, 905.0, 910.0]
    with pytest.raises(ConfigError):
        sweep_wavelengths(AnalysisConfig())
