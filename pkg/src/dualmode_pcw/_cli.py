"""Command line front end: ``dualmode-pcw <command> [options]``"""
import logging
import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from ._bands import find_bandgap
from ._config import RunConfig, parse_budget, parse_config, read_document
from ._errors import ConfigError, NoGap, PcwError
from ._output import (
    budget_table,
    dump_json,
    output_name,
    plot_bands,
    plot_maps,
    plot_sweep,
    summary_dict,
    write_bands,
    write_bulk_bands,
    write_cutline,
    write_json,
    write_maps,
    write_sweep,
)
from ._pipeline import eta_from_db
from ._util import ensure_output_dir
from ._version import version
from ._workflow import (
    Section,
    maps_for,
    peak_report,
    reference_gap,
    resolve_device,
    scan_bulk,
    scan_waveguide,
    source_report,
    sweep,
)

LOGGER = logging.getLogger(__name__)

_SECTIONS = ("device", "solver", "analysis", "budget")


def load_config(args: Namespace) -> RunConfig:
    """
    Read the configuration named on the command line and apply the flag overrides.

    :param args: the parsed command line
    :return: the configuration, defaults when no file is given
    """
    config = RunConfig() if args.config is None else RunConfig.from_file(args.config)
    if args.out is not None:
        config = config._replace(output_dir=str(args.out))
    if args.plot:
        config = config._replace(plot=True)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1", field="threads", value=args.threads)
        config = config._replace(threads=args.threads)
    if args.eta_db is not None:
        config = config._replace(analysis=config.analysis._replace(eta=eta_from_db(args.eta_db)))
    return config


def _out(config: RunConfig) -> Path:
    return ensure_output_dir(Path(config.output_dir))


def cmd_bulk_bands(args: Namespace) -> int:
    config = load_config(args)
    device = resolve_device(config)
    bands = scan_bulk(config, device, config.threads)
    out, wavelength = _out(config), config.device.wavelength_nm
    write_bulk_bands(out / output_name("bulk-bands", "bulk", wavelength), bands)
    report: Dict[str, Any] = {"provenance": bands.provenance._asdict()}
    gap = None
    try:
        gap = find_bandgap(bands)
    except NoGap as exc:
        LOGGER.warning("%s", exc.msg)
        report.update(gap=None, error=exc.to_dict())
    else:
        report["gap"] = gap.to_dict(device.lattice.a)
    write_json(out / output_name("bulk-bands", "bulk", wavelength, "gap", ".json"), report)
    if config.plot:
        plot_bands(out / output_name("bulk-bands", "bulk", wavelength, suffix=".svg"), bands, gap)
    dump_json(report, sys.stdout)
    return 0


def cmd_wg_bands(args: Namespace) -> int:
    config = load_config(args)
    section = Section(args.section)
    device = resolve_device(config)
    gap = reference_gap(config, device, config.threads)
    scan = scan_waveguide(config, device, section, gap, config.threads)
    bands = scan.bands
    out, wavelength, name = _out(config), config.device.wavelength_nm, "wg-bands"
    write_bands(out / output_name(name, section.value, wavelength), bands)
    report: Dict[str, Any] = {
        "section": section.value,
        "gap": None if gap is None else gap.to_dict(device.lattice.a),
        "guided": [{"band": i, "parity": bands.parity[i].value} for i, guided in enumerate(bands.guided) if guided],
        "provenance": bands.provenance._asdict(),
    }
    if section is Section.DUAL:
        peak = peak_report(scan)
        report["ng_peak"] = None if peak is None else peak._asdict()
        write_json(out / output_name(name, section.value, wavelength, "ng-peak", ".json"), report["ng_peak"])
    if config.plot:
        plot_bands(out / output_name(name, section.value, wavelength, suffix=".svg"), bands, gap)
    dump_json(report, sys.stdout)
    return 0


def cmd_maps(args: Namespace) -> int:
    config = load_config(args)
    wavelengths: List[float] = list(args.wavelength or config.analysis.wavelengths_nm)
    if not wavelengths:
        raise ConfigError("no wavelength, pass --wavelength or set analysis.wavelengths_nm", field="wavelength")
    out = _out(config)
    summaries = []
    for wavelength, result in zip(wavelengths, maps_for(config, wavelengths, config.threads)):
        write_maps(out / output_name("maps", "dual", wavelength), result.maps)
        write_cutline(out / output_name("maps", "dual", wavelength, "cutline"), result.cutline)
        summary = summary_dict(result.summary, result.monte_carlo)
        write_json(out / output_name("maps", "dual", wavelength, "summary", ".json"), summary)
        if config.plot:
            plot_maps(out / output_name("maps", "dual", wavelength, suffix=".svg"), result.maps)
        summaries.append(summary)
    dump_json(summaries, sys.stdout)
    return 0


def cmd_sweep(args: Namespace) -> int:
    config = load_config(args)
    result = sweep(config, config.threads)
    out, start = _out(config), result.window_nm[0]
    write_sweep(out / output_name("sweep", "dual", start), result.rows)
    report = {"window_nm": list(result.window_nm), "rows": [summary_dict(row) for row in result.rows]}
    write_json(out / output_name("sweep", "dual", start, suffix=".json"), report)
    if config.plot:
        plot_sweep(out / output_name("sweep", "dual", start, suffix=".svg"), result.rows)
    dump_json(report, sys.stdout)
    return 0


def _budget_document(path: Optional[Path]) -> RunConfig:
    if path is None:
        raise ConfigError("pipeline needs a budget document, pass --config", field="config")
    data = read_document(path)
    if set(data) & set(_SECTIONS):
        config = parse_config(data)
        if config.budget is None:
            raise ConfigError("missing key budget", field="budget")
        return config
    # a bare budget mapping
    return RunConfig(budget=parse_budget(data))


def cmd_pipeline(args: Namespace) -> int:
    config = _budget_document(args.config)
    assert config.budget is not None
    eta = None if args.eta_db is None else eta_from_db(args.eta_db)
    _, report = source_report(config.budget, config.analysis, config.device.a_nm, eta)
    dump_json(report, sys.stdout)
    sys.stderr.write(budget_table(report))
    return 0


def cmd_slab_neff(args: Namespace) -> int:
    config = load_config(args)
    device = resolve_device(config)
    report = {
        "n_eff": device.n_eff,
        "mode_height_nm": device.mode_height,
        "eps_bg": device.lattice.eps_bg,
        "wavelength_nm": device.slab.wavelength,
        "thickness_nm": device.slab.thickness,
    }
    dump_json(report, sys.stdout)
    return 0


def build_parser() -> ArgumentParser:
    """:return: the parser of the command line"""
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="run configuration, JSON or TOML")
    common.add_argument("--out", type=Path, default=None, help="output directory (overrides the configuration)")
    common.add_argument("--plot", action="store_true", help="also write SVG figures")
    common.add_argument("--threads", type=int, default=None, help="worker threads")
    common.add_argument("--eta-db", type=float, default=None, dest="eta_db", help="pump extinction in dB")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging, repeat for debug")

    parser = ArgumentParser(prog="dualmode-pcw", description="dual-mode photonic-crystal waveguide design toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {version}")
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add(name: str, func: Callable[[Namespace], int], help_: str) -> ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_, description=help_)
        sub.set_defaults(func=func)
        return sub

    add("bulk-bands", cmd_bulk_bands, "bands of the bulk crystal along Γ-M-K-Γ and its TE gap")
    wg_bands = add("wg-bands", cmd_wg_bands, "tracked bands, parity and group index of a waveguide section")
    wg_bands.add_argument("section", choices=[s.value for s in Section])
    maps = add("maps", cmd_maps, "Purcell, β and impurity maps of the dual-mode section")
    maps.add_argument("--wavelength", type=float, action="append", help="wavelength (nm), repeatable")
    add("sweep", cmd_sweep, "area fractions across a wavelength interval")
    add("pipeline", cmd_pipeline, "efficiency and laser-impurity budget of the source")
    add("slab-neff", cmd_slab_neff, "effective index and mode height of the membrane")
    return parser


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger().setLevel(level)
    logging.captureWarnings(True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    :param argv: the arguments, ``sys.argv[1:]`` when not given
    :return: ``0`` on success, ``1`` when a computation fails, ``2`` for invalid input
    """
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return int(args.func(args))
    except PcwError as exc:
        LOGGER.debug("%s failed", args.command, exc_info=True)
        dump_json(exc.to_dict(), sys.stderr)
        return exc.code


__all__ = [
    "main",
    "build_parser",
    "load_config",
]
