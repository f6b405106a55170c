"""Scalar efficiency and laser-impurity budget of the cascaded source, in the limit of weak excitation"""
import logging
import math
from typing import Any, Dict, NamedTuple, Optional, Tuple

from scipy.stats import norm

from ._errors import InvalidParameter

LOGGER = logging.getLogger(__name__)

#: typical quantum dot surface density (µm⁻²)
QD_DENSITY_UM2 = 10.0
#: centre and standard deviation of the inhomogeneous emitter distribution (nm)
INHOMOGENEOUS_CENTER_NM = 930.0
INHOMOGENEOUS_SIGMA_NM = 10.0


class BudgetInputs(NamedTuple):
    """Transmissions of the filter sections, pump split and emitter couplings"""

    #: transmission of the even mode through the input mode filter
    t_1in: float
    #: transmission of the odd mode through the input mode filter
    t_2in: float
    #: transmission of the even mode through the output section
    t_1out: float
    #: coupling of the emitter to the even (collection) mode
    beta1: float
    #: coupling of the emitter to the odd (excitation) mode
    beta2: float
    #: pump power launched in the even mode (relative)
    i_l1: float = 0.5
    #: pump power launched in the odd mode (relative)
    i_l2: float = 0.5
    #: transmission of the odd mode through the output section, reported only
    t_2out: float = 0.0


class SourceBudget(NamedTuple):
    """The budget with every derived quantity filled in"""

    inputs: BudgetInputs
    #: extinction of the pump in the collection mode
    eta: float
    #: residual laser intensity in the output
    i_res: float
    #: single photon intensity in the output
    i_ph: float
    #: laser impurity ``I_res / I_ph``
    epsilon: float
    #: zero-delay second-order correlation ``2ε - ε²``
    g2: float
    #: collection efficiency estimate ``β1 T_1out``
    t_col_estimate: float
    #: excitation efficiency estimate ``I_l2 T_2in β2``
    t_exc_estimate: float

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"inputs": dict(self.inputs._asdict())}
        result.update((k, v) for k, v in self._asdict().items() if k != "inputs")
        return result


def _check_unit(**values: float) -> None:
    for name, value in values.items():
        if not 0.0 <= value <= 1.0:
            raise InvalidParameter(f"{name} must lie in [0, 1]", **{name: value})


def single_interface_from_two_port(t_two_port: float) -> float:
    """
    Transmission of one interface of a section measured as a two-port (both interfaces in series).

    :param t_two_port: transmission through the whole section
    :return: its square root
    """
    _check_unit(t_two_port=t_two_port)
    return math.sqrt(t_two_port)


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else math.inf


def compute_budget(inputs: BudgetInputs) -> SourceBudget:
    """
    Derive the impurity and the efficiency estimates of the source.

    The pump split is normalized to ``I_l1 + I_l2 = 1``. The impurity is ``η / (β1 β2)``, so ``T_1out`` cancels.

    :param inputs: the budget inputs
    :return: the budget, ``+inf`` marks a vanishing single photon signal
    """
    _check_unit(
        t_1in=inputs.t_1in,
        t_2in=inputs.t_2in,
        t_1out=inputs.t_1out,
        t_2out=inputs.t_2out,
        beta1=inputs.beta1,
        beta2=inputs.beta2,
    )
    pump = inputs.i_l1 + inputs.i_l2
    if inputs.i_l1 < 0 or inputs.i_l2 < 0 or not pump > 0:
        raise InvalidParameter("pump powers must be non-negative and not both zero", i_l1=inputs.i_l1, i_l2=inputs.i_l2)
    inputs = inputs._replace(i_l1=inputs.i_l1 / pump, i_l2=inputs.i_l2 / pump)
    eta = _ratio(inputs.i_l1 * inputs.t_1in, inputs.i_l2 * inputs.t_2in)
    i_res = inputs.i_l1 * inputs.t_1in * inputs.t_1out
    i_ph = inputs.i_l2 * inputs.t_2in * inputs.beta2 * inputs.beta1 * inputs.t_1out
    coupled = inputs.beta1 * inputs.beta2
    epsilon = eta / coupled if coupled > 0 and math.isfinite(eta) else math.inf
    budget = SourceBudget(
        inputs=inputs,
        eta=eta,
        i_res=i_res,
        i_ph=i_ph,
        epsilon=epsilon,
        g2=2.0 * epsilon - epsilon**2 if math.isfinite(epsilon) else math.nan,
        t_col_estimate=inputs.beta1 * inputs.t_1out,
        t_exc_estimate=inputs.i_l2 * inputs.t_2in * inputs.beta2,
    )
    LOGGER.info("eta=%.4g epsilon=%.4g g2=%.4g", budget.eta, budget.epsilon, budget.g2)
    return budget


def eta_from_db(db: float) -> float:
    """:return: the linear extinction of ``db`` decibels"""
    return float(10.0 ** (db / 10.0))


def eta_to_db(eta: float) -> float:
    """:return: the extinction in decibels"""
    if not eta > 0:
        raise InvalidParameter("eta must be positive", eta=eta)
    return 10.0 * math.log10(eta)


def required_beta2(eta: float, beta1: float, epsilon_target: float) -> float:
    """
    Least coupling to the excitation mode reaching a target impurity.

    :return: ``η / (ε β1)``
    """
    if not (eta > 0 and beta1 > 0 and epsilon_target > 0):
        raise InvalidParameter(
            "eta, beta1 and the target impurity must be positive", eta=eta, beta1=beta1, epsilon_target=epsilon_target
        )
    return eta / (epsilon_target * beta1)


class EmitterYield(NamedTuple):
    """Expected number of usable emitters of a device"""

    #: share of the emitters inside the wavelength window
    spectral_fraction: float
    #: usable emitters per unit cell, any wavelength
    emitters_per_cell: float
    #: usable emitters per unit cell inside the window
    spectral_emitters_per_cell: float
    #: unit cells holding one usable emitter on average
    cells_per_emitter: float
    #: device length holding one usable emitter on average (µm)
    length_um: float


def emitter_yield(
    working_fraction: float,
    effective_area_um2: float,
    a_nm: float,
    window_nm: Tuple[float, float],
    qd_density_um2: float = QD_DENSITY_UM2,
    center_nm: float = INHOMOGENEOUS_CENTER_NM,
    sigma_nm: float = INHOMOGENEOUS_SIGMA_NM,
) -> EmitterYield:
    """
    Translate a working-area fraction into the device length needed to find one usable emitter.

    :param working_fraction: share of the effective area with high β and low impurity
    :param effective_area_um2: effective emitter area of one unit cell (µm²)
    :param a_nm: length of a unit cell (nm)
    :param window_nm: wavelength interval the device works in (nm)
    :param qd_density_um2: surface density of emitters (µm⁻²)
    :param center_nm: centre of the inhomogeneous distribution (nm)
    :param sigma_nm: standard deviation of the inhomogeneous distribution (nm)
    :return: the yield
    """
    _check_unit(working_fraction=working_fraction)
    low, high = window_nm
    if not (effective_area_um2 > 0 and a_nm > 0 and qd_density_um2 > 0 and sigma_nm > 0 and high > low):
        raise InvalidParameter(
            "areas, lengths, density, width and window must be positive",
            effective_area_um2=effective_area_um2,
            a_nm=a_nm,
            qd_density_um2=qd_density_um2,
            sigma_nm=sigma_nm,
            window_nm=window_nm,
        )
    spectral = float(norm.cdf(high, center_nm, sigma_nm) - norm.cdf(low, center_nm, sigma_nm))
    per_cell = qd_density_um2 * effective_area_um2 * working_fraction
    usable = per_cell * spectral
    cells = 1.0 / usable if usable > 0 else math.inf
    return EmitterYield(
        spectral_fraction=spectral,
        emitters_per_cell=per_cell,
        spectral_emitters_per_cell=usable,
        cells_per_emitter=cells,
        length_um=cells * a_nm / 1000.0,
    )


def budget_report(budget: SourceBudget, yield_: Optional[EmitterYield] = None) -> Dict[str, Any]:
    """:return: the machine readable report of the ``pipeline`` command"""
    report = budget.to_dict()
    report["eta_db"] = eta_to_db(budget.eta) if 0 < budget.eta < math.inf else None
    if yield_ is not None:
        report["yield"] = dict(yield_._asdict())
    return report


__all__ = [
    "BudgetInputs",
    "SourceBudget",
    "EmitterYield",
    "single_interface_from_two_port",
    "compute_budget",
    "eta_from_db",
    "eta_to_db",
    "required_beta2",
    "emitter_yield",
    "budget_report",
]
