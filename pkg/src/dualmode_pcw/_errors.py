"""Error types raised by the design toolkit"""
from typing import Any, Dict

#: exit code for failures of a computation (no gap, no guided crossing, ...)
COMPUTATION_ERROR = 1
#: exit code for invalid user input (configuration, command line)
USAGE_ERROR = 2


class PcwError(RuntimeError):
    """Base class of every error the toolkit raises on purpose."""

    #: process exit code the command line front end reports for this error
    code: int = COMPUTATION_ERROR

    def __init__(self, msg: str, **details: Any) -> None:
        super().__init__(msg)
        #: the human readable message
        self.msg = msg
        #: structured context of the failure (parameter values, field names, ...)
        self.details: Dict[str, Any] = details

    @property
    def exc_type(self) -> str:
        """:return: the name of the error type"""
        return self.__class__.__name__

    def to_dict(self) -> Dict[str, Any]:
        """:return: machine readable representation, as written by the command line front end"""
        result: Dict[str, Any] = {"code": self.code, "exc_type": self.exc_type, "exc_msg": self.msg}
        if self.details:
            result["details"] = {k: _jsonable(v) for k, v in sorted(self.details.items())}
        return result

    def __str__(self) -> str:
        return f"{self.exc_type} (code={self.code}): {self.msg}"

    def __repr__(self) -> str:
        details = "".join(f", {k}={v!r}" for k, v in sorted(self.details.items()))
        return f"{self.__class__.__name__}(msg={self.msg!r}{details})"


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


class InvalidParameter(PcwError, ValueError):
    """A physical or numerical parameter violates its documented range."""

    code = USAGE_ERROR


class ConfigError(InvalidParameter):
    """The run configuration is malformed, incomplete or contains unknown keys."""


class NoGuidedMode(PcwError):
    """The slab dispersion relation has no root in the guided-mode bracket."""


class OverlappingHoles(InvalidParameter):
    """Two holes of a supercell intersect (periodic images included)."""


class BasisTooLarge(PcwError):
    """The plane-wave basis exceeds the configured size cap."""


class BasisTooSmall(InvalidParameter):
    """The plane-wave basis holds only the constant wave."""


class SingularEpsilon(PcwError):
    """The Fourier matrix of the permittivity cannot be inverted reliably."""


class EigSolveFailure(PcwError):
    """The dense Hermitian eigensolver did not converge."""


class NoGap(PcwError):
    """The bulk crystal has no band gap between its first two TE bands."""


class AsymmetricGeometry(InvalidParameter):
    """A parity operation was requested on a geometry without mirror symmetry."""


class NoneFound(PcwError):
    """No guided band crosses the requested frequency."""


class ZeroField(PcwError):
    """The field energy underflows, the mode cannot be normalized."""


class EmptyMask(PcwError):
    """No grid point qualifies for the effective emitter area."""


class TrackingAmbiguity(UserWarning):
    """Band identity across neighbouring k-points is ambiguous (best overlap below 0.5)."""


class FlatBand(UserWarning):
    """The band is flat to numerical precision, its group index diverges."""


__all__ = [
    "COMPUTATION_ERROR",
    "USAGE_ERROR",
    "PcwError",
    "InvalidParameter",
    "ConfigError",
    "NoGuidedMode",
    "OverlappingHoles",
    "BasisTooLarge",
    "BasisTooSmall",
    "SingularEpsilon",
    "EigSolveFailure",
    "NoGap",
    "AsymmetricGeometry",
    "NoneFound",
    "ZeroField",
    "EmptyMask",
    "TrackingAmbiguity",
    "FlatBand",
]
