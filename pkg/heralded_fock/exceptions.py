"""Known errors raised by the simulator and the state compiler."""

from typing import Optional


class HeraldedFockError(Exception):
    """Base exception for known errors."""


class InvalidModeError(HeraldedFockError, ValueError):
    """Raised when a mode index is out of range or a mode pair is not distinct."""


class IncompatibleStatesError(HeraldedFockError, ValueError):
    """Raised when two states do not share the same mode layout and photon cap."""


class PhotonCapOverflowError(HeraldedFockError):
    """Raised when a creation operator would push a ket above the photon cap."""


class ZeroNormError(HeraldedFockError):
    """Raised when a state with zero norm is normalized or compared."""


class ZeroPolynomialError(HeraldedFockError):
    """Raised when every coefficient of a characteristic polynomial vanishes."""


class TargetSpecError(HeraldedFockError):
    """Raised when a target specification cannot be parsed or is invalid."""


class ConfigurationError(HeraldedFockError, ValueError):
    """Raised when a run option, environment setting or sweep range is invalid."""


class DegenerateStageError(HeraldedFockError):
    """Raised when a recursion step leaves no a/b component to read an angle from."""

    def __init__(self, message: str, stage: int):
        super().__init__(message)
        self.message = message
        self.stage = stage


class SolverConvergenceError(HeraldedFockError):
    """Raised when a chain stage cannot be matched to its ideal beam splitter."""

    def __init__(self, message: str, stage: int, residual: Optional[float] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage
        self.residual = residual


class ZeroProbabilityBranchError(HeraldedFockError):
    """Raised when a heralding outcome has zero probability."""

    def __init__(self, message: str, stage: int):
        super().__init__(message)
        self.message = message
        self.stage = stage
