"""
Exception hierarchy for configuration and numerical failures.
"""
from typing import Optional


class QDMollowError(Exception):
    """Base class for every error raised by the simulator"""


class ConfigError(QDMollowError, ValueError):
    """Invalid run configuration or input file"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line


class LDOSFormatError(ConfigError):
    """Tabulated LDOS file violates the documented format"""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(f"row {row}: {message}" if row is not None else message, line=row)
        self.row = row


class SpectrumAnalysisError(QDMollowError, ValueError):
    """Peak analysis could not identify the requested features"""


class NumericalError(QDMollowError, ArithmeticError):
    """Base class for numerical failures"""


class QuadratureError(NumericalError):
    """An integral did not converge within tolerance"""

    def __init__(self, quantity: str, estimate: float, message: str = ""):
        super().__init__(
            message or f"quadrature for {quantity} did not converge (error estimate {estimate:.3e})"
        )
        self.quantity = quantity
        self.estimate = estimate


class BranchViolationError(NumericalError):
    """Reservoir spectral function came out negative"""


class DegenerateSteadyStateError(NumericalError):
    """Generator has more than one stationary state"""


class PositivityError(NumericalError):
    """Steady state has a negative eigenvalue beyond tolerance"""


class UnresolvedDecayError(NumericalError):
    """Correlation has not reached its long-time limit on the time grid"""

    def __init__(self, quantity: str, residual: float):
        super().__init__(f"{quantity} not converged at the end of the time grid (residual {residual:.3e})")
        self.quantity = quantity
        self.residual = residual


class DegenerateDressedStateError(NumericalError):
    """Dressed-state coefficients are undefined for the given drive and detuning"""


class UnphysicalRatesError(NumericalError):
    """Rate set would make the undriven population decay negative"""
