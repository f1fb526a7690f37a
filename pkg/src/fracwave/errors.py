"""Exception hierarchy shared by all fracwave modules."""


class FracwaveError(Exception):
    """Base class for every error raised by the package."""


# mittag_leffler
class NonFiniteInput(FracwaveError, ValueError):
    pass


class UnsupportedOrder(FracwaveError, ValueError):
    pass


class AccuracyLoss(FracwaveError, ArithmeticError):
    pass


# frac_calculus
class InvalidOrder(FracwaveError, ValueError):
    pass


class TooFewNodes(FracwaveError, ValueError):
    pass


# spectral_grid
class GeometryMismatch(FracwaveError, ValueError):
    pass


class InvalidExponent(FracwaveError, ValueError):
    pass


class NonzeroMean(FracwaveError, ValueError):
    pass


class AliasWarning(UserWarning):
    """Kernel support approaches the box size; periodic images start to matter."""


# mild_solver
class BlowUpDetected(FracwaveError):
    def __init__(self, t_est, history=None):
        self.t_est = t_est
        self.history = history
        super().__init__(f"blow-up detected near t={t_est:.6g}")


class NoConvergence(FracwaveError):
    pass


class WindowTooSmall(FracwaveError, ValueError):
    pass


# regime_analyzer
class InvalidParams(FracwaveError, ValueError):
    pass


class EmptyDeltaWindow(FracwaveError, ValueError):
    pass


class InvalidDelta(FracwaveError, ValueError):
    pass


class DivergedIteration(FracwaveError):
    pass


# estimate_validator
class WindowViolation(FracwaveError, ValueError):
    pass


class InvalidBeta(FracwaveError, ValueError):
    pass


# cli_runner
class ConfigError(FracwaveError, ValueError):
    pass


class BracketInvalid(FracwaveError, ValueError):
    pass
