"""
Exception types raised by the numerical core.
"""


class SvtailError(Exception):
    pass


class ConfigError(SvtailError):
    pass


class NonConvergenceError(SvtailError):
    """An iterative solver stopped without reaching its tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class InfeasibleConstantsError(SvtailError):
    """A step of the chronological constant selection could not be satisfied."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class InfeasibleScheduleError(SvtailError):
    """The d-recursion of the highly compressible schedule has no solution."""

    def __init__(self, message: str, index: int, constraint: str):
        super().__init__(f"k={index}, {constraint}: {message}")
        self.index = index
        self.constraint = constraint


class ClassificationError(SvtailError):
    pass


class InfeasibleClassError(SvtailError):
    pass


class NotInSetError(SvtailError):
    pass
