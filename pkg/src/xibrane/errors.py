"""Exception hierarchy.

Every error carries a module-qualified ``code`` and the process exit status the
CLI maps it to (2 config, 3 numeric non-convergence, 4 domain).
"""

from __future__ import annotations


class XibraneError(Exception):
    module = "core"
    exit_code = 1

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"

    def record(self) -> dict:
        out = {"code": self.code, "message": str(self)}
        out.update({k: str(v) for k, v in self.details.items()})
        return out


class ConfigError(XibraneError):
    module = "cli"
    exit_code = 2


class UnknownKey(ConfigError):
    pass


class ConfigTypeError(ConfigError):
    pass


class MissingFile(ConfigError):
    pass


class NumericalError(XibraneError):
    exit_code = 3


class NonConvergence(NumericalError):
    module = "numeric"

    def __init__(self, message="", best=None, estimate=None, **details):
        super().__init__(message, **details)
        self.best = best
        self.estimate = estimate


class IntegrandEvaluationFailure(NumericalError):
    module = "numeric"


class WindowTooSmall(NumericalError):
    module = "numeric"


class TailBudgetTooLoose(NumericalError):
    module = "theta"


class SeriesTruncationError(NumericalError):
    module = "xi"

    def __init__(self, message="", estimate=None, **details):
        super().__init__(message, **details)
        self.estimate = estimate


class ContourDivergence(NumericalError):
    module = "airy"


class ConfluenceUnstable(NumericalError):
    module = "brane"


class InsufficientSamples(NumericalError):
    module = "mc"


class DomainError(XibraneError, ValueError):
    exit_code = 4


class LogOfZeroConstantTerm(DomainError):
    module = "numeric"


class ComposeNonzeroConstantTerm(DomainError):
    module = "numeric"


class OrderMismatch(DomainError):
    module = "numeric"


class OrderOverflow(DomainError):
    module = "numeric"


class ThetaDomainError(DomainError):
    module = "theta"


class RouteDomainError(DomainError):
    module = "xi"


class NearZeroSingularity(DomainError):
    module = "xi"


class NonDecayingTruncation(DomainError):
    module = "pq"


class LoopDomainError(DomainError):
    module = "primes"


class RangeError(DomainError):
    module = "primes"


class ConvergenceDomainError(DomainError):
    module = "primes"


class PoleAtZero(DomainError):
    module = "gamma"


class SingularResolvent(DomainError):
    module = "mc"


class NonMonotoneRegion(DomainError):
    module = "mc"


class McDomainError(DomainError):
    module = "mc"
