"""
Exception hierarchy for the rearrangement lab.

Every failure a library call can raise derives from RearrangeLabError and
carries the process exit code the CLI maps it to.
"""

from typing import Optional


class RearrangeLabError(Exception):
    """Base class for all lab errors"""

    exit_code = 1


class PreconditionError(RearrangeLabError, ValueError):
    """Input violates an operation's precondition"""

    exit_code = 2


class SupportOverflow(PreconditionError):
    """A family of supports does not fit into the measure space"""


class PartitionMismatch(PreconditionError):
    """Functions cannot be overlaid on the supplied common partition"""


class NonConvergenceError(RearrangeLabError, ArithmeticError):
    """A numerical procedure stopped before reaching its tolerance"""

    exit_code = 3

    def __init__(self, message: str, value: float = float('nan'), error_estimate: float = float('inf')):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class CertificateFailure(RearrangeLabError):
    """A certificate's conditions are not met"""

    exit_code = 4


class NoPositiveEpsilon(CertificateFailure):
    """No lambda in (0, 1) yields a positive separation constant"""


class MembershipViolation(CertificateFailure):
    """Profile lies outside the unit ball of the Sobolev space"""

    def __init__(self, gradient_norm: float):
        super().__init__(f"gradient L^n norm {gradient_norm!r} exceeds 1")
        self.gradient_norm = gradient_norm


class QuasinormBelowLambda(CertificateFailure):
    """A dilated witness has quasinorm below the requested lambda"""

    def __init__(self, kappa: float, quasinorm: float, lam: float, report: Optional[dict] = None):
        super().__init__(
            f"quasinorm {quasinorm!r} at kappa={kappa!r} is below lambda={lam!r}"
        )
        self.kappa = kappa
        self.quasinorm = quasinorm
        self.lam = lam
        self.report = report or {}
