"""Exception hierarchy shared by all modules."""


class KloosterdivError(ValueError):
    """Base class for precondition failures raised by this package."""


class NotInvertible(KloosterdivError):
    pass


class NotAResidue(KloosterdivError):
    pass


class NotCoprime(KloosterdivError):
    pass


class NotPrime(KloosterdivError):
    pass


class UnsupportedModulus(KloosterdivError):
    pass


class CoefficientDivisible(KloosterdivError):
    """Some expansion coefficient c_j is divisible by p (p too small for k)."""

    def __init__(self, message, flags=None):
        super().__init__(message)
        self.flags = flags


class DegenerateRange(KloosterdivError):
    pass


class CapExceeded(KloosterdivError):
    pass


class ResidueNotCoprime(KloosterdivError):
    pass


class QuadratureFailure(KloosterdivError):
    pass


class BenchmarkMismatch(AssertionError):
    """Two evaluators disagreed; not a user error."""
