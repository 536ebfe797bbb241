"""Exception hierarchy shared by every module."""


class SMError(Exception):
    """Base class for all errors raised by smexpfam."""


class NotPositiveDefinite(SMError, ValueError):
    pass


class DimensionMismatch(SMError, ValueError):
    pass


class OutOfDomain(SMError, ValueError):
    """A natural parameter (or a combination of them) left the parameter space."""


class InvalidOrder(SMError, ValueError):
    """Entropy order or scaling factor is not admissible (alpha <= 0)."""


class FamilyMismatch(SMError, ValueError):
    pass


class InvalidSample(SMError, ValueError):
    """Sample point outside the family's sample space."""


class CarrierNotZero(SMError, ValueError):
    """The closed form needs k(x) = 0; use the carrier-corrected path instead."""


class CarrierIsZero(SMError, ValueError):
    """The carrier expectation is identically 1 for this family."""


class DegenerateSample(SMError, ValueError):
    """Sample moments do not define a valid natural parameter."""
