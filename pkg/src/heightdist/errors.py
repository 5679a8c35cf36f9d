"""Exception hierarchy shared by every module."""


class HeightDistError(Exception):
    """Base class for all errors raised by this package."""


class ZeroPolynomial(HeightDistError, ValueError):
    pass


class NotDivisible(HeightDistError, ArithmeticError):
    pass


class NotPrimitive(HeightDistError, ValueError):
    pass


class NotSquarefree(HeightDistError, ValueError):
    pass


class ConstantPolynomial(HeightDistError, ValueError):
    pass


class NoConvergence(HeightDistError, RuntimeError):
    pass


class ClusterDetected(HeightDistError, RuntimeError):
    """Certified root disks overlap; the root set cannot be separated."""


class NodeOnRoot(HeightDistError, ArithmeticError):
    pass


class DegreeTooSmall(HeightDistError, ValueError):
    pass


class ZeroIsRoot(HeightDistError, ValueError):
    pass


class SchemaError(HeightDistError, ValueError):
    pass


class InvariantViolation(HeightDistError, ValueError):
    pass


class VanishingEndCoefficient(HeightDistError, ValueError):
    pass


class NoGap(HeightDistError, RuntimeError):
    pass


class BadWindow(HeightDistError, ValueError):
    pass
