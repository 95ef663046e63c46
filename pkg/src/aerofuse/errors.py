"""Exception taxonomy shared across the package."""


class AerofuseError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedPlaneCount(AerofuseError):
    pass


class UnknownColormap(AerofuseError):
    pass


class SizeMismatch(AerofuseError):
    pass


class EmptyInput(AerofuseError):
    pass


class DegenerateHomography(AerofuseError):
    pass


class EmptyStack(AerofuseError):
    pass


class NoBlobFound(AerofuseError):
    pass


class NonConvergence(AerofuseError):
    pass


class BadMagic(AerofuseError):
    pass


class ShapeMismatch(AerofuseError):
    pass


class TruncatedFile(AerofuseError):
    pass


class WeightsMissing(AerofuseError):
    pass


class TooSmall(AerofuseError):
    pass
