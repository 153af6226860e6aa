"""Exception and warning types raised across the package."""


class TopoStatError(Exception):
    """Base class for all errors raised by topostat."""


class ComplexValidationError(TopoStatError, ValueError):
    """A simplicial complex violates one of its structural invariants."""


class MissingFace(ComplexValidationError):
    def __init__(self, simplex, face):
        self.simplex = tuple(simplex)
        self.face = tuple(face)
        super().__init__(f"simplex {self.simplex} is missing face {self.face}")


class UnsortedSimplex(ComplexValidationError):
    pass


class DuplicateSimplex(ComplexValidationError):
    pass


class VertexOutOfRange(ComplexValidationError):
    pass


class OrderOutOfRange(TopoStatError, ValueError):
    pass


class ParseError(TopoStatError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class DimensionMismatch(TopoStatError, ValueError):
    pass


class UnlabeledBasis(TopoStatError, ValueError):
    """Hodge subspace labels were requested from a basis that has none."""


class SingularARResponse(TopoStatError, ArithmeticError):
    def __init__(self, index, eigenvalue):
        self.index = int(index)
        self.eigenvalue = float(eigenvalue)
        super().__init__(
            f"autoregressive response vanishes at eigenvalue {index} "
            f"(lambda = {self.eigenvalue:.6g})"
        )


class NonOrthonormalSubspace(TopoStatError, ValueError):
    pass


class NonpositivePsd(TopoStatError, ValueError):
    pass


class NonpositiveNoiseVariance(TopoStatError, ValueError):
    pass


class ZeroReference(TopoStatError, ZeroDivisionError):
    pass


class DegenerateSpectrum(TopoStatError, ValueError):
    pass


class ConfigError(TopoStatError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DegenerateRecoveryWarning(UserWarning):
    """A recovery problem was degenerate; a fallback solution was returned."""


class FitWarning(UserWarning):
    """A parametric fit was rank deficient or produced a suspicious model."""
