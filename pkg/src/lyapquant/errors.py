"""Exception hierarchy shared by all lyapquant modules."""


class LyapquantError(Exception):
    """Base class for every error raised by this package."""


# -- expressions -------------------------------------------------------------

class ExprSyntaxError(LyapquantError, ValueError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, position, message):
        self.position = position
        self.message = message
        super().__init__(f"at offset {position}: {message}")


class UnknownIdentifier(LyapquantError, ValueError):
    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier {name!r}")


class NonFinite(LyapquantError, ArithmeticError):
    """Evaluation produced NaN or Inf."""

    def __init__(self, point):
        self.point = tuple(float(v) for v in point)
        super().__init__(f"non-finite value at {self.point}")


# -- fields ------------------------------------------------------------------

class OriginNotZero(LyapquantError, ValueError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"F(0) = {value!r}, expected 0")


class NotEquilibrium(LyapquantError, ValueError):
    def __init__(self, value):
        self.value = tuple(value)
        super().__init__(f"f(0) = {self.value!r}, origin is not an equilibrium")


# -- level sets --------------------------------------------------------------

class LevelSetError(LyapquantError):
    """Base for failures while extracting a hypersurface."""


class NoBoundingComponent(LevelSetError):
    pass


class AmbiguousOrientation(LevelSetError):
    def __init__(self, level, agreement):
        self.level = level
        self.agreement = agreement
        super().__init__(
            f"level {level!r}: gradient points inward at {agreement:.3%} of vertices")


class NotRegular(LevelSetError):
    def __init__(self, level, min_grad, tol):
        self.level = level
        self.min_grad = min_grad
        self.tol = tol
        super().__init__(f"level {level!r}: min |grad F| = {min_grad:.3e} <= {tol:.3e}")


class OpenSurface(LevelSetError):
    pass


class NoRegularLevel(LevelSetError):
    def __init__(self, level):
        self.level = level
        super().__init__(f"no regular level found near {level!r}")


class SequenceInvariantError(LevelSetError):
    """A built hypersurface sequence violates ordering or shrinking rules."""


class NestingViolation(SequenceInvariantError):
    def __init__(self, i, j, witness):
        self.i = i
        self.j = j
        self.witness = tuple(float(v) for v in witness)
        super().__init__(f"vertex {self.witness} of surface {j} lies outside region {i}")


# -- application -------------------------------------------------------------

class UnknownSystem(LyapquantError, KeyError):
    def __init__(self, name, available):
        self.name = name
        self.available = list(available)
        super().__init__(f"unknown system {name!r}; available: {', '.join(self.available)}")

    def __str__(self):
        return self.args[0]


class Unsupported(LyapquantError):
    pass


class ConfigError(LyapquantError, ValueError):
    pass
