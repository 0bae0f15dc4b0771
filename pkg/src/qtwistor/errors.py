"""Exception hierarchy shared by all qtwistor modules."""


class QTwistorError(Exception):
    """Base class for every error raised by this package."""


class ExprSyntaxError(QTwistorError, ValueError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


class UnknownSymbolError(QTwistorError, NameError):
    def __init__(self, name, text="", position=0):
        self.name = name
        self.text = text
        self.position = position
        super().__init__(f"unknown symbol {name!r} at position {position} in {text!r}")


class DomainError(QTwistorError, ArithmeticError):
    """Evaluation left the domain of a function (division by zero, log of x <= 0, ...)."""


class DimensionError(QTwistorError, ValueError):
    pass


class NotComplexStructure(QTwistorError, ValueError):
    pass


class DegenerateSample(QTwistorError, RuntimeError):
    pass


class SingularMetric(QTwistorError, ValueError):
    pass


class NotSkew(QTwistorError, ValueError):
    pass


class NotQuaternionic(QTwistorError, ValueError):
    pass


class NotQuaternionicPair(QTwistorError, ValueError):
    pass


class InputsNotQKT(QTwistorError, ValueError):
    pass


class InputsNotTorsionFree(QTwistorError, ValueError):
    pass


class SceneError(QTwistorError, ValueError):
    """Invalid scene document; ``field`` names the offending key path."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
