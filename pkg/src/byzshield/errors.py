"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError` (CLI exit code 2),
aggregator applicability failures from :class:`GuardError` (exit code 3) and
numerical blow-ups from :class:`Diverged` (exit code 4).
"""


class ByzShieldError(Exception):
    pass


class ConfigError(ByzShieldError, ValueError):
    pass


class NotPrime(ConfigError):
    pass


class Unsupported(ConfigError):
    pass


class TooManyRequested(ConfigError):
    pass


class DegreeMismatch(ConfigError):
    pass


class InvalidParams(ConfigError):
    pass


class RNotOdd(InvalidParams):
    pass


class NotBiregular(ConfigError):
    pass


class OutOfRegime(ConfigError):
    pass


class MissingStats(ConfigError):
    pass


class WrongArity(ConfigError):
    pass


class EmptyInput(ConfigError):
    pass


class GuardError(ByzShieldError):
    pass


class TooFewOperands(GuardError):
    """Raised when a robust aggregator gets fewer operands than it needs."""

    def __init__(self, name, n_operands, required, byz_bound):
        self.name = name
        self.n_operands = n_operands
        self.required = required
        self.byz_bound = byz_bound
        super().__init__(
            f"{name} needs at least {required} operands for byz_bound={byz_bound}, "
            f"got {n_operands}"
        )


class Diverged(ByzShieldError, ArithmeticError):
    pass


class ByzantineFractionWarning(UserWarning):
    """q/K is at least 1/2, outside the usual attack model."""
