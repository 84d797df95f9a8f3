"""Exception hierarchy.

Errors split in two families so the CLI can map them onto exit codes:
``ConfigError`` subclasses are bad input (exit 1), ``ResidualError``
subclasses are a mathematical check that did not hold (exit 2).
"""


class G2SurfError(ValueError):
    pass


class ConfigError(G2SurfError):
    pass


class ResidualError(G2SurfError):
    pass


class DependentInput(ConfigError):
    pass


class BadDimension(ConfigError):
    pass


class NotOrthogonal(ConfigError):
    pass


class HypothesisViolated(ConfigError):
    pass


class ConstraintViolated(ConfigError):
    pass


class NotInEquator(ConfigError):
    pass


class OutOfDomain(ConfigError):
    pass


class StepTooLarge(ConfigError):
    pass


class BranchPoint(ResidualError):
    pass


class DegenerateFrame(ResidualError):
    pass


class NotConformal(ResidualError):
    pass


class NotClosed(ResidualError):
    pass


class NotImmersion(ResidualError):
    pass


class DegenerateParallel(ResidualError):
    pass


class AssociativePoint(ResidualError):
    pass
