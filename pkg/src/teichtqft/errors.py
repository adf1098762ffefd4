"""Exception hierarchy shared by all modules.

Every error carries an ``exit_code`` so the command line front end can map
failures to stable process exit statuses without a lookup table.
"""


class TqftError(Exception):
    exit_code = 1


# parsing / construction
class FormatSyntaxError(TqftError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class SemanticError(TqftError):
    exit_code = 3


class DuplicateSlot(SemanticError):
    pass


class InvalidIndex(SemanticError):
    pass


class SelfPairedFace(SemanticError):
    pass


class NonManifoldLink(SemanticError):
    pass


class DimensionMismatch(SemanticError):
    pass


# shapes
class NonPositiveAngles(SemanticError):
    pass


class NotBalanced(SemanticError):
    pass


class EmptyAffineSpace(SemanticError):
    pass


class Infeasible(SemanticError):
    exit_code = 7

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class UnboundedSlack(SemanticError):
    pass


class NotAdmissible(TqftError):
    exit_code = 4


class DegenerateDeltaSystem(NotAdmissible):
    pass


# numerics
class QuadratureError(TqftError):
    exit_code = 5


class NoDecay(QuadratureError):
    pass


class ToleranceNotMet(QuadratureError):
    pass


class PoleProximity(QuadratureError):
    pass


class ArgumentOutOfCalibratedRange(QuadratureError):
    pass


class NonPositiveB(SemanticError):
    pass


class IllConditionedFit(QuadratureError):
    pass


class TruncationInsufficient(QuadratureError):
    pass


class GridTooCoarse(QuadratureError):
    pass


# moves
class InvalidSite(TqftError):
    exit_code = 6


class InfeasiblePositivity(Infeasible):
    exit_code = 7


class ParameterError(SemanticError):
    pass
