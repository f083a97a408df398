"""Exception types. Each carries a stable ``code`` used in reports and CLI output."""


class CalogeroError(Exception):
    code = "ERROR"


class PositionCollision(CalogeroError, ValueError):
    code = "POSITION_COLLISION"


class NotCMPair(CalogeroError, ValueError):
    code = "NOT_CM_PAIR"


class DegenerateSpectrum(CalogeroError, ArithmeticError):
    code = "DEGENERATE_SPECTRUM"


class NormalizationFailure(CalogeroError, ArithmeticError):
    code = "NORMALIZATION_FAILURE"


class IdentityViolation(CalogeroError, ArithmeticError):
    code = "IDENTITY_VIOLATION"


class EvalFailure(CalogeroError, ArithmeticError):
    code = "EVAL_FAILURE"


class SingularChart(CalogeroError, ArithmeticError):
    code = "SINGULAR_CHART"


class IndexOutOfRange(CalogeroError, IndexError):
    code = "INDEX_OUT_OF_RANGE"


class PreconditionViolation(CalogeroError, ValueError):
    code = "PRECONDITION_VIOLATION"


class CouplingUnsupported(CalogeroError, ValueError):
    code = "COUPLING_UNSUPPORTED"


class Degenerate(CalogeroError, ArithmeticError):
    code = "DEGENERATE"


class CollisionDetected(CalogeroError, RuntimeError):
    code = "COLLISION_DETECTED"


class StepUnderflow(CalogeroError, RuntimeError):
    code = "STEP_UNDERFLOW"


class BranchAmbiguity(CalogeroError, RuntimeError):
    code = "BRANCH_AMBIGUITY"


class NoConvergence(CalogeroError, RuntimeError):
    code = "NO_CONVERGENCE"
